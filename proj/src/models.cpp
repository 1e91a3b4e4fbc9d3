#include "epidcov/models.hpp"

#include <cmath>
#include <cstdio>

#include "epidcov/error.hpp"

namespace epidcov {

HweMarginal hwe_marginal(double maf) {
  if (!(maf > 0.0) || maf > 0.5) {
    fail(Errc::MafOutOfRange, "minor allele frequency must lie in (0, 0.5]");
  }
  HweMarginal m;
  m.maf = maf;
  m.p0 = (1.0 - maf) * (1.0 - maf);
  m.p1 = 2.0 * maf * (1.0 - maf);
  m.p2 = maf * maf;
  return m;
}

double sample_maf(Xoshiro256ss& rng) { return 0.05 + 0.15 * rng.next_double(); }

ModelSpec make_model_spec(ModelKind kind, double param) {
  switch (kind) {
    case ModelKind::indep:
      return ModelSpec{kind, 1.0};
    case ModelKind::qexp:
    case ModelKind::rexp:
      if (!(param >= 1.0)) fail(Errc::BadArgument, "exponent parameter must be >= 1");
      return ModelSpec{kind, param};
    case ModelKind::qmult:
      if (!(param >= 0.0) || param > 1.0) {
        fail(Errc::BadArgument, "multiplier parameter must lie in [0, 1]");
      }
      return ModelSpec{kind, param};
  }
  fail(Errc::BadArgument, "unknown model kind");
}

ModelSpec parse_model(const std::string& text) {
  if (text == "indep") return make_model_spec(ModelKind::indep, 1.0);
  auto with_param = [&](const char* prefix, ModelKind kind) -> ModelSpec {
    double v = 0;
    char tail = 0;
    if (std::sscanf(text.c_str() + std::string(prefix).size(), "%lf%c", &v, &tail) != 1) {
      fail(Errc::BadArgument, "expected " + std::string(prefix) + "PARAM with a decimal literal");
    }
    return make_model_spec(kind, v);
  };
  if (text.rfind("qexp:", 0) == 0) return with_param("qexp:", ModelKind::qexp);
  if (text.rfind("rexp:", 0) == 0) return with_param("rexp:", ModelKind::rexp);
  if (text.rfind("qmult:", 0) == 0) return with_param("qmult:", ModelKind::qmult);
  fail(Errc::BadArgument,
       "unknown model '" + text + "' (use indep | qexp:E | rexp:E | qmult:G)");
}

std::string model_name(const ModelSpec& spec) {
  char buf[64];
  switch (spec.kind) {
    case ModelKind::indep: return "indep";
    case ModelKind::qexp: std::snprintf(buf, sizeof(buf), "qexp:%g", spec.param); return buf;
    case ModelKind::rexp: std::snprintf(buf, sizeof(buf), "rexp:%g", spec.param); return buf;
    case ModelKind::qmult: std::snprintf(buf, sizeof(buf), "qmult:%g", spec.param); return buf;
  }
  return "?";
}

Joint3x3 build_joint(const ModelSpec& spec, const HweMarginal& mi, const HweMarginal& mj) {
  const double p = mi.p0, q = mi.p1;
  const double r = mj.p0, s = mj.p1;
  const double pc = 1.0 - p - q;
  const double rc = 1.0 - r - s;

  Joint3x3 j;
  j.p = {{{p * r, p * s, p * rc}, {q * r, q * s, q * rc}, {pc * r, pc * s, pc * rc}}};

  switch (spec.kind) {
    case ModelKind::indep:
      break;
    case ModelKind::qexp: {
      // Mass q*s - q^e*s leaves cell (1,1) toward (0,1) and (1,0), with the
      // compensation landing in (0,0); rows and columns are unchanged.
      const double qe = std::pow(q, spec.param);
      j.p[0][0] = p * r + qe * s - q * s;
      j.p[0][1] = p * s - qe * s + q * s;
      j.p[1][0] = q * r - qe * s + q * s;
      j.p[1][1] = qe * s;
      break;
    }
    case ModelKind::rexp: {
      const double shift = (pc - std::pow(pc, spec.param)) * rc;
      j.p[1][1] = q * s - shift;
      j.p[1][2] = q * rc + shift;
      j.p[2][1] = pc * s + shift;
      j.p[2][2] = std::pow(pc, spec.param) * rc;
      break;
    }
    case ModelKind::qmult: {
      const double shift = (1.0 - spec.param) * q * s;
      j.p[0][0] = p * r - shift;
      j.p[0][1] = p * s + shift;
      j.p[1][0] = q * r + shift;
      j.p[1][1] = spec.param * q * s;
      break;
    }
  }

  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      if (j.p[x][y] < -1e-12) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "model %s leaves its validity domain: cell (%d,%d) = %g",
                      model_name(spec).c_str(), x, y, j.p[x][y]);
        fail(Errc::NegativeCell, buf);
      }
      if (j.p[x][y] < 0.0) j.p[x][y] = 0.0;
    }
  return j;
}

std::pair<PairedSample, Contingency3x3> draw_sample(const Joint3x3& joint, std::uint64_t n,
                                                    Xoshiro256ss& rng) {
  if (n == 0) fail(Errc::BadArgument, "sample size must be positive");
  validate_joint(joint);
  double cum[9];
  double acc = 0.0;
  for (int c = 0; c < 9; ++c) {
    acc += joint.p[c / 3][c % 3];
    cum[c] = acc;
  }
  PairedSample s;
  s.x.resize(n);
  s.y.resize(n);
  Contingency3x3 table;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = rng.next_double() * acc;
    int c = 0;
    while (c < 8 && u >= cum[c]) ++c;
    s.x[i] = static_cast<std::uint8_t>(c / 3);
    s.y[i] = static_cast<std::uint8_t>(c % 3);
    ++table.n[c / 3][c % 3];
  }
  return {std::move(s), table};
}

}  // namespace epidcov
