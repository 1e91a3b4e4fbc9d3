#include "epidcov/energy.hpp"

#include <cmath>

#include "epidcov/error.hpp"

namespace epidcov {

Contingency3x3 transpose(const Contingency3x3& t) {
  Contingency3x3 out;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) out.n[y][x] = t.n[x][y];
  return out;
}

Contingency3x3 count_table(const PairedSample& s) {
  if (s.x.size() != s.y.size() || s.x.empty()) {
    fail(Errc::BadArgument, "paired sample needs two equal-length nonempty vectors");
  }
  Contingency3x3 t;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.x[i] > 2 || s.y[i] > 2) fail(Errc::BadArgument, "genotype out of {0,1,2}");
    ++t.n[s.x[i]][s.y[i]];
  }
  return t;
}

void validate_joint(const Joint3x3& joint) {
  double sum = 0.0;
  for (const auto& row : joint.p)
    for (double v : row) {
      if (v < -1e-12) fail(Errc::InvalidJoint, "joint has a negative cell");
      sum += v;
    }
  if (std::fabs(sum - 1.0) > 1e-9) fail(Errc::InvalidJoint, "joint cells do not sum to 1");
}

Mat3 doubly_centred(const Metric3& m, const std::array<double, 3>& marginal) {
  const auto d = distance_table(m);
  std::array<double, 3> a{};
  for (int x = 0; x < 3; ++x) {
    a[x] = d[x][0] * marginal[0] + d[x][1] * marginal[1] + d[x][2] * marginal[2];
  }
  const double grand = marginal[0] * a[0] + marginal[1] * a[1] + marginal[2] * a[2];
  Mat3 out;
  for (int x = 0; x < 3; ++x)
    for (int xp = 0; xp < 3; ++xp) out[x][xp] = d[x][xp] - a[x] - a[xp] + grand;
  return out;
}

double dcov_bilinear(const Mat3& dmu, const Mat3& dnu, const Mat3& w, double scale) {
  // sum = <dmu, W dnu W^T> factorized through U = W dnu (63 multiplies).
  Mat3 u{};
  for (int x = 0; x < 3; ++x)
    for (int yp = 0; yp < 3; ++yp)
      u[x][yp] = w[x][0] * dnu[0][yp] + w[x][1] * dnu[1][yp] + w[x][2] * dnu[2][yp];
  double sum = 0.0;
  for (int x = 0; x < 3; ++x)
    for (int xp = 0; xp < 3; ++xp) {
      const double v = u[x][0] * w[xp][0] + u[x][1] * w[xp][1] + u[x][2] * w[xp][2];
      sum += dmu[x][xp] * v;
    }
  return sum * scale;
}

double population_dcov(const Joint3x3& joint, const Metric3& mx, const Metric3& my) {
  validate_joint(joint);
  std::array<double, 3> rowp{}, colp{};
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      rowp[x] += joint.p[x][y];
      colp[y] += joint.p[x][y];
    }
  const auto dx = distance_table(mx);
  const auto dy = distance_table(my);
  std::array<double, 3> amu{}, anu{};
  for (int x = 0; x < 3; ++x)
    amu[x] = dx[x][0] * rowp[0] + dx[x][1] * rowp[1] + dx[x][2] * rowp[2];
  for (int y = 0; y < 3; ++y)
    anu[y] = dy[y][0] * colp[0] + dy[y][1] * colp[1] + dy[y][2] * colp[2];
  const double dmu_grand = rowp[0] * amu[0] + rowp[1] * amu[1] + rowp[2] * amu[2];
  const double dnu_grand = colp[0] * anu[0] + colp[1] * anu[1] + colp[2] * anu[2];

  // Literal sum over the 81 pairs of support points.
  double sum = 0.0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int xp = 0; xp < 3; ++xp)
        for (int yp = 0; yp < 3; ++yp) {
          const double cmu = dx[x][xp] - amu[x] - amu[xp] + dmu_grand;
          const double cnu = dy[y][yp] - anu[y] - anu[yp] + dnu_grand;
          sum += cmu * cnu * joint.p[x][y] * joint.p[xp][yp];
        }
  return sum;
}

double dcov_from_table(const Contingency3x3& table, const Metric3& mx, const Metric3& my) {
  const double n = static_cast<double>(table.total());
  if (n == 0.0) fail(Errc::EmptyTable, "contingency table has no observations");
  const auto rows = table.row_margins();
  const auto cols = table.col_margins();
  const std::array<double, 3> rowp{rows[0] / n, rows[1] / n, rows[2] / n};
  const std::array<double, 3> colp{cols[0] / n, cols[1] / n, cols[2] / n};
  const Mat3 dmu = doubly_centred(mx, rowp);
  const Mat3 dnu = doubly_centred(my, colp);
  Mat3 w;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) w[x][y] = static_cast<double>(table.n[x][y]);
  return dcov_bilinear(dmu, dnu, w, 1.0 / (n * n));
}

double dcov_naive(const PairedSample& s, const Metric3& mx, const Metric3& my) {
  const std::size_t n = s.x.size();
  if (n != s.y.size() || n == 0) {
    fail(Errc::BadArgument, "paired sample needs two equal-length nonempty vectors");
  }
  const auto dx = distance_table(mx);
  const auto dy = distance_table(my);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> rma(n, 0.0), rmb(n, 0.0);
  double gma = 0.0, gmb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sa += dx[s.x[i]][s.x[j]];
      sb += dy[s.y[i]][s.y[j]];
    }
    rma[i] = sa * inv_n;
    rmb[i] = sb * inv_n;
    gma += sa;
    gmb += sb;
  }
  gma *= inv_n * inv_n;
  gmb *= inv_n * inv_n;

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = dx[s.x[i]][s.x[j]] - rma[i] - rma[j] + gma;
      const double b = dy[s.y[i]][s.y[j]] - rmb[i] - rmb[j] + gmb;
      sum += a * b;
    }
  return sum * inv_n * inv_n;
}

double dcov_vstat(const PairedSample& s, const Metric3& mx, const Metric3& my) {
  const std::size_t n = s.x.size();
  if (n != s.y.size() || n == 0) {
    fail(Errc::BadArgument, "paired sample needs two equal-length nonempty vectors");
  }
  if (n > 10) fail(Errc::SampleTooLarge, "V-statistic oracle is O(n^6); n must be <= 10");
  const auto dx = distance_table(mx);
  const auto dy = distance_table(my);
  double sum = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t i3 = 0; i3 < n; ++i3)
        for (std::size_t i4 = 0; i4 < n; ++i4) {
          const double hx = dx[s.x[i1]][s.x[i2]] + dx[s.x[i3]][s.x[i4]] -
                            dx[s.x[i1]][s.x[i3]] - dx[s.x[i2]][s.x[i4]];
          if (hx == 0.0) continue;  // y factor cannot contribute
          for (std::size_t i5 = 0; i5 < n; ++i5)
            for (std::size_t i6 = 0; i6 < n; ++i6) {
              const double hy = dy[s.y[i1]][s.y[i2]] + dy[s.y[i5]][s.y[i6]] -
                                dy[s.y[i1]][s.y[i5]] - dy[s.y[i2]][s.y[i6]];
              sum += hx * hy;
            }
        }
  const double nd = static_cast<double>(n);
  return sum / (nd * nd * nd * nd * nd * nd);
}

std::optional<double> dcor_from_table(const Contingency3x3& table, const Metric3& mx,
                                      const Metric3& my) {
  const auto rows = table.row_margins();
  const auto cols = table.col_margins();
  auto diag = [](const std::array<std::uint32_t, 3>& m) {
    Contingency3x3 t;
    for (int i = 0; i < 3; ++i) t.n[i][i] = m[i];
    return t;
  };
  const double dxy = dcov_from_table(table, mx, my);
  const double dxx = dcov_from_table(diag(rows), mx, mx);
  const double dyy = dcov_from_table(diag(cols), my, my);
  if (dxx <= 1e-15 || dyy <= 1e-15) return std::nullopt;
  return dxy / std::sqrt(dxx * dyy);
}

}  // namespace epidcov
