#include "epidcov/gwasio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "epidcov/error.hpp"
#include "epidcov/rng.hpp"
#include "epidcov/stats_util.hpp"

namespace epidcov {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

GenotypeMatrix load_genotypes(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open genotype file: " + path);

  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, path + ": empty file");
  strip_cr(line);
  auto header = split_tabs(line);
  if (header.size() < 2 || header[0] != "iid") {
    fail(Errc::ParseError, path + ":1: header must start with 'iid' followed by SNP ids");
  }

  GenotypeMatrix g;
  g.snp_ids.assign(header.begin() + 1, header.end());
  std::unordered_set<std::string> seen;
  for (const auto& id : g.snp_ids) {
    if (!seen.insert(id).second) fail(Errc::DuplicateSnpId, path + ": duplicate SNP id " + id);
  }

  const std::size_t width = g.snp_ids.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != width + 1) {
      fail(Errc::InconsistentRowLength,
           path + ":" + std::to_string(line_no) + ": expected " + std::to_string(width + 1) +
               " fields, got " + std::to_string(fields.size()));
    }
    g.individual_ids.push_back(fields[0]);
    for (std::size_t s = 0; s < width; ++s) {
      const std::string& f = fields[s + 1];
      std::uint8_t v;
      if (f == "0") v = 0;
      else if (f == "1") v = 1;
      else if (f == "2") v = 2;
      else if (f == "NA") v = kMissingGenotype;
      else
        fail(Errc::ParseError, path + ":" + std::to_string(line_no) + ": invalid genotype '" +
                                   f + "' (expected 0, 1, 2 or NA)");
      g.values.push_back(v);
    }
  }
  if (g.individual_ids.empty()) fail(Errc::EmptyMatrix, path + ": no individuals");
  return g;
}

void save_genotypes(const GenotypeMatrix& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write genotype file: " + path);
  out << "iid";
  for (const auto& id : g.snp_ids) out << '\t' << id;
  out << '\n';
  for (std::size_t i = 0; i < g.n_individuals(); ++i) {
    out << g.individual_ids[i];
    for (std::size_t s = 0; s < g.n_snps(); ++s) {
      const std::uint8_t v = g.at(i, s);
      out << '\t';
      if (v == kMissingGenotype) out << "NA";
      else out << static_cast<int>(v);
    }
    out << '\n';
  }
}

double hwe_pvalue(std::uint64_t n0, std::uint64_t n1, std::uint64_t n2) {
  const std::uint64_t n = n0 + n1 + n2;
  if (n == 0) return 1.0;
  const double freq = (static_cast<double>(n1) + 2.0 * static_cast<double>(n2)) /
                      (2.0 * static_cast<double>(n));
  if (freq <= 0.0 || freq >= 1.0) return 1.0;  // monomorphic
  const double nd = static_cast<double>(n);
  const double e0 = nd * (1.0 - freq) * (1.0 - freq);
  const double e1 = nd * 2.0 * freq * (1.0 - freq);
  const double e2 = nd * freq * freq;
  double stat = 0.0;
  const double obs[3] = {static_cast<double>(n0), static_cast<double>(n1),
                         static_cast<double>(n2)};
  const double exp[3] = {e0, e1, e2};
  for (int i = 0; i < 3; ++i) {
    if (exp[i] > 0.0) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  }
  return chi2_sf(stat, 1.0);
}

namespace {

struct SnpStats {
  std::uint64_t counts_cases[3] = {0, 0, 0};
  std::uint64_t counts_controls[3] = {0, 0, 0};
  std::uint64_t miss_cases = 0, miss_controls = 0;
};

SnpStats collect_stats(const GenotypeMatrix& cases, const GenotypeMatrix& controls,
                       std::size_t s) {
  SnpStats st;
  for (std::size_t i = 0; i < cases.n_individuals(); ++i) {
    const std::uint8_t v = cases.at(i, s);
    if (v == kMissingGenotype) ++st.miss_cases;
    else ++st.counts_cases[v];
  }
  for (std::size_t i = 0; i < controls.n_individuals(); ++i) {
    const std::uint8_t v = controls.at(i, s);
    if (v == kMissingGenotype) ++st.miss_controls;
    else ++st.counts_controls[v];
  }
  return st;
}

double two_proportion_pvalue(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2,
                             std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) return 1.0;
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) return 1.0;
  const double var = pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) +
                                                1.0 / static_cast<double>(n2));
  const double stat = (p1 - p2) * (p1 - p2) / var;
  return chi2_sf(stat, 1.0);
}

GenotypeMatrix select_snps(const GenotypeMatrix& g, const std::vector<std::size_t>& keep) {
  GenotypeMatrix out;
  out.individual_ids = g.individual_ids;
  out.snp_ids.reserve(keep.size());
  for (auto s : keep) out.snp_ids.push_back(g.snp_ids[s]);
  out.values.resize(g.n_individuals() * keep.size());
  for (std::size_t i = 0; i < g.n_individuals(); ++i)
    for (std::size_t k = 0; k < keep.size(); ++k)
      out.values[i * keep.size() + k] = g.at(i, keep[k]);
  return out;
}

}  // namespace

QcResult qc_filter(const GenotypeMatrix& cases, const GenotypeMatrix& controls,
                   const QcThresholds& t) {
  if (cases.snp_ids != controls.snp_ids) {
    fail(Errc::SnpListMismatch, "case and control matrices carry different SNP lists");
  }
  QcResult result;
  std::vector<std::size_t> keep;
  for (std::size_t s = 0; s < cases.n_snps(); ++s) {
    const SnpStats st = collect_stats(cases, controls, s);
    SnpQcRecord rec;
    rec.snp_id = cases.snp_ids[s];

    const std::uint64_t called_cases =
        st.counts_cases[0] + st.counts_cases[1] + st.counts_cases[2];
    const std::uint64_t called_controls =
        st.counts_controls[0] + st.counts_controls[1] + st.counts_controls[2];
    const std::uint64_t called = called_cases + called_controls;
    const std::uint64_t minor =
        st.counts_cases[1] + st.counts_controls[1] +
        2 * (st.counts_cases[2] + st.counts_controls[2]);
    double freq = called > 0 ? static_cast<double>(minor) / (2.0 * static_cast<double>(called))
                             : 0.0;
    rec.maf = std::min(freq, 1.0 - freq);
    rec.hwe_p = hwe_pvalue(st.counts_controls[0], st.counts_controls[1], st.counts_controls[2]);
    rec.call_rate_cases =
        cases.n_individuals() > 0
            ? static_cast<double>(called_cases) / static_cast<double>(cases.n_individuals())
            : 0.0;
    rec.call_rate_controls = controls.n_individuals() > 0
                                 ? static_cast<double>(called_controls) /
                                       static_cast<double>(controls.n_individuals())
                                 : 0.0;

    // First failing rule in fixed order decides the reported reason.
    if (rec.maf < t.min_maf) {
      rec.kept = false;
      rec.rule = "maf";
    } else if (rec.hwe_p < t.hwe_alpha) {
      rec.kept = false;
      rec.rule = "hwe";
    } else if (rec.call_rate_cases < t.min_call_rate ||
               rec.call_rate_controls < t.min_call_rate) {
      rec.kept = false;
      rec.rule = "call_rate";
    } else if (two_proportion_pvalue(called_cases, cases.n_individuals(), called_controls,
                                     controls.n_individuals()) < t.diff_call_alpha) {
      rec.kept = false;
      rec.rule = "diff_call";
    } else if (rec.maf <= t.scan_min_maf) {
      rec.kept = false;
      rec.rule = "scan_maf";
    } else {
      rec.rule = "-";
      keep.push_back(s);
    }
    result.report.push_back(std::move(rec));
  }
  result.cases = select_snps(cases, keep);
  result.controls = select_snps(controls, keep);
  return result;
}

void write_qc_report(const std::vector<SnpQcRecord>& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write QC report: " + path);
  out << "snp_id\tstatus\trule\tmaf\thwe_p\tcall_rate_cases\tcall_rate_controls\n";
  char buf[256];
  for (const auto& r : report) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%.6g\t%.6g\t%.6g\t%.6g\n", r.snp_id.c_str(),
                  r.kept ? "kept" : "removed", r.rule.c_str(), r.maf, r.hwe_p,
                  r.call_rate_cases, r.call_rate_controls);
    out << buf;
  }
}

std::pair<GenotypeMatrix, GenotypeMatrix> random_subset(const GenotypeMatrix& cases,
                                                        const GenotypeMatrix& controls,
                                                        std::size_t k, std::uint64_t seed) {
  if (cases.snp_ids != controls.snp_ids) {
    fail(Errc::SnpListMismatch, "case and control matrices carry different SNP lists");
  }
  const std::size_t L = cases.n_snps();
  if (k < 1 || k > L) {
    fail(Errc::KTooLarge, "subset size must lie in [1, " + std::to_string(L) + "]");
  }
  // Partial Fisher-Yates over the index vector, then re-sort the chosen
  // prefix so SNP order is preserved.
  std::vector<std::size_t> idx(L);
  std::iota(idx.begin(), idx.end(), 0);
  Xoshiro256ss rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(L - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return {select_snps(cases, idx), select_snps(controls, idx)};
}

bool ModuleMap::share_module(const std::string& a, const std::string& b) const {
  const auto ita = modules.find(a);
  const auto itb = modules.find(b);
  if (ita == modules.end() || itb == modules.end()) return false;
  const auto& sa = ita->second;
  const auto& sb = itb->second;
  const auto& small = sa.size() <= sb.size() ? sa : sb;
  const auto& large = sa.size() <= sb.size() ? sb : sa;
  return std::any_of(small.begin(), small.end(),
                     [&](const std::string& m) { return large.count(m) > 0; });
}

ModuleMap load_module_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open module map: " + path);
  ModuleMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      fail(Errc::ParseError,
           path + ":" + std::to_string(line_no) + ": expected snp_id<TAB>module_id");
    }
    map.modules[fields[0]].insert(fields[1]);
  }
  return map;
}

EnrichmentResult enrichment_test(const std::vector<std::pair<std::string, std::string>>& flagged,
                                 const std::vector<std::pair<std::string, std::string>>& testable,
                                 const ModuleMap& modules) {
  if (flagged.empty()) fail(Errc::NoFlaggedPairs, "no pair was flagged as epistatic");
  std::uint64_t obs = 0;
  for (const auto& [a, b] : flagged) obs += modules.share_module(a, b) ? 1 : 0;
  std::uint64_t base = 0;
  for (const auto& [a, b] : testable) base += modules.share_module(a, b) ? 1 : 0;
  EnrichmentResult res;
  res.n_flagged = flagged.size();
  res.observed_prop = static_cast<double>(obs) / static_cast<double>(flagged.size());
  res.expected_prop =
      testable.empty() ? 0.0 : static_cast<double>(base) / static_cast<double>(testable.size());
  res.pvalue = binom_sf_ge(static_cast<std::int64_t>(obs),
                           static_cast<std::int64_t>(flagged.size()), res.expected_prop);
  return res;
}

}  // namespace epidcov
