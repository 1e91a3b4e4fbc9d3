#include "epidcov/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "epidcov/error.hpp"
#include "epidcov/paircount.hpp"
#include "epidcov/permtest.hpp"
#include "epidcov/rng.hpp"

namespace epidcov {

std::string pair_flag_name(PairFlag f) {
  switch (f) {
    case PairFlag::epistasis: return "epistasis";
    case PairFlag::none: return "none";
    case PairFlag::untestable: return "untestable";
  }
  return "?";
}

double bonferroni_threshold(double alpha, std::uint64_t L) {
  if (L < 2) fail(Errc::BadArgument, "need at least two SNPs");
  return alpha / (static_cast<double>(L) * static_cast<double>(L - 1));
}

std::uint64_t pair_seed(std::uint64_t master_seed, std::uint32_t i, std::uint32_t j,
                        bool controls) {
  std::uint64_t h = mix64(master_seed ^ 0x8f1bbcdc2d8f4f5cULL);
  h = seed_absorb(h, i);
  h = seed_absorb(h, j);
  h = seed_absorb(h, controls ? 1 : 0);
  return h;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool margin_constant(const std::array<std::uint32_t, 3>& m, std::uint64_t n) {
  return m[0] == n || m[1] == n || m[2] == n;
}

struct GroupOutcome {
  double stat = kNaN;
  double pvalue = kNaN;
  std::uint32_t n = 0;
  bool testable = false;
};

}  // namespace

void check_snp_lists(const GenotypeMatrix& cases, const GenotypeMatrix& controls) {
  if (cases.snp_ids == controls.snp_ids) return;
  std::string detail = "case and control matrices carry different SNP lists";
  const std::size_t m = std::min(cases.n_snps(), controls.n_snps());
  for (std::size_t s = 0; s < m; ++s) {
    if (cases.snp_ids[s] != controls.snp_ids[s]) {
      detail += ": first mismatch at column " + std::to_string(s + 1) + " (" +
                cases.snp_ids[s] + " vs " + controls.snp_ids[s] + ")";
      break;
    }
  }
  if (cases.n_snps() != controls.n_snps()) {
    detail += " (lengths " + std::to_string(cases.n_snps()) + " vs " +
              std::to_string(controls.n_snps()) + ")";
  }
  fail(Errc::SnpListMismatch, detail);
}

ScanResult scan_pairs(const GenotypeMatrix& cases, const GenotypeMatrix& controls,
                      const ScanConfig& config) {
  check_snp_lists(cases, controls);
  if (cases.n_individuals() == 0 || controls.n_individuals() == 0) {
    fail(Errc::EmptyMatrix, "both groups need at least one individual");
  }
  const std::size_t L = cases.n_snps();
  if (L < 2) fail(Errc::EmptyMatrix, "need at least two SNPs to scan pairs");
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0)) {
    fail(Errc::BadArgument, "alpha must lie in (0, 1)");
  }

  ScanResult result;
  result.snp_ids = cases.snp_ids;
  result.threshold = bonferroni_threshold(config.alpha, L);

  // Resolution warning: with B resamples the smallest achievable p-value is
  // 1/(B+1); below-threshold rejections are impossible when that floor
  // exceeds the Bonferroni threshold.
  {
    const std::uint64_t n_c = cases.n_individuals(), n_t = controls.n_individuals();
    const std::uint32_t b = config.resamples_override
                                ? config.resamples_override
                                : std::min(default_resamples(n_c), default_resamples(n_t));
    const double floor_p = 1.0 / (b + 1.0);
    if (floor_p > result.threshold) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "minimum achievable p-value 1/(B+1) = %.6g exceeds the Bonferroni "
                    "threshold %.6g; no pair can be flagged at this configuration "
                    "(raise --perms or alpha)",
                    floor_p, result.threshold);
      result.warning = buf;
    }
  }

  const PackedColumns packed_cases = pack_columns(cases);
  const PackedColumns packed_controls = pack_columns(controls);
  const CountKernelFn kernel = active_count_kernel();

  const std::size_t n_pairs = L * (L - 1) / 2;
  result.decisions.assign(n_pairs, PairDecision{});
  result.p_cases_matrix.assign(L * L, kNaN);
  result.p_controls_matrix.assign(L * L, kNaN);

  auto run_group = [&](const PackedColumns& cols, std::uint32_t i, std::uint32_t j,
                       bool is_controls) {
    GroupOutcome out;
    const Contingency3x3 table = count_pair(cols, i, j, kernel);
    const std::uint64_t n = table.total();
    out.n = static_cast<std::uint32_t>(n);
    if (n < config.min_complete || n < 2 || margin_constant(table.row_margins(), n) ||
        margin_constant(table.col_margins(), n)) {
      return out;  // untestable in this group
    }
    PermutationPlan plan;
    plan.resamples =
        config.resamples_override ? config.resamples_override : default_resamples(n);
    plan.seed = pair_seed(config.master_seed, i, j, is_controls);
    const PermTestResult r = permutation_test(table, config.metric_x, config.metric_y, plan);
    out.stat = r.statistic;
    out.pvalue = r.pvalue;
    out.testable = true;
    return out;
  };

  auto process_pair = [&](std::size_t k, std::uint32_t i, std::uint32_t j) {
    const GroupOutcome oc = run_group(packed_cases, i, j, false);
    const GroupOutcome ot = run_group(packed_controls, i, j, true);
    PairDecision d;
    d.i = i;
    d.j = j;
    d.snp_i = result.snp_ids[i];
    d.snp_j = result.snp_ids[j];
    d.n_cases = oc.n;
    d.n_controls = ot.n;
    if (!oc.testable || !ot.testable) {
      d.flag = PairFlag::untestable;
    } else {
      d.stat_cases = oc.stat;
      d.stat_controls = ot.stat;
      d.p_cases = oc.pvalue;
      d.p_controls = ot.pvalue;
      const bool rc = oc.pvalue <= result.threshold;
      const bool rt = ot.pvalue <= result.threshold;
      d.flag = (rc != rt) ? PairFlag::epistasis : PairFlag::none;
      result.p_cases_matrix[i * L + j] = result.p_cases_matrix[j * L + i] = oc.pvalue;
      result.p_controls_matrix[i * L + j] = result.p_controls_matrix[j * L + i] = ot.pvalue;
    }
    result.decisions[k] = std::move(d);
  };

  // Pairs are linearized row-major and dealt in fixed chunks through an
  // atomic cursor. Every pair owns its seed, so the schedule cannot change
  // the output; workers write disjoint slots.
  const unsigned threads = std::max(1u, config.threads);
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto chunked = [&]() {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(kChunk);
      if (begin >= n_pairs) return;
      const std::size_t end = std::min(n_pairs, begin + kChunk);
      // invert k -> (i, j) once per chunk, then step
      std::size_t k = begin;
      std::uint32_t i = 0;
      std::size_t row_start = 0;
      while (row_start + (L - 1 - i) <= k) {
        row_start += L - 1 - i;
        ++i;
      }
      std::uint32_t j = static_cast<std::uint32_t>(i + 1 + (k - row_start));
      for (; k < end; ++k) {
        process_pair(k, i, j);
        if (++j >= L) {
          ++i;
          j = i + 1;
        }
      }
    }
  };
  auto worker = [&]() {
    try {
      chunked();
    } catch (...) {
      const std::scoped_lock lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (threads == 1) {
    chunked();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  return result;
}

std::vector<std::uint8_t> adjacency_matrix(const std::vector<PairDecision>& decisions,
                                           std::size_t L) {
  std::vector<std::uint8_t> adj(L * L, 0);
  for (const auto& d : decisions) {
    if (d.flag == PairFlag::epistasis) {
      adj[d.i * L + d.j] = 1;
      adj[d.j * L + d.i] = 1;
    }
  }
  return adj;
}

namespace {

void write_stat_p(std::ofstream& out, const PairDecision& d, double stat, double p) {
  char buf[64];
  if (d.flag == PairFlag::untestable) {
    out << "NA\tNA";
  } else {
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g", stat, p);
    out << buf;
  }
}

}  // namespace

void write_pairs_tsv(const ScanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path);
  out << "snp_i\tsnp_j\tstat_cases\tp_cases\tn_cases\tstat_controls\tp_controls\tn_controls\t"
         "flag\n";
  for (const auto& d : result.decisions) {
    out << d.snp_i << '\t' << d.snp_j << '\t';
    write_stat_p(out, d, d.stat_cases, d.p_cases);
    out << '\t' << d.n_cases << '\t';
    write_stat_p(out, d, d.stat_controls, d.p_controls);
    out << '\t' << d.n_controls << '\t' << pair_flag_name(d.flag) << '\n';
  }
}

void write_adjacency_tsv(const ScanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path);
  const std::size_t L = result.snp_ids.size();
  const auto adj = adjacency_matrix(result.decisions, L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      if (j) out << '\t';
      out << static_cast<int>(adj[i * L + j]);
    }
    out << '\n';
  }
}

std::vector<PairsFileRow> read_pairs_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, path + ": empty file");
  std::vector<PairsFileRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    PairsFileRow row;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 9) {
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) + ": expected 9 columns");
    }
    row.snp_i = fields[0];
    row.snp_j = fields[1];
    const std::string& f = fields[8];
    if (f == "epistasis") row.flag = PairFlag::epistasis;
    else if (f == "none") row.flag = PairFlag::none;
    else if (f == "untestable") row.flag = PairFlag::untestable;
    else
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) + ": unknown flag '" + f + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace epidcov
