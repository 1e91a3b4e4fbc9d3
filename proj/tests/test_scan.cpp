#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unordered_set>

#include "doctest.h"
#include "epidcov/error.hpp"
#include "epidcov/scan.hpp"
#include "epidcov/simulate.hpp"

using namespace epidcov;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::BadArgument;
}

ScanConfig base_config() {
  ScanConfig c;
  c.metric_x = c.metric_y = Metric3{1, 1, 1};
  return c;
}

bool decisions_equal(const ScanResult& a, const ScanResult& b) {
  if (a.decisions.size() != b.decisions.size()) return false;
  for (std::size_t k = 0; k < a.decisions.size(); ++k) {
    const auto& x = a.decisions[k];
    const auto& y = b.decisions[k];
    const bool same_stats =
        (x.flag == PairFlag::untestable && y.flag == PairFlag::untestable) ||
        (x.stat_cases == y.stat_cases && x.stat_controls == y.stat_controls &&
         x.p_cases == y.p_cases && x.p_controls == y.p_controls);
    if (!(x.i == y.i && x.j == y.j && x.flag == y.flag && x.n_cases == y.n_cases &&
          x.n_controls == y.n_controls && same_stats))
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("bonferroni threshold") {
  CHECK(bonferroni_threshold(0.05, 2) == doctest::Approx(0.025));
  CHECK(bonferroni_threshold(0.05, 1000) == doctest::Approx(0.05 / 999000.0));
  CHECK(bonferroni_threshold(0.05, 50) == doctest::Approx(0.05 / 2450.0));
}

TEST_CASE("pair seeds are distinct across pairs, groups and master seeds") {
  std::unordered_set<std::uint64_t> seen;
  const std::uint32_t L = 200;
  for (std::uint64_t master : {1ull, 2ull}) {
    for (std::uint32_t i = 0; i < L; ++i)
      for (std::uint32_t j = i + 1; j < L; ++j) {
        CHECK(seen.insert(pair_seed(master, i, j, false)).second);
        CHECK(seen.insert(pair_seed(master, i, j, true)).second);
      }
  }
  CHECK(pair_seed(5, 3, 7, false) == pair_seed(5, 3, 7, false));
  CHECK(pair_seed(5, 3, 7, false) != pair_seed(5, 3, 7, true));
}

TEST_CASE("scan input validation") {
  GenotypeMatrix a, b;
  a.snp_ids = {"x", "y"};
  b.snp_ids = {"x", "z"};
  a.individual_ids = b.individual_ids = {"1"};
  a.values = {0, 1};
  b.values = {0, 1};
  try {
    scan_pairs(a, b, base_config());
    FAIL("expected SnpListMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SnpListMismatch);
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    CHECK(std::string(e.what()).find("y") != std::string::npos);
  }

  GenotypeMatrix one;
  one.snp_ids = {"x"};
  one.individual_ids = {"1"};
  one.values = {0};
  CHECK(code_of([&] { scan_pairs(one, one, base_config()); }) == Errc::EmptyMatrix);
}

TEST_CASE("planted pair is detected at L=2 and an indep pair is not") {
  int planted_hits = 0, null_hits = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    SimulationSpec spec;
    spec.n_snps = 2;
    spec.n_cases = 585;
    spec.n_controls = 573;
    spec.case_model = parse_model("qexp:10");
    spec.control_model = parse_model("indep");
    spec.seed = 1000 + run;
    const auto [cases, controls] = simulate_dataset(spec);
    ScanConfig cfg = base_config();
    cfg.master_seed = spec.seed;
    const ScanResult res = scan_pairs(cases, controls, cfg);
    REQUIRE(res.decisions.size() == 1);
    planted_hits += res.decisions[0].flag == PairFlag::epistasis;

    SimulationSpec null_spec = spec;
    null_spec.case_model = parse_model("indep");
    const auto [nc, nt] = simulate_dataset(null_spec);
    const ScanResult null_res = scan_pairs(nc, nt, cfg);
    null_hits += null_res.decisions[0].flag == PairFlag::epistasis;
  }
  CHECK(planted_hits >= static_cast<int>(0.8 * runs));
  // two-group size at alpha 0.05 with threshold alpha/2 stays below ~7%
  CHECK(null_hits <= static_cast<int>(0.12 * runs));
}

TEST_CASE("constant SNP in one group makes its pairs untestable") {
  SimulationSpec spec;
  spec.n_snps = 4;
  spec.n_cases = 60;
  spec.n_controls = 60;
  spec.seed = 5;
  auto [cases, controls] = simulate_dataset(spec);
  for (std::size_t i = 0; i < cases.n_individuals(); ++i) cases.set(i, 2, 0);
  ScanConfig cfg = base_config();
  cfg.min_complete = 10;
  const ScanResult res = scan_pairs(cases, controls, cfg);
  for (const auto& d : res.decisions) {
    const bool touches = d.i == 2 || d.j == 2;
    CHECK((d.flag == PairFlag::untestable) == touches);
    if (touches) {
      CHECK(std::isnan(res.p_cases_matrix[d.i * 4 + d.j]));
    }
  }
}

TEST_CASE("pairs below min_complete are untestable") {
  SimulationSpec spec;
  spec.n_snps = 3;
  spec.n_cases = 40;
  spec.n_controls = 40;
  spec.seed = 6;
  auto [cases, controls] = simulate_dataset(spec);
  // knock out most of SNP 0 in cases
  for (std::size_t i = 0; i < 35; ++i) cases.set(i, 0, kMissingGenotype);
  ScanConfig cfg = base_config();
  cfg.min_complete = 30;
  const ScanResult res = scan_pairs(cases, controls, cfg);
  for (const auto& d : res.decisions) {
    const bool touches = d.i == 0 || d.j == 0;
    CHECK((d.flag == PairFlag::untestable) == touches);
  }
}

TEST_CASE("flag logic matches the per-group rejections") {
  SimulationSpec spec;
  spec.n_snps = 6;
  spec.n_cases = 585;
  spec.n_controls = 573;
  spec.case_model = parse_model("qexp:10");
  spec.seed = 77;
  const auto [cases, controls] = simulate_dataset(spec);
  ScanConfig cfg = base_config();
  cfg.master_seed = 77;
  const ScanResult res = scan_pairs(cases, controls, cfg);
  for (const auto& d : res.decisions) {
    if (d.flag == PairFlag::untestable) continue;
    const bool rc = d.p_cases <= res.threshold;
    const bool rt = d.p_controls <= res.threshold;
    CHECK((d.flag == PairFlag::epistasis) == (rc != rt));
  }
}

TEST_CASE("schedule independence across thread counts") {
  SimulationSpec spec;
  spec.n_snps = 12;
  spec.n_cases = 150;
  spec.n_controls = 140;
  spec.case_model = parse_model("qmult:0.2");
  spec.seed = 99;
  const auto [cases, controls] = simulate_dataset(spec);
  ScanConfig cfg = base_config();
  cfg.master_seed = 4242;
  cfg.resamples_override = 99;
  cfg.threads = 1;
  const ScanResult one = scan_pairs(cases, controls, cfg);
  cfg.threads = 2;
  const ScanResult two = scan_pairs(cases, controls, cfg);
  cfg.threads = 8;
  const ScanResult eight = scan_pairs(cases, controls, cfg);
  CHECK(decisions_equal(one, two));
  CHECK(decisions_equal(one, eight));
  CHECK(one.p_cases_matrix.size() == two.p_cases_matrix.size());
  for (std::size_t k = 0; k < one.p_cases_matrix.size(); ++k) {
    const bool both_nan =
        std::isnan(one.p_cases_matrix[k]) && std::isnan(two.p_cases_matrix[k]);
    CHECK((both_nan || one.p_cases_matrix[k] == two.p_cases_matrix[k]));
  }
}

TEST_CASE("each group uses its own pairwise-complete resample budget") {
  SimulationSpec spec;
  spec.n_snps = 2;
  spec.n_cases = 200;
  spec.n_controls = 120;
  spec.seed = 8;
  auto [cases, controls] = simulate_dataset(spec);
  // missing entries shrink the cases' pairwise-complete count to 150
  for (std::size_t i = 0; i < 50; ++i) cases.set(i, 0, kMissingGenotype);
  ScanConfig cfg = base_config();
  cfg.min_complete = 10;
  const ScanResult res = scan_pairs(cases, controls, cfg);
  REQUIRE(res.decisions.size() == 1);
  const PairDecision& d = res.decisions[0];
  REQUIRE(d.flag != PairFlag::untestable);
  CHECK(d.n_cases == 150);
  CHECK(d.n_controls == 120);
  // with the default rule B = 200 + floor(5000/n), the p-values live on
  // 1/(B+1) grids that reveal the per-group budget
  auto on_grid = [](double p, std::uint32_t b) {
    const double scaled = p * (b + 1.0);
    return std::fabs(scaled - std::round(scaled)) < 1e-9;
  };
  CHECK(on_grid(d.p_cases, 233));     // default_resamples(150)
  CHECK(on_grid(d.p_controls, 241));  // default_resamples(120)
}

TEST_CASE("adjacency matrix") {
  std::vector<PairDecision> ds(3);
  ds[0].i = 0;
  ds[0].j = 1;
  ds[0].flag = PairFlag::none;
  ds[1].i = 2;
  ds[1].j = 5;
  ds[1].flag = PairFlag::epistasis;
  ds[2].i = 1;
  ds[2].j = 4;
  ds[2].flag = PairFlag::untestable;
  const auto adj = adjacency_matrix(ds, 6);
  int nonzero = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      nonzero += adj[i * 6 + j];
      CHECK(adj[i * 6 + j] == adj[j * 6 + i]);
      if (i == j) CHECK(adj[i * 6 + j] == 0);
    }
  CHECK(nonzero == 2);
  CHECK(adj[2 * 6 + 5] == 1);

  const auto empty = adjacency_matrix({}, 4);
  for (auto v : empty) CHECK(v == 0);
}

TEST_CASE("pairs.tsv reader rejects malformed rows") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "epidcov_scan_reader";
  fs::create_directories(dir);
  const std::string p = (dir / "pairs.tsv").string();
  {
    std::ofstream out(p);
    out << "snp_i\tsnp_j\tstat_cases\tp_cases\tn_cases\tstat_controls\tp_controls\t"
           "n_controls\tflag\n";
    out << "a\tb\t1\t0.5\t10\t1\t0.5\t10\tmaybe\n";
  }
  CHECK(code_of([&] { read_pairs_tsv(p); }) == Errc::ParseError);
  {
    std::ofstream out(p);
    out << "header\n";
    out << "a\tb\tnone\n";
  }
  CHECK(code_of([&] { read_pairs_tsv(p); }) == Errc::ParseError);
  std::error_code ec;
  fs::remove_all(dir, ec);
}

TEST_CASE("resolution warning fires when the Bonferroni floor is unreachable") {
  SimulationSpec spec;
  spec.n_snps = 20;
  spec.n_cases = 100;
  spec.n_controls = 100;
  spec.seed = 3;
  const auto [cases, controls] = simulate_dataset(spec);
  ScanConfig cfg = base_config();
  cfg.resamples_override = 200;  // floor 1/201 >> 0.05/380
  const ScanResult res = scan_pairs(cases, controls, cfg);
  CHECK_FALSE(res.warning.empty());
  // and indeed nothing can be flagged
  for (const auto& d : res.decisions) CHECK(d.flag != PairFlag::epistasis);
}

TEST_CASE("family-wise error under the global null at L=20") {
  // Bonferroni with the default resample budget keeps the scan conservative;
  // over 500 replicated null scans the rate of any flag stays within the
  // 3-sigma envelope of the nominal 0.05.
  int any_flag = 0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    SimulationSpec spec;
    spec.n_snps = 20;
    spec.n_cases = 100;
    spec.n_controls = 100;
    spec.seed = 50000 + rep;
    const auto [cases, controls] = simulate_dataset(spec);
    ScanConfig cfg = base_config();
    cfg.master_seed = spec.seed;
    const ScanResult res = scan_pairs(cases, controls, cfg);
    for (const auto& d : res.decisions) {
      if (d.flag == PairFlag::epistasis) {
        ++any_flag;
        break;
      }
    }
  }
  const double fwer = static_cast<double>(any_flag) / reps;
  CHECK(fwer <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / reps));
}
