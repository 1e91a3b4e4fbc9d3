#include "epidcov/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "epidcov/error.hpp"
#include "epidcov/gwasio.hpp"
#include "epidcov/permtest.hpp"
#include "epidcov/rng.hpp"
#include "epidcov/scan.hpp"
#include "epidcov/simulate.hpp"

namespace epidcov {

namespace {

constexpr double kAlphaGrid[4] = {0.01, 0.02, 0.05, 0.10};

struct ReplicateOutcome {
  double p_cases = 1.0;
  double p_controls = 1.0;
  bool testable = false;
};

// One synthetic SNP pair: fresh mafs, one joint per group, permutation test
// per group. Degenerate margins (vanishingly rare at these sample sizes)
// leave the replicate untestable instead of aborting the sweep.
ReplicateOutcome run_replicate(const ModelSpec& case_model, const ModelSpec& control_model,
                               const ReplicateConfig& cfg, std::uint64_t grid_index,
                               std::uint32_t rep) {
  Xoshiro256ss maf_rng(derive_seed(cfg.seed, grid_index, rep, 0));
  const HweMarginal mi = hwe_marginal(sample_maf(maf_rng));
  const HweMarginal mj = hwe_marginal(sample_maf(maf_rng));
  const Joint3x3 joint_cases = build_joint(case_model, mi, mj);
  const Joint3x3 joint_controls = build_joint(control_model, mi, mj);

  ReplicateOutcome out;
  try {
    Xoshiro256ss rng_c(derive_seed(cfg.seed, grid_index, rep, 1));
    auto [sc, tc] = draw_sample(joint_cases, cfg.n_cases, rng_c);
    Xoshiro256ss rng_t(derive_seed(cfg.seed, grid_index, rep, 2));
    auto [st, tt] = draw_sample(joint_controls, cfg.n_controls, rng_t);
    PermutationPlan plan_c{cfg.resamples_override ? cfg.resamples_override
                                                  : default_resamples(cfg.n_cases),
                           derive_seed(cfg.seed, grid_index, rep, 3)};
    PermutationPlan plan_t{cfg.resamples_override ? cfg.resamples_override
                                                  : default_resamples(cfg.n_controls),
                           derive_seed(cfg.seed, grid_index, rep, 4)};
    out.p_cases = permutation_test(tc, cfg.metric, cfg.metric, plan_c).pvalue;
    out.p_controls = permutation_test(tt, cfg.metric, cfg.metric, plan_t).pvalue;
    out.testable = true;
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateMargin) throw;
  }
  return out;
}

std::vector<ReplicateOutcome> run_replicates(const ModelSpec& case_model,
                                             const ModelSpec& control_model,
                                             const ReplicateConfig& cfg,
                                             std::uint64_t grid_index) {
  if (cfg.n_cases == 0 || cfg.n_controls == 0) {
    fail(Errc::BadArgument, "both groups need a positive sample size");
  }
  if (cfg.replicates == 0) fail(Errc::BadArgument, "need at least one replicate");
  std::vector<ReplicateOutcome> outcomes(cfg.replicates);
  const unsigned threads = std::max(1u, cfg.threads);
  std::atomic<std::uint32_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (;;) {
        const std::uint32_t r = cursor.fetch_add(1);
        if (r >= cfg.replicates) return;
        outcomes[r] = run_replicate(case_model, control_model, cfg, grid_index, r);
      }
    } catch (...) {
      const std::scoped_lock lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

}  // namespace

CalibrationResult run_calibration(const ModelSpec& model, const ReplicateConfig& cfg) {
  const auto outcomes = run_replicates(model, model, cfg, 0);
  CalibrationResult result;
  for (double alpha : kAlphaGrid) {
    const double th = bonferroni_threshold(alpha, 2);
    CalibrationRow row;
    row.alpha = alpha;
    for (const auto& o : outcomes) {
      if (!o.testable) continue;
      const bool rc = o.p_cases <= th;
      const bool rt = o.p_controls <= th;
      if (rc != rt) ++row.flagged;
    }
    row.alpha_hat = cfg.replicates ? static_cast<double>(row.flagged) / cfg.replicates : 0.0;
    result.rows.push_back(row);
  }
  for (const auto& o : outcomes)
    if (!o.testable) ++result.untestable;
  return result;
}

std::vector<PowerRow> run_power(ModelKind family, const std::vector<double>& grid, double alpha,
                                const ReplicateConfig& cfg) {
  if (family != ModelKind::qexp && family != ModelKind::qmult) {
    fail(Errc::BadArgument, "power sweeps run over the qexp or qmult family");
  }
  const ModelSpec indep = make_model_spec(ModelKind::indep, 1.0);
  const double th = bonferroni_threshold(alpha, 2);
  std::vector<PowerRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const ModelSpec alt = make_model_spec(family, grid[g]);
    const auto outcomes = run_replicates(alt, indep, cfg, g + 1);
    PowerRow row;
    row.param = grid[g];
    for (const auto& o : outcomes) {
      if (!o.testable) {
        ++row.untestable;
        continue;
      }
      const bool rc = o.p_cases <= th;
      const bool rt = o.p_controls <= th;
      if (rc != rt) ++row.flagged;
    }
    row.power = cfg.replicates ? static_cast<double>(row.flagged) / cfg.replicates : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// command implementations
// ---------------------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string out = ".";
  std::uint64_t seed = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

std::string out_path(const CommonOpts& common, const char* name) {
  fs::create_directories(common.out);
  return (fs::path(common.out) / name).string();
}

void add_common(CLI::App* sub, CommonOpts& common) {
  sub->add_option("--out", common.out, "Output directory (created if missing)");
  sub->add_option("--seed", common.seed, "Master seed; every output is reproducible given it");
  sub->add_option("--threads", common.threads, "Worker threads");
}

struct ScanOpts {
  CommonOpts common;
  std::string cases_path, controls_path;
  double alpha = 0.05;
  std::string metric = "equilateral";
  std::uint32_t perms = 0;
  std::size_t subset = 0;
  std::uint32_t min_complete = 30;
  bool no_qc = false;
};

void report_loaded(const char* label, const GenotypeMatrix& g) {
  std::cout << label << ": " << g.n_individuals() << " individuals x " << g.n_snps()
            << " SNPs\n";
}

int cmd_scan(const ScanOpts& opt) {
  GenotypeMatrix cases = load_genotypes(opt.cases_path);
  GenotypeMatrix controls = load_genotypes(opt.controls_path);
  report_loaded("cases", cases);
  report_loaded("controls", controls);
  check_snp_lists(cases, controls);

  if (!opt.no_qc) {
    QcResult qc = qc_filter(cases, controls, QcThresholds{});
    write_qc_report(qc.report, out_path(opt.common, "qc_report.tsv"));
    cases = std::move(qc.cases);
    controls = std::move(qc.controls);
    std::cout << "qc: " << cases.n_snps() << " of " << qc.report.size() << " SNPs kept\n";
  }
  if (opt.subset > 0) {
    auto [sc, st] = random_subset(cases, controls, opt.subset,
                                  derive_seed(opt.common.seed, 0x5b5e7));
    cases = std::move(sc);
    controls = std::move(st);
  }

  ScanConfig config;
  config.alpha = opt.alpha;
  config.metric_x = config.metric_y = parse_metric(opt.metric);
  config.resamples_override = opt.perms;
  config.master_seed = opt.common.seed;
  config.min_complete = opt.min_complete;
  config.threads = opt.common.threads;

  const ScanResult result = scan_pairs(cases, controls, config);
  if (!result.warning.empty()) std::cerr << "warning: " << result.warning << '\n';
  write_pairs_tsv(result, out_path(opt.common, "pairs.tsv"));
  write_adjacency_tsv(result, out_path(opt.common, "adjacency.tsv"));

  std::size_t flagged = 0, untestable = 0;
  for (const auto& d : result.decisions) {
    flagged += d.flag == PairFlag::epistasis;
    untestable += d.flag == PairFlag::untestable;
  }
  std::cout << "scan: " << result.decisions.size() << " pairs over " << cases.n_snps()
            << " SNPs; " << flagged << " flagged, " << untestable
            << " untestable; per-test threshold " << result.threshold << '\n';
  return 0;
}

struct QcOpts {
  CommonOpts common;
  std::string cases_path, controls_path;
  QcThresholds thresholds;
};

int cmd_qc(const QcOpts& opt) {
  const GenotypeMatrix cases = load_genotypes(opt.cases_path);
  const GenotypeMatrix controls = load_genotypes(opt.controls_path);
  report_loaded("cases", cases);
  report_loaded("controls", controls);
  QcResult qc = qc_filter(cases, controls, opt.thresholds);
  write_qc_report(qc.report, out_path(opt.common, "qc_report.tsv"));
  save_genotypes(qc.cases, out_path(opt.common, "cases_qc.tsv"));
  save_genotypes(qc.controls, out_path(opt.common, "controls_qc.tsv"));
  std::cout << "qc: " << qc.cases.n_snps() << " of " << qc.report.size() << " SNPs kept\n";
  return 0;
}

struct SimulateOpts {
  CommonOpts common;
  std::string case_model = "indep";
  std::string control_model = "indep";
  std::size_t n_snps = 50;
  std::uint64_t n_cases = 585;
  std::uint64_t n_controls = 573;
};

int cmd_simulate(const SimulateOpts& opt) {
  SimulationSpec spec;
  spec.n_snps = opt.n_snps;
  spec.n_cases = opt.n_cases;
  spec.n_controls = opt.n_controls;
  spec.case_model = parse_model(opt.case_model);
  spec.control_model = parse_model(opt.control_model);
  spec.seed = opt.common.seed;
  const auto [cases, controls] = simulate_dataset(spec);
  save_genotypes(cases, out_path(opt.common, "cases.tsv"));
  save_genotypes(controls, out_path(opt.common, "controls.tsv"));
  std::cout << "simulate: " << opt.n_snps << " SNPs, planted pair (snp0001, snp0002) "
            << opt.case_model << " in cases vs " << opt.control_model << " in controls\n";
  return 0;
}

struct ReplicateOpts {
  CommonOpts common;
  std::string model;
  std::string metric = "equilateral";
  std::uint32_t replicates = 1000;
  std::uint64_t n_cases = 585;
  std::uint64_t n_controls = 573;
  std::uint32_t perms = 0;
  // power only
  std::string grid = "1,2,5,10";
  double alpha = 0.05;
};

ReplicateConfig replicate_config(const ReplicateOpts& opt) {
  ReplicateConfig cfg;
  cfg.replicates = opt.replicates;
  cfg.n_cases = opt.n_cases;
  cfg.n_controls = opt.n_controls;
  cfg.resamples_override = opt.perms;
  cfg.seed = opt.common.seed;
  cfg.metric = parse_metric(opt.metric);
  cfg.threads = opt.common.threads;
  return cfg;
}

void write_protocol_header(std::ofstream& out, const ReplicateOpts& opt, const char* groups) {
  out << "# protocol: per replicate, draw two mafs ~ U[0.05,0.2], build the SNP-pair joint\n"
      << "# for each group (" << groups << "), sample n_cases=" << opt.n_cases
      << " and n_controls=" << opt.n_controls << ",\n"
      << "# run the per-group permutation test (B = "
      << (opt.perms ? std::to_string(opt.perms) : std::string("200 + floor(5000/n)"))
      << ", metric " << opt.metric << "),\n"
      << "# reject a group at the Bonferroni-adjusted per-group threshold alpha/2\n"
      << "# (one pair = two tests), declare epistasis on exactly one rejection.\n";
}

int cmd_calibrate(const ReplicateOpts& opt) {
  const ModelSpec model = parse_model(opt.model);
  const CalibrationResult result = run_calibration(model, replicate_config(opt));
  std::ofstream out(out_path(opt.common, "calibration.tsv"));
  if (!out) fail(Errc::ParseError, "cannot write calibration.tsv");
  write_protocol_header(out, opt, ("both " + opt.model).c_str());
  out << "alpha\talpha_hat\tflagged\treplicates\tuntestable\n";
  char buf[128];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g\t%u\t%u\t%u\n", row.alpha, row.alpha_hat,
                  row.flagged, opt.replicates, result.untestable);
    out << buf;
  }
  std::cout << "calibrate: model " << opt.model << ", R=" << opt.replicates << '\n';
  return 0;
}

int cmd_power(const ReplicateOpts& opt) {
  ModelKind family;
  if (opt.model == "qexp") family = ModelKind::qexp;
  else if (opt.model == "qmult") family = ModelKind::qmult;
  else
    fail(Errc::BadArgument, "power expects --model qexp or qmult (the grid carries the parameter)");
  std::vector<double> grid;
  {
    std::string item;
    std::istringstream ss(opt.grid);
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') {
        fail(Errc::BadArgument, "bad grid entry '" + item + "'");
      }
      grid.push_back(v);
    }
    if (grid.empty()) fail(Errc::BadArgument, "empty parameter grid");
  }
  const auto rows = run_power(family, grid, opt.alpha, replicate_config(opt));
  std::ofstream out(out_path(opt.common, "power.tsv"));
  if (!out) fail(Errc::ParseError, "cannot write power.tsv");
  write_protocol_header(out, opt, ("cases " + opt.model + ":PARAM, controls indep").c_str());
  out << "# decision at alpha = " << opt.alpha << "\n";
  out << "param\tpower\tflagged\treplicates\tuntestable\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g\t%u\t%u\t%u\n", row.param, row.power,
                  row.flagged, opt.replicates, row.untestable);
    out << buf;
  }
  std::cout << "power: family " << opt.model << " over " << rows.size() << " grid points\n";
  return 0;
}

struct EnrichOpts {
  CommonOpts common;
  std::string pairs_path, modules_path;
};

int cmd_enrich(const EnrichOpts& opt) {
  const auto rows = read_pairs_tsv(opt.pairs_path);
  const ModuleMap modules = load_module_map(opt.modules_path);
  std::vector<std::pair<std::string, std::string>> flagged, testable;
  for (const auto& r : rows) {
    if (r.flag == PairFlag::untestable) continue;
    testable.emplace_back(r.snp_i, r.snp_j);
    if (r.flag == PairFlag::epistasis) flagged.emplace_back(r.snp_i, r.snp_j);
  }
  const EnrichmentResult res = enrichment_test(flagged, testable, modules);
  std::ofstream out(out_path(opt.common, "enrichment.tsv"));
  if (!out) fail(Errc::ParseError, "cannot write enrichment.tsv");
  out << "observed_prop\texpected_prop\tpvalue\tn_flagged\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.6g\t%.6g\t%.6g\t%llu\n", res.observed_prop,
                res.expected_prop, res.pvalue, static_cast<unsigned long long>(res.n_flagged));
  out << buf;
  std::cout << "enrich: observed " << res.observed_prop << " vs expected " << res.expected_prop
            << ", p = " << res.pvalue << " over " << res.n_flagged << " flagged pairs\n";
  return 0;
}

int cmd_embed(const std::string& metric) {
  const auto pts = sqrt_embedding(parse_metric(metric));
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof(buf), "%.12g\t%.12g\n", p[0], p[1]);
    std::cout << buf;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "epidcov: distance-covariance scan for differential SNP-SNP dependence\n"
      "between case and control groups"};
  app.require_subcommand(1);

  ScanOpts scan_opt;
  auto* scan_cmd = app.add_subcommand(
      "scan", "QC, then test every SNP pair in both groups and flag differential dependence");
  scan_cmd->add_option("--cases", scan_opt.cases_path, "Case genotype TSV")->required();
  scan_cmd->add_option("--controls", scan_opt.controls_path, "Control genotype TSV")->required();
  scan_cmd->add_option("--alpha", scan_opt.alpha, "Family-wise error target (default 0.05)");
  scan_cmd->add_option("--metric", scan_opt.metric,
                       "equilateral|recessive|heterozygous|dominant|euclidean or "
                       "custom:D01,D02,D12");
  scan_cmd->add_option("--perms", scan_opt.perms,
                       "Permutation resamples per test (default 200 + floor(5000/n))");
  scan_cmd->add_option("--subset", scan_opt.subset, "Random SNP subset size (0 = all)");
  scan_cmd->add_option("--min-complete", scan_opt.min_complete,
                       "Minimum pairwise-complete observations per group");
  scan_cmd->add_flag("--no-qc", scan_opt.no_qc, "Skip the QC filter");
  add_common(scan_cmd, scan_opt.common);

  QcOpts qc_opt;
  auto* qc_cmd = app.add_subcommand("qc", "Filter SNPs and write the per-SNP QC report");
  qc_cmd->add_option("--cases", qc_opt.cases_path, "Case genotype TSV")->required();
  qc_cmd->add_option("--controls", qc_opt.controls_path, "Control genotype TSV")->required();
  qc_cmd->add_option("--min-maf", qc_opt.thresholds.min_maf, "Pooled MAF floor (default 0.01)");
  qc_cmd->add_option("--hwe-alpha", qc_opt.thresholds.hwe_alpha,
                     "HWE test level in controls (default 0.05)");
  qc_cmd->add_option("--min-call-rate", qc_opt.thresholds.min_call_rate,
                     "Per-group call-rate floor (default 0.95)");
  qc_cmd->add_option("--diff-call-alpha", qc_opt.thresholds.diff_call_alpha,
                     "Two-proportion test level for call-rate difference (default 0.05)");
  qc_cmd->add_option("--scan-min-maf", qc_opt.thresholds.scan_min_maf,
                     "Pooled MAF must exceed this to enter the scan (default 0.10)");
  add_common(qc_cmd, qc_opt.common);

  SimulateOpts sim_opt;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Write a synthetic case/control dataset with a planted SNP pair");
  sim_cmd->add_option("--model", sim_opt.case_model,
                      "Planted-pair model in cases: indep | qexp:E | rexp:E | qmult:G");
  sim_cmd->add_option("--control-model", sim_opt.control_model,
                      "Planted-pair model in controls (default indep)");
  sim_cmd->add_option("--snps", sim_opt.n_snps, "Number of SNPs (default 50)");
  sim_cmd->add_option("--n-cases", sim_opt.n_cases, "Case individuals (default 585)");
  sim_cmd->add_option("--n-controls", sim_opt.n_controls, "Control individuals (default 573)");
  add_common(sim_cmd, sim_opt.common);

  ReplicateOpts cal_opt;
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "Empirical size of the two-group decision with both groups from one model");
  cal_cmd->add_option("--model", cal_opt.model, "indep | qexp:E | rexp:E | qmult:G")->required();
  cal_cmd->add_option("--replicates", cal_opt.replicates, "Replicates (default 1000)");
  cal_cmd->add_option("--n-cases", cal_opt.n_cases, "Case sample size (default 585)");
  cal_cmd->add_option("--n-controls", cal_opt.n_controls, "Control sample size (default 573)");
  cal_cmd->add_option("--perms", cal_opt.perms, "Permutation resamples override");
  cal_cmd->add_option("--metric", cal_opt.metric, "Metric (default equilateral)");
  add_common(cal_cmd, cal_opt.common);

  ReplicateOpts pow_opt;
  pow_opt.replicates = 1000;
  auto* pow_cmd = app.add_subcommand(
      "power", "Empirical power over a parameter grid (cases from the model, controls indep)");
  pow_cmd->add_option("--model", pow_opt.model, "Model family: qexp | qmult")->required();
  pow_cmd->add_option("--grid", pow_opt.grid, "Comma-separated parameter grid");
  pow_cmd->add_option("--alpha", pow_opt.alpha, "Decision level (default 0.05)");
  pow_cmd->add_option("--replicates", pow_opt.replicates, "Replicates per grid point");
  pow_cmd->add_option("--n-cases", pow_opt.n_cases, "Case sample size (default 585)");
  pow_cmd->add_option("--n-controls", pow_opt.n_controls, "Control sample size (default 573)");
  pow_cmd->add_option("--perms", pow_opt.perms, "Permutation resamples override");
  pow_cmd->add_option("--metric", pow_opt.metric, "Metric (default equilateral)");
  add_common(pow_cmd, pow_opt.common);

  EnrichOpts enr_opt;
  auto* enr_cmd = app.add_subcommand(
      "enrich", "Co-expression module enrichment of flagged pairs from a pairs.tsv");
  enr_cmd->add_option("--pairs", enr_opt.pairs_path, "pairs.tsv from a scan")->required();
  enr_cmd->add_option("--modules", enr_opt.modules_path,
                      "Module map TSV: snp_id<TAB>module_id per membership")
      ->required();
  add_common(enr_cmd, enr_opt.common);

  std::string embed_metric = "equilateral";
  auto* emb_cmd =
      app.add_subcommand("embed", "Print the planar embedding of the square-root metric");
  emb_cmd->add_option("--metric", embed_metric, "Metric to embed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (scan_cmd->parsed()) return cmd_scan(scan_opt);
    if (qc_cmd->parsed()) return cmd_qc(qc_opt);
    if (sim_cmd->parsed()) return cmd_simulate(sim_opt);
    if (cal_cmd->parsed()) return cmd_calibrate(cal_opt);
    if (pow_cmd->parsed()) return cmd_power(pow_opt);
    if (enr_cmd->parsed()) return cmd_enrich(enr_opt);
    if (emb_cmd->parsed()) return cmd_embed(embed_metric);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace epidcov
