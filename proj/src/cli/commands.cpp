#include "covplan/cli/commands.hpp"

#include "covplan/cli/csv.hpp"
#include "covplan/cli/model_io.hpp"
#include "covplan/efficiency.hpp"
#include "covplan/error.hpp"
#include "covplan/historical.hpp"
#include "covplan/regression.hpp"
#include "covplan/simulation.hpp"

#include <CLI11.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <set>

namespace covplan::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidData:
    case ErrorKind::MissingColumn:
    case ErrorKind::InvalidContrast:
    case ErrorKind::DomainError:
      return kExitUsage;
    default:
      return kExitNumeric;
  }
}

// Group column: integer labels 1..g, or a 0/1 treatment indicator
// (1 = treatment -> label 1, 0 = placebo -> label 2).
std::vector<int> group_labels(const CsvTable& table, const std::string& column) {
  const std::vector<double> raw = table.numeric_column(column);
  std::set<double> distinct(raw.begin(), raw.end());
  const bool indicator = distinct == std::set<double>{0.0, 1.0};
  std::vector<int> labels;
  labels.reserve(raw.size());
  for (double v : raw) {
    if (v != std::floor(v)) fail(ErrorKind::InvalidData, "group column '" + column + "' must hold integers");
    if (indicator) {
      labels.push_back(v == 1.0 ? 1 : 2);
    } else {
      if (v < 1) fail(ErrorKind::InvalidData, "group labels must be 1..g (or a 0/1 treatment indicator)");
      labels.push_back(static_cast<int>(v));
    }
  }
  return labels;
}

TrialDataset load_dataset(const CsvTable& table, const std::string& outcome, const std::string& group,
                          const std::vector<std::string>& covariates) {
  const std::vector<double> y = table.numeric_column(outcome);
  MatrixXd x(table.rows.size(), covariates.size());
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    const std::vector<double> col = table.numeric_column(covariates[j]);
    for (std::size_t i = 0; i < col.size(); ++i) x(i, j) = col[i];
  }
  return TrialDataset(Eigen::Map<const VectorXd>(y.data(), y.size()), group_labels(table, group), std::move(x),
                      covariates);
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string data;
  std::string outcome;
  std::string group;
  std::string covariates;
  std::string contrast;
  double alpha = 0.05;
};

void analyze(const AnalyzeOptions& opt, std::ostream& out) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) fail(ErrorKind::DomainError, "--alpha must lie in (0, 1)");
  const CsvTable table = read_csv_file(opt.data);
  const auto names = split_list(opt.covariates);
  const TrialDataset data = load_dataset(table, opt.outcome, opt.group, names);
  std::vector<int> selection(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) selection[j] = static_cast<int>(j);

  FitResult fit;
  std::vector<std::string> labels;
  std::string model;
  if (!opt.contrast.empty()) {
    const ContrastMatrix c = ContrastMatrix::parse(opt.contrast);
    fit = fit_groups(data, selection, c);
    model = "cell-means ANCOVA with contrasts";
    for (int r = 0; r < c.rows(); ++r) labels.push_back("contrast" + std::to_string(r + 1));
  } else if (data.g() == 2) {
    fit = fit_adjusted(data, selection);
    model = names.empty() ? "two-group comparison" : "two-group ANCOVA";
    labels.push_back("treatment");
  } else {
    const ContrastMatrix c = ContrastMatrix::against_first(data.g());
    fit = fit_groups(data, selection, c);
    model = "cell-means ANCOVA, group 1 against each other group";
    for (int j = 2; j <= data.g(); ++j) labels.push_back("group1-group" + std::to_string(j));
  }

  std::vector<std::string> sizes;
  for (int s : data.group_sizes()) sizes.push_back(std::to_string(s));
  out << "model: " << model << '\n';
  out << "patients: " << data.n() << '\n';
  out << "groups: " << data.g() << " (" << join(sizes, ", ") << ")\n";
  out << "covariates: " << names.size() << (names.empty() ? "" : " (" + join(names, ", ") + ")") << '\n';
  out << "residual_df: " << fit.residual_df << '\n';
  out << "sigma2: " << fixed(fit.sigma2) << '\n';
  if (opt.contrast.empty() && data.g() == 2) out << "r2_zx: " << fixed(fit.r2_zx) << '\n';
  out << "effect,estimate,std_error,t_value,p_value,significant\n";
  const boost::math::students_t_distribution<double> t(fit.residual_df);
  for (Eigen::Index k = 0; k < fit.effect.size(); ++k) {
    const double est = fit.effect(k);
    const double se = fit.effect_se(static_cast<int>(k));
    double tval = est / se;
    if (se == 0.0) tval = est == 0.0 ? std::nan("") : std::copysign(INFINITY, est);
    double pval = std::nan("");
    if (std::isinf(tval)) {
      pval = 0.0;
    } else if (!std::isnan(tval)) {
      pval = 2.0 * boost::math::cdf(boost::math::complement(t, std::abs(tval)));
    }
    out << labels[k] << ',' << fixed(est) << ',' << fixed(se) << ',' << fixed(tval) << ',' << fixed(pval) << ','
        << (pval < opt.alpha ? "yes" : "no") << '\n';
  }
}

// ------------------------------------------------------------------- plan

struct PlanOptions {
  int n = 0;
  int g = 2;
  std::optional<double> nu_p;
  std::string historical;
  std::string outcome;
  std::string group;
  std::string ranking;
};

void plan(const PlanOptions& opt, std::ostream& out) {
  if (opt.n - opt.g - 1 < 1) fail(ErrorKind::DomainError, "--n must exceed g + 1");
  if (opt.nu_p.has_value() == !opt.historical.empty()) {
    throw UsageError("plan needs exactly one of --nu-p or --historical");
  }
  if (opt.nu_p) {
    const double nu = *opt.nu_p;
    const int max_p = max_beneficial_covariates(opt.n, opt.g, nu);
    const NuThreshold one = min_nu_for_benefit(opt.n, opt.g, 1);
    out << "design: n=" << opt.n << " g=" << opt.g << " nu_p=" << fixed(nu) << '\n';
    out << "max_beneficial_covariates: " << max_p << '\n';
    if (max_p == 0) {
      out << "no covariate set helps: a single covariate needs nu_p > " << fixed(one.nu) << " (1/"
          << opt.n - opt.g - 1 << ")\n";
    } else {
      out << "relative_efficiency_at_max: " << fixed(relative_efficiency(opt.n, opt.g, max_p, nu)) << '\n';
    }
    out << "screening_correlation: " << fixed(one.screening_correlation) << '\n';
    out << "p,min_nu_p,feasible,relative_efficiency\n";
    for (int p = 1; p <= opt.n - opt.g - 2; ++p) {
      const NuThreshold t = min_nu_for_benefit(opt.n, opt.g, p);
      out << p << ',' << fixed(t.nu) << ',' << (t.feasible ? "yes" : "no") << ','
          << fixed(relative_efficiency(opt.n, opt.g, p, nu)) << '\n';
    }
    return;
  }

  if (opt.outcome.empty() || opt.group.empty() || opt.ranking.empty()) {
    throw UsageError("--historical needs --outcome, --group and --ranking");
  }
  const CsvTable table = read_csv_file(opt.historical);
  const auto ranking = split_list(opt.ranking);
  const TrialDataset data = load_dataset(table, opt.outcome, opt.group, ranking);
  const HistoricalEstimate est = estimate_nu_curve(data, ranking, opt.n, opt.g);
  out << "historical: m=" << est.m << " effective_m=" << est.effective_m << '\n';
  out << "target: n=" << opt.n << " g=" << opt.g << '\n';
  out << "p,covariate,r2,nu_hat,predicted_re\n";
  for (std::size_t p = 0; p < est.nu_hat.size(); ++p) {
    out << p << ',' << (p == 0 ? "" : ranking[p - 1]) << ',' << fixed(est.r2_hat[p]) << ',' << fixed(est.nu_hat[p])
        << ',' << fixed(est.predicted_re[p]) << '\n';
  }
  out << "optimal_p: " << est.optimal_p << '\n';
}

// -------------------------------------------------------------- composite

struct TrainOptions {
  std::string historical;
  std::string outcome;
  std::string group;
  std::string covariates;
  std::string lambda = "auto";
  std::string out;
};

LambdaPolicy parse_lambda(const std::string& text) {
  if (text == "auto" || text == "AUTO") return std::nullopt;
  const double v = parse_number(text, "--lambda");
  if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::DomainError, "--lambda must be 'auto' or a value >= 0");
  return v;
}

void composite_train(const TrainOptions& opt, std::ostream& out) {
  const LambdaPolicy lambda = parse_lambda(opt.lambda);
  const CsvTable table = read_csv_file(opt.historical);
  const auto names = split_list(opt.covariates);
  if (names.empty()) throw UsageError("--covariates must list at least one column");
  const TrialDataset data = load_dataset(table, opt.outcome, opt.group, names);
  const CompositeModel model = train_composite(data, names, lambda);
  write_model_file(opt.out, model);
  out << "model: " << opt.out << '\n';
  out << "covariates: " << names.size() << '\n';
  out << "lambda: " << fixed(model.lambda) << (lambda ? "" : " (generalized cross-validation)") << '\n';
  out << "historical_rows: " << model.m << '\n';
  out << "in_sample_nu_w: " << fixed(model.trained_nu_w) << '\n';
}

struct ApplyOptions {
  std::string model;
  std::string data;
  std::string out_column = "W";
  std::string out;
};

void composite_apply(const ApplyOptions& opt, std::ostream& out) {
  const CompositeModel model = read_model_file(opt.model);
  CsvTable table = read_csv_file(opt.data);
  if (table.column(opt.out_column) >= 0) {
    fail(ErrorKind::InvalidData, "column '" + opt.out_column + "' already exists in " + opt.data);
  }
  for (const auto& name : model.covariate_names) table.require_column(name);
  MatrixXd x(table.rows.size(), model.covariate_names.size());
  for (std::size_t j = 0; j < model.covariate_names.size(); ++j) {
    const auto col = table.numeric_column(model.covariate_names[j]);
    for (std::size_t i = 0; i < col.size(); ++i) x(i, j) = col[i];
  }
  const VectorXd w = apply_composite(model, x, model.covariate_names);
  table.header.push_back(opt.out_column);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].push_back(format_number(w(i)));
  write_csv_file(opt.out, table);
  out << "wrote " << table.rows.size() << " rows with column " << opt.out_column << " to " << opt.out << '\n';
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string which;
  int n = 50;
  int m = 100;
  int nsim = 10000;
  int kmax = 60;
  double nu_inf = 0.5;
  double alpha = 0.05;
  std::string grid;
  std::string lambda = "auto";
  std::string out_dir = ".";
};

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> grid;
  auto to_int = [&](const std::string& s) {
    const double v = parse_number(s, "--p-grid");
    if (v != std::floor(v)) fail(ErrorKind::DomainError, "--p-grid values must be integers");
    return static_cast<int>(v);
  };
  if (text.find(':') != std::string::npos) {
    const auto parts = split_list(text, ':');
    if (parts.size() < 2 || parts.size() > 3) fail(ErrorKind::DomainError, "--p-grid must be a:b, a:b:step or a list");
    const int lo = to_int(parts[0]);
    const int hi = to_int(parts[1]);
    const int step = parts.size() == 3 ? to_int(parts[2]) : 1;
    if (step < 1 || hi < lo) fail(ErrorKind::DomainError, "--p-grid range is empty");
    for (int p = lo; p <= hi; p += step) grid.push_back(p);
  } else {
    for (const auto& s : split_list(text)) grid.push_back(to_int(s));
  }
  if (grid.empty()) fail(ErrorKind::DomainError, "--p-grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end()) || std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    fail(ErrorKind::DomainError, "--p-grid values must be strictly increasing");
  }
  return grid;
}

std::string cell(double v) { return format_number(v); }

void simulate(const SimulateOptions& opt, std::optional<std::uint64_t> seed, std::ostream& out) {
  SimProtocol protocol;
  protocol.n = opt.n;
  protocol.m = opt.m;
  protocol.n_sim = opt.nsim;
  protocol.k_max = opt.kmax;
  protocol.nu_infinity = opt.nu_inf;
  protocol.alpha = opt.alpha;
  protocol.lambda = parse_lambda(opt.lambda);
  if (!opt.grid.empty()) protocol.p_grid = parse_grid(opt.grid);
  if (!seed) {
    seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}();
  }
  protocol.seed = *seed;
  protocol.validate();
  out << "seed: " << protocol.seed << '\n';

  const SimSummary summary = run_simulation(protocol, threads_from_environment());
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);

  if (opt.which == "figure2" || opt.which == "both") {
    CsvTable t;
    t.header = {"p", "re_p_emp", "re_p_lo", "re_p_hi", "re_p_theory", "re_w_emp", "re_w_lo", "re_w_hi", "re_w_ideal"};
    for (const auto& pt : summary.points) {
      t.rows.push_back({std::to_string(pt.p), cell(pt.re_p.estimate), cell(pt.re_p.lo), cell(pt.re_p.hi),
                        cell(pt.re_p_theory), cell(pt.re_w.estimate), cell(pt.re_w.lo), cell(pt.re_w.hi),
                        cell(pt.re_w_ideal)});
    }
    write_csv_file((dir / "figure2.csv").string(), t);
    out << "wrote " << (dir / "figure2.csv").string() << '\n';
  }
  if (opt.which == "figure3" || opt.which == "both") {
    CsvTable t;
    t.header = {"p",          "power_a",    "power_a_lo", "power_a_hi",     "power_b",        "power_b_lo",   "power_b_hi",
                "power_c",    "power_c_lo", "power_c_hi", "power_a_theory", "power_b_theory", "power_c_ideal"};
    for (const auto& pt : summary.points) {
      t.rows.push_back({std::to_string(pt.p), cell(pt.power_a.estimate), cell(pt.power_a.lo), cell(pt.power_a.hi),
                        cell(pt.power_b.estimate), cell(pt.power_b.lo), cell(pt.power_b.hi), cell(pt.power_c.estimate),
                        cell(pt.power_c.lo), cell(pt.power_c.hi), cell(pt.power_a_theory), cell(pt.power_b_theory),
                        cell(pt.power_c_ideal)});
    }
    write_csv_file((dir / "figure3.csv").string(), t);
    out << "wrote " << (dir / "figure3.csv").string() << '\n';
  }

  std::ofstream proto(dir / "protocol.txt", std::ios::binary);
  if (!proto) fail(ErrorKind::InvalidData, "cannot write protocol.txt in " + opt.out_dir);
  std::vector<std::string> grid;
  for (int p : summary.protocol.p_grid) grid.push_back(std::to_string(p));
  int failures = 0;
  for (const auto& pt : summary.points) failures = std::max(failures, pt.failures);
  proto << "n = " << protocol.n << '\n'
        << "m = " << protocol.m << '\n'
        << "g = " << protocol.g << '\n'
        << "nu_infinity = " << cell(protocol.nu_infinity) << '\n'
        << "alpha = " << cell(protocol.alpha) << '\n'
        << "n_sim = " << protocol.n_sim << '\n'
        << "k_max = " << protocol.k_max << '\n'
        << "seed = " << protocol.seed << '\n'
        << "p_grid = " << join(grid, ",") << '\n'
        << "lambda = " << (protocol.lambda ? cell(*protocol.lambda) : std::string("auto (GCV)")) << '\n'
        << "target_power = " << cell(protocol.target_power) << '\n'
        << "sigma_u = 1\n"
        << "gamma = " << cell(summary.gamma) << '\n'
        << "failed_replicates_unadjusted = " << summary.failures_a << '\n'
        << "failed_replicates_max_per_p = " << failures << '\n';
  out << "wrote " << (dir / "protocol.txt").string() << '\n';
}

// ----------------------------------------------------------------- region

struct RegionOptions {
  int n = 0;
  int g = 2;
  std::optional<double> nu_p;
  std::optional<double> nu_w;
  std::optional<int> p;
  bool grid = false;
  int steps = 50;
  std::string out = "region.csv";
};

void region(const RegionOptions& opt, std::ostream& out) {
  if (!opt.nu_p) throw UsageError("region needs --nu-p");
  if (!opt.grid) {
    if (!opt.nu_w || !opt.p) throw UsageError("point mode needs --nu-w and --p (or use --grid)");
    if (*opt.nu_w > *opt.nu_p) {
      fail(ErrorKind::DomainError, "nu_w = " + fixed(*opt.nu_w) + " exceeds nu_p = " + fixed(*opt.nu_p) +
                                       ": a linear composite of the covariates cannot explain more variance than the "
                                       "covariates themselves");
    }
    const EfficiencyReport r = classify_region({opt.n, opt.g, *opt.p, *opt.nu_p, *opt.nu_w});
    out << "ordering: " << r.ordering.label() << '\n';
    out << "re_p: " << fixed(r.re_p) << '\n';
    out << "re_w: " << fixed(r.re_w) << '\n';
    out << "max_beneficial_covariates: " << r.max_p << '\n';
    out << "threshold_nu_p: " << fixed(r.threshold_nu) << '\n';
    out << "composite_threshold_nu_w: " << fixed(composite_benefit_threshold(opt.n, *opt.p, *opt.nu_p, opt.g)) << '\n';
    return;
  }

  if (opt.steps < 1) fail(ErrorKind::DomainError, "--steps must be >= 1");
  const double nu_p = *opt.nu_p;
  const RegionBoundaries b = region_boundaries(opt.n, nu_p, opt.g);
  const int max_p = opt.n - opt.g - 2;
  CsvTable t;
  t.header = {"kind", "p", "nu_w", "label"};
  for (int p = 1; p <= max_p; ++p) {
    for (int k = 0; k <= opt.steps; ++k) {
      const double nu_w = std::min(nu_p, nu_p * k / opt.steps);
      const EfficiencyReport r = classify_region({opt.n, opt.g, p, nu_p, nu_w});
      t.rows.push_back({"cell", std::to_string(p), cell(nu_w), r.ordering.label()});
    }
  }
  for (int p = 1; p <= max_p; ++p) {
    t.rows.push_back({"composite_vs_none", std::to_string(p), cell(b.horizontal_nu_w), ""});
  }
  for (int k = 0; k <= opt.steps; ++k) {
    t.rows.push_back({"covariates_vs_none", cell(b.vertical_p), cell(nu_p * k / opt.steps), ""});
  }
  for (int i = 10; i <= 10 * max_p; ++i) {
    const double p = i / 10.0;
    const double v = b.curve(p);
    if (v < 0.0 || v > nu_p) continue;
    t.rows.push_back({"composite_vs_covariates", cell(p), cell(v), ""});
  }
  write_csv_file(opt.out, t);
  out << "triple_point: p=" << fixed(b.horizontal_vertical.p) << " nu_w=" << fixed(b.horizontal_vertical.nu_w) << '\n';
  out << "wrote " << opt.out << '\n';
}

}  // namespace

int threads_from_environment() {
  const char* env = std::getenv("COVPLAN_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) return 0;
  return static_cast<int>(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariate planning for randomized trials: efficiency, power and composite covariates", "covplan"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Random seed (derived from entropy and printed when absent)");

  AnalyzeOptions a;
  auto* analyze_cmd = app.add_subcommand("analyze", "Estimate treatment effects from a trial CSV");
  analyze_cmd->add_option("--data", a.data, "Trial CSV")->required();
  analyze_cmd->add_option("--outcome", a.outcome, "Outcome column")->required();
  analyze_cmd->add_option("--group", a.group, "Group column (labels 1..g or 0/1 treatment)")->required();
  analyze_cmd->add_option("--covariates", a.covariates, "Comma-separated covariate columns");
  analyze_cmd->add_option("--contrast", a.contrast, "Contrast rows, e.g. \"1,-1,0;0,1,-1\"");
  analyze_cmd->add_option("--alpha", a.alpha, "Significance level");

  PlanOptions pl;
  auto* plan_cmd = app.add_subcommand("plan", "Number of covariates worth including");
  plan_cmd->add_option("--n", pl.n, "Planned trial size")->required();
  plan_cmd->add_option("--g", pl.g, "Number of groups");
  plan_cmd->add_option("--nu-p", pl.nu_p, "Variance share explained by the covariates");
  plan_cmd->add_option("--historical", pl.historical, "Historical CSV");
  plan_cmd->add_option("--outcome", pl.outcome, "Outcome column of the historical CSV");
  plan_cmd->add_option("--group", pl.group, "Group column of the historical CSV");
  plan_cmd->add_option("--ranking", pl.ranking, "Covariates from most to least promising");

  auto* composite_cmd = app.add_subcommand("composite", "Train or apply a composite covariate");
  composite_cmd->require_subcommand(1);
  TrainOptions tr;
  auto* train_cmd = composite_cmd->add_subcommand("train", "Fit composite weights on historical data");
  train_cmd->add_option("--historical", tr.historical, "Historical CSV")->required();
  train_cmd->add_option("--outcome", tr.outcome, "Outcome column")->required();
  train_cmd->add_option("--group", tr.group, "Group column")->required();
  train_cmd->add_option("--covariates", tr.covariates, "Comma-separated covariate columns")->required();
  train_cmd->add_option("--lambda", tr.lambda, "Ridge penalty or 'auto'");
  train_cmd->add_option("--out", tr.out, "Model CSV to write")->required();
  ApplyOptions ap;
  auto* apply_cmd = composite_cmd->add_subcommand("apply", "Append the composite covariate to a CSV");
  apply_cmd->add_option("--model", ap.model, "Model CSV")->required();
  apply_cmd->add_option("--data", ap.data, "Input CSV")->required();
  apply_cmd->add_option("--out-column", ap.out_column, "Name of the new column");
  apply_cmd->add_option("--out", ap.out, "Output CSV")->required();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo reproduction of efficiency and power curves");
  sim_cmd->add_option("which", sim.which, "figure2, figure3 or both")
      ->required()
      ->check(CLI::IsMember({"figure2", "figure3", "both"}));
  sim_cmd->add_option("--n", sim.n, "Trial size");
  sim_cmd->add_option("--m", sim.m, "Historical size");
  sim_cmd->add_option("--nsim", sim.nsim, "Replicates");
  sim_cmd->add_option("--kmax", sim.kmax, "Number of generated covariates");
  sim_cmd->add_option("--nu-inf", sim.nu_inf, "Variance share of all covariates");
  sim_cmd->add_option("--alpha", sim.alpha, "Two-sided test level");
  sim_cmd->add_option("--p-grid", sim.grid, "Covariate counts: a:b, a:b:step or a list (default 1:n-4)");
  sim_cmd->add_option("--lambda", sim.lambda, "Ridge penalty or 'auto'");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory");
  sim_cmd->add_option("--seed", seed, "Random seed");

  RegionOptions rg;
  auto* region_cmd = app.add_subcommand("region", "Efficiency ordering of none / p covariates / composite");
  region_cmd->add_option("--n", rg.n, "Trial size")->required();
  region_cmd->add_option("--g", rg.g, "Number of groups");
  region_cmd->add_option("--nu-p", rg.nu_p, "Variance share of the p covariates");
  region_cmd->add_option("--nu-w", rg.nu_w, "Variance share of the composite");
  region_cmd->add_option("--p", rg.p, "Number of covariates");
  region_cmd->add_flag("--grid", rg.grid, "Write region.csv over (p, nu_w)");
  region_cmd->add_option("--steps", rg.steps, "nu_w grid steps in grid mode");
  region_cmd->add_option("--out", rg.out, "Grid output file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) {
      analyze(a, out);
    } else if (*plan_cmd) {
      plan(pl, out);
    } else if (*train_cmd) {
      composite_train(tr, out);
    } else if (*apply_cmd) {
      composite_apply(ap, out);
    } else if (*sim_cmd) {
      simulate(sim, seed, out);
    } else if (*region_cmd) {
      region(rg, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace covplan::cli
