#include "ensconv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ensconv/bootstrap.hpp"
#include "ensconv/error.hpp"
#include "ensconv/first_order.hpp"
#include "ensconv/io.hpp"
#include "ensconv/json_writer.hpp"
#include "ensconv/parallel.hpp"
#include "ensconv/trainer.hpp"
#include "ensconv/version.hpp"
#include "ensconv/voting.hpp"

namespace ensconv {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ojson to_array(const Eigen::Ref<const Eigen::VectorXd>& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Everything needed to rerun a command: the arguments (minus --threads, which
// never changes results), the working directory and digests of every input.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args) : command_(std::move(command)) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--threads") {
        ++i;
        continue;
      }
      if (args[i].rfind("--threads=", 0) == 0) continue;
      argv_.push_back(args[i]);
    }
  }

  std::string input(const std::string& path) {
    std::string bytes = read_file(path);
    inputs_.push_back({{"path", path}, {"digest", digest(bytes)}});
    return bytes;
  }

  void output(const std::string& path) { outputs_.push_back(path); }
  void seed(std::uint64_t s) { seed_ = s; }
  ojson& params() { return params_; }

  ojson to_json() const {
    ojson m;
    m["command"] = command_;
    m["version"] = std::string(kVersion);
    m["build"] = std::string(kBuildHash);
    if (seed_) m["seed"] = *seed_;
    m["cwd"] = fs::current_path().string();
    m["argv"] = argv_;
    m["inputs"] = inputs_.empty() ? ojson::array() : ojson(inputs_);
    m["params"] = params_.is_null() ? ojson::object() : params_;
    m["outputs"] = outputs_;
    return m;
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<ojson> inputs_;
  std::vector<std::string> outputs_;
  std::optional<std::uint64_t> seed_;
  ojson params_;
};

void emit(const ojson& doc, const std::string& path, std::ostream& out) {
  const std::string text = to_json_string(doc);
  if (path.empty())
    out << text;
  else
    write_file(path, text);
}

template <class T>
T parse_stream(const std::string& bytes, const std::string& source,
               T (*reader)(std::istream&, const std::string&)) {
  std::istringstream in(bytes);
  return reader(in, source);
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string predictions, truth, mask, out, mode = "holdout";
  int replicates = 50;
  std::uint64_t seed = 0;
  std::optional<int> target;
  std::vector<double> quantiles{0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};
  std::vector<std::int64_t> targets;
  std::optional<double> eps, eta;
};

void add_estimate(CLI::App& app, EstimateArgs& a) {
  app.add_option("--predictions", a.predictions, "prediction array file")->required();
  app.add_option("--truth", a.truth, "true labels file")->required();
  app.add_option("--mode", a.mode, "holdout or oob")->check(CLI::IsMember({"holdout", "oob"}));
  app.add_option("--mask", a.mask, "oob mask file (oob mode)");
  app.add_option("--B,--replicates", a.replicates, "bootstrap replicates (>= 2)");
  app.add_option("--seed", a.seed);
  app.add_option("--class", a.target, "class-wise error for this label");
  app.add_option("--quantiles", a.quantiles, "centered quantile levels")->delimiter(',');
  app.add_option("--targets", a.targets, "ensemble sizes to extrapolate to")->delimiter(',');
  app.add_option("--eps", a.eps, "tolerance on 3 sigma");
  app.add_option("--eta", a.eta, "relative tolerance sigma <= eta * err");
  app.add_option("--out", a.out, "report path (default stdout)");
}

int cmd_estimate(const EstimateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.replicates < 2) throw ConfigError("--B must be at least 2");
  if (a.eps && !(*a.eps > 0)) throw ConfigError("--eps must be positive");
  if (a.eta && !(*a.eta > 0 && *a.eta < 1)) throw ConfigError("--eta must lie in (0, 1)");
  const Mode mode = parse_mode(a.mode);
  if (mode == Mode::oob && a.mask.empty()) throw ConfigError("--mode oob requires --mask");
  if (mode == Mode::holdout && !a.mask.empty())
    throw ConfigError("--mask is only meaningful with --mode oob");
  for (double p : a.quantiles)
    if (!(p > 0 && p < 1)) throw ConfigError("quantile levels must lie in (0, 1)");
  for (auto t : a.targets)
    if (t < 1) throw ConfigError("--targets must be positive");

  Manifest manifest("estimate", args);
  manifest.seed(a.seed);
  const PredictionArray array =
      parse_stream(manifest.input(a.predictions), a.predictions, &read_prediction_array);
  const TruthLabels truth = parse_stream(manifest.input(a.truth), a.truth, &read_truth);
  std::optional<OobMask> mask;
  if (!a.mask.empty()) mask = parse_stream(manifest.input(a.mask), a.mask, &read_oob_mask);
  const OobMask* mask_ptr = mask ? &*mask : nullptr;

  BootstrapConfig config;
  config.replicates = a.replicates;
  config.seed = a.seed;
  config.mode = mode;
  if (a.target) config.target_class = static_cast<Label>(*a.target);

  const double err_hat =
      tally_errors(array, truth, mask_ptr,
                   a.target ? std::optional<Label>(static_cast<Label>(*a.target)) : std::nullopt)
          .rate();
  const SigmaEstimate est = estimate_sigma(array, truth, mask_ptr, config);

  if (!a.out.empty()) manifest.output(a.out);
  ojson& params = manifest.params();
  params["mode"] = a.mode;
  params["B"] = a.replicates;
  params["class"] = a.target ? ojson(*a.target) : ojson(nullptr);
  params["quantiles"] = a.quantiles;
  params["targets"] = a.targets;
  params["eps"] = a.eps ? ojson(*a.eps) : ojson(nullptr);
  params["eta"] = a.eta ? ojson(*a.eta) : ojson(nullptr);

  ojson report;
  report["t"] = array.trees();
  report["m"] = array.points();
  report["k"] = array.classes();
  report["mode"] = a.mode;
  report["class"] = a.target ? ojson(*a.target) : ojson(nullptr);
  report["B"] = a.replicates;
  report["seed"] = a.seed;
  report["err_hat"] = err_hat;
  report["sigma_hat"] = est.sigma_hat;
  report["sigma_iqr"] = a.replicates >= 4 ? ojson(sigma_from_iqr(est.replicates)) : ojson(nullptr);
  report["three_sigma"] = 3 * est.sigma_hat;
  report["replicates"] = to_array(est.replicates);
  ojson quantiles = ojson::object();
  const auto q = centered_quantiles(est.replicates, a.quantiles);
  for (std::size_t i = 0; i < q.size(); ++i) quantiles[short_real(a.quantiles[i])] = q[i];
  report["centered_quantiles"] = std::move(quantiles);

  ojson extrapolation;
  extrapolation["t0"] = array.trees();
  ojson targets = ojson::array();
  for (auto t : a.targets) {
    const double s = extrapolate_sigma(est.sigma_hat, array.trees(), t);
    targets.push_back({{"t", t}, {"sigma", s}, {"three_sigma", 3 * s}});
  }
  extrapolation["targets"] = std::move(targets);
  report["extrapolation"] = std::move(extrapolation);
  if (a.eps) {
    report["tolerance"] = {
        {"eps", *a.eps},
        {"converged", 3 * est.sigma_hat <= *a.eps},
        {"min_trees", min_trees_for_tolerance(est.sigma_hat, array.trees(), *a.eps)}};
  }
  if (a.eta) {
    report["relative"] = {{"eta", *a.eta},
                          {"converged", relative_stopping(est.sigma_hat, err_hat, *a.eta)}};
  }
  report["manifest"] = manifest.to_json();
  emit(report, a.out, out);
  return kExitOk;
}

// ------------------------------------------------------------- extrapolate

struct ExtrapolateArgs {
  double sigma0 = 0;
  std::int64_t t0 = 0;
  std::optional<std::int64_t> t;
  std::optional<double> eps;
  std::string out;
};

void add_extrapolate(CLI::App& app, ExtrapolateArgs& a) {
  app.add_option("--sigma0", a.sigma0, "sigma estimated at t0")->required();
  app.add_option("--t0", a.t0, "ensemble size of the estimate")->required();
  app.add_option("--t", a.t, "target ensemble size");
  app.add_option("--eps", a.eps, "tolerance on 3 sigma");
  app.add_option("--out", a.out);
}

int cmd_extrapolate(const ExtrapolateArgs& a, const std::vector<std::string>& args,
                    std::ostream& out) {
  if (!a.t && !a.eps) throw ConfigError("give --t or --eps");
  if (!(a.sigma0 >= 0) || !std::isfinite(a.sigma0)) throw ConfigError("--sigma0 must be >= 0");
  if (a.t0 < 1) throw ConfigError("--t0 must be positive");
  if (a.t && *a.t < 1) throw ConfigError("--t must be positive");
  if (a.eps && !(*a.eps > 0)) throw ConfigError("--eps must be positive");

  Manifest manifest("extrapolate", args);
  if (!a.out.empty()) manifest.output(a.out);
  ojson report;
  report["sigma0"] = a.sigma0;
  report["t0"] = a.t0;
  if (a.t) {
    const double s = extrapolate_sigma(a.sigma0, a.t0, *a.t);
    report["t"] = *a.t;
    report["sigma"] = s;
    report["three_sigma"] = 3 * s;
  }
  if (a.eps) {
    report["eps"] = *a.eps;
    report["min_trees"] = min_trees_for_tolerance(a.sigma0, a.t0, *a.eps);
  }
  report["manifest"] = manifest.to_json();
  emit(report, a.out, out);
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data, out_dir;
  std::size_t trees = 100;
  TreeParams params;
  std::uint64_t seed = 0;
  double holdout_frac = 0;
};

void add_train(CLI::App& app, TrainArgs& a) {
  app.add_option("--data", a.data, "CSV dataset; last column is the label")->required();
  app.add_option("--trees", a.trees)->check(CLI::PositiveNumber);
  app.add_option("--depth", a.params.max_depth)->check(CLI::NonNegativeNumber);
  app.add_option("--mtry", a.params.mtry, "features per split (0 = ceil(sqrt(p)))");
  app.add_option("--min-leaf", a.params.min_leaf)->check(CLI::PositiveNumber);
  app.add_option("--seed", a.seed);
  app.add_option("--holdout-frac", a.holdout_frac)->check(CLI::Range(0.0, 1.0));
  app.add_option("--out-dir", a.out_dir)->required();
}

int cmd_train(const TrainArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (!(a.holdout_frac < 1)) throw ConfigError("--holdout-frac must be below 1");
  if (a.params.mtry < 0) throw ConfigError("--mtry must be >= 0");

  Manifest manifest("train", args);
  manifest.seed(a.seed);
  Dataset data = parse_stream(manifest.input(a.data), a.data, &read_dataset_csv);
  data.validate();
  if (a.params.mtry > data.dims())
    throw ConfigError("--mtry exceeds the number of features");

  const auto n = static_cast<std::size_t>(data.rows());
  const auto n_holdout = static_cast<std::size_t>(std::llround(a.holdout_frac * double(n)));
  if (n_holdout >= n) throw ConfigError("hold-out split leaves no training rows");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (n_holdout > 0) {
    Rng rng = make_rng(splitmix64(a.seed ^ 0x686f6c646f7574ULL), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
  }
  std::vector<Eigen::Index> holdout_rows(order.begin(), order.begin() + n_holdout);
  std::vector<Eigen::Index> train_rows(order.begin() + n_holdout, order.end());
  std::sort(holdout_rows.begin(), holdout_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  Dataset train = data.subset(train_rows);
  train.classes = data.classes;
  const TrainedEnsemble fit = train_ensemble(train, a.trees, a.params, a.seed);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::map<std::string, std::string> files;
  auto put = [&](const std::string& name, const std::string& contents) {
    files[name] = contents;
    write_file(dir / name, contents);
    manifest.output((dir / name).string());
  };
  auto render = [](auto writer, const auto& value) {
    std::ostringstream s;
    writer(s, value);
    return s.str();
  };

  put("oob.pred", render(&write_prediction_array, predict_array(fit.ensemble, train.features)));
  put("oob.mask", render(&write_oob_mask, fit.oob));
  put("oob.truth", render(&write_truth, train.labels));
  if (n_holdout > 0) {
    const Dataset held = data.subset(holdout_rows);
    put("holdout.pred", render(&write_prediction_array, predict_array(fit.ensemble, held.features)));
    put("holdout.truth", render(&write_truth, held.labels));
  }

  ojson meta;
  meta["seed"] = a.seed;
  meta["trees"] = a.trees;
  meta["classes"] = data.classes;
  meta["dims"] = data.dims();
  meta["train_rows"] = train_rows.size();
  meta["holdout_rows"] = holdout_rows.size();
  meta["params"] = {{"max_depth", a.params.max_depth},
                    {"min_leaf", a.params.min_leaf},
                    {"mtry", a.params.resolved_mtry(data.dims())}};
  ojson trees = ojson::array();
  for (std::size_t i = 0; i < fit.ensemble.size(); ++i) {
    trees.push_back({{"bag_hash", hex64(bag_hash(fit.ensemble.bags[i]))},
                     {"depth", fit.ensemble.trees[i].depth()},
                     {"nodes", fit.ensemble.trees[i].nodes().size()}});
  }
  meta["per_tree"] = std::move(trees);
  put("ensemble.json", to_json_string(meta));

  ojson& params = manifest.params();
  params["trees"] = a.trees;
  params["max_depth"] = a.params.max_depth;
  params["min_leaf"] = a.params.min_leaf;
  params["mtry"] = a.params.resolved_mtry(data.dims());
  params["holdout_frac"] = a.holdout_frac;

  ojson m = manifest.to_json();
  ojson digests = ojson::object();
  for (const auto& [name, contents] : files) digests[name] = digest(contents);
  m["output_digests"] = std::move(digests);
  write_file(dir / "manifest.json", to_json_string(m));

  ojson summary;
  summary["out_dir"] = a.out_dir;
  summary["files"] = ojson::array();
  for (const auto& [name, contents] : files) summary["files"].push_back(name);
  out << to_json_string(summary);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string kind, model, out, summary;
  std::size_t t = 0;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  bool identical_runs = false;
  int replicates = 50;
  std::size_t test_points = 20'000;
  std::size_t mc_points = 1'000'000;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  app.add_option("kind", a.kind, "paths | sigma | clt | bootstrap-check")
      ->required()
      ->check(CLI::IsMember({"paths", "sigma", "clt", "bootstrap-check"}));
  app.add_option("--model", a.model, "model spec JSON")->required();
  app.add_option("--t", a.t, "ensemble size")->required()->check(CLI::PositiveNumber);
  app.add_option("--runs", a.runs, "independent ensembles")->check(CLI::PositiveNumber);
  app.add_option("--seed", a.seed);
  app.add_flag("--identical-runs", a.identical_runs, "every run reuses the first substream");
  app.add_option("--B,--replicates", a.replicates, "bootstrap replicates (bootstrap-check)");
  app.add_option("--test-points", a.test_points, "Monte Carlo test points per run when k > 2")
      ->check(CLI::PositiveNumber);
  app.add_option("--mc-points", a.mc_points, "test points for err_infinity when k > 2")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", a.out, "CSV output path");
  app.add_option("--summary", a.summary, "JSON summary path (default stdout)");
}

std::string csv_real(double v) { return format_real(v); }

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("simulate", args);
  manifest.seed(a.seed);
  const std::string spec_text = manifest.input(a.model);
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(spec_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(a.model, 0, e.byte, "invalid JSON");
  }
  const FirstOrderModel model = model_from_json(spec);

  SimulationOptions options;
  options.identical_runs = a.identical_runs;
  options.test_points = a.test_points;
  MonteCarloOptions mc;
  mc.test_points = a.mc_points;
  mc.seed = derive_seed(a.seed, 0x6d63ULL);

  ojson summary;
  summary["kind"] = a.kind;
  summary["t"] = a.t;
  summary["runs"] = a.runs;
  summary["seed"] = a.seed;
  summary["model"] = model_to_json(model);
  summary["warnings"] = model.assumption_warnings();
  std::string csv;
  const double td = static_cast<double>(a.t);

  if (a.kind == "paths") {
    const Eigen::MatrixXd paths = simulate_err_paths(model, a.t, a.runs, a.seed, options);
    csv = "run,t,err_t\n";
    for (Eigen::Index r = 0; r < paths.rows(); ++r)
      for (Eigen::Index s = 0; s < paths.cols(); ++s)
        csv += std::to_string(r) + ',' + std::to_string(s + 1) + ',' + csv_real(paths(r, s)) + '\n';
    const Eigen::VectorXd last = paths.col(paths.cols() - 1);
    summary["err_t_mean"] = last.mean();
    summary["err_t_sd"] = a.runs >= 2 ? ojson(sigma_hat(last)) : ojson(nullptr);
  } else if (a.kind == "sigma") {
    if (a.runs < 2) throw ConfigError("sigma needs --runs >= 2");
    const Eigen::VectorXd curve = ground_truth_sigma_curve(model, a.t, a.runs, a.seed, options);
    csv = "t,sigma_t\n";
    for (Eigen::Index s = 0; s < curve.size(); ++s)
      csv += std::to_string(s + 1) + ',' + csv_real(curve[s]) + '\n';
    summary["sigma_t"] = curve[curve.size() - 1];
  } else if (a.kind == "clt") {
    const double e_inf = err_infinity(model, mc);
    const Eigen::VectorXd err = simulate_err_t(model, a.t, a.runs, a.seed, options);
    const Eigen::VectorXd scaled = (err.array() - e_inf) * std::sqrt(td);
    csv = "run,err_t,scaled\n";
    for (Eigen::Index r = 0; r < err.size(); ++r)
      csv += std::to_string(r) + ',' + csv_real(err[r]) + ',' + csv_real(scaled[r]) + '\n';
    summary["err_infinity"] = e_inf;
    summary["scaled_mean"] = scaled.mean();
    summary["scaled_variance"] = a.runs >= 2 ? ojson(std::pow(sigma_hat(scaled), 2)) : ojson(nullptr);
    if (model.classes() == 2) {
      const double d = model.pi()[1] * model.theta_pdf(1, 0.5) - model.pi()[0] * model.theta_pdf(0, 0.5);
      summary["limit_variance"] = 0.25 * d * d;
    }
    if (a.runs >= 8) {
      const std::vector<double> v(scaled.data(), scaled.data() + scaled.size());
      try {
        const NormalityDiagnostics nd = normality_diagnostics(v);
        summary["normality"] = {{"n", nd.n},
                                {"mean", nd.mean},
                                {"sd", nd.sd},
                                {"ks_stat", nd.ks_stat},
                                {"skewness", nd.skewness},
                                {"excess_kurtosis", nd.excess_kurtosis}};
      } catch (const DomainError&) {
        summary["normality"] = nullptr;
      }
    }
  } else {
    if (model.classes() != 2) throw DomainError("bootstrap-check needs a two-class model");
    if (a.replicates < 2) throw ConfigError("--B must be at least 2");
    if (a.runs < 2) throw ConfigError("bootstrap-check needs --runs >= 2");
    Eigen::VectorXd err(static_cast<Eigen::Index>(a.runs));
    Eigen::VectorXd sig(static_cast<Eigen::Index>(a.runs));
    parallel_for(a.runs, [&](std::size_t r) {
      const std::size_t stream = a.identical_runs ? 0 : r;
      Rng rng = make_rng(a.seed, stream);
      const std::vector<double> u = draw_uniforms(a.t, rng);
      const auto i = static_cast<Eigen::Index>(r);
      err[i] = exact_err_t_binary(model, u);
      sig[i] = sigma_hat(idealized_bootstrap_replicates(
          model, u, a.replicates, derive_seed(a.seed ^ 0x626f6f74ULL, stream)));
    });
    csv = "run,err_t,sigma_hat\n";
    for (Eigen::Index r = 0; r < err.size(); ++r)
      csv += std::to_string(r) + ',' + csv_real(err[r]) + ',' + csv_real(sig[r]) + '\n';
    const double truth = sigma_hat(err);
    summary["B"] = a.replicates;
    summary["mean_sigma_hat"] = sig.mean();
    summary["ground_truth_sigma"] = truth;
    summary["relative_error"] = truth > 0 ? ojson(sig.mean() / truth - 1) : ojson(nullptr);
  }

  if (!a.out.empty()) {
    write_file(a.out, csv);
    manifest.output(a.out);
    summary["csv_digest"] = digest(csv);
  }
  if (!a.summary.empty()) manifest.output(a.summary);
  ojson& params = manifest.params();
  params["kind"] = a.kind;
  params["t"] = a.t;
  params["runs"] = a.runs;
  params["identical_runs"] = a.identical_runs;
  params["B"] = a.replicates;
  params["test_points"] = a.test_points;
  params["mc_points"] = a.mc_points;
  summary["manifest"] = manifest.to_json();
  emit(summary, a.summary, out);
  return kExitOk;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string kind, out;
  std::size_t n_per_class = 1000;
  int dims = 25;
  std::uint64_t seed = 0;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  app.add_option("kind", a.kind, "continuous | discrete")
      ->required()
      ->check(CLI::IsMember({"continuous", "discrete"}));
  app.add_option("--n-per-class", a.n_per_class)->check(CLI::PositiveNumber);
  app.add_option("--dims", a.dims, "feature count (continuous)");
  app.add_option("--seed", a.seed);
  app.add_option("--out", a.out, "CSV path")->required();
}

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("generate", args);
  manifest.seed(a.seed);
  const Dataset data = a.kind == "continuous" ? gen_synthetic_continuous(a.n_per_class, a.dims, a.seed)
                                              : gen_synthetic_discrete(a.n_per_class, a.seed);
  std::ostringstream csv;
  write_dataset_csv(csv, data);
  write_file(a.out, csv.str());
  manifest.output(a.out);
  manifest.params()["kind"] = a.kind;
  manifest.params()["n_per_class"] = a.n_per_class;
  manifest.params()["dims"] = data.dims();
  ojson summary;
  summary["rows"] = data.rows();
  summary["dims"] = data.dims();
  summary["digest"] = digest(csv.str());
  summary["manifest"] = manifest.to_json();
  out << to_json_string(summary);
  return kExitOk;
}

// ------------------------------------------------------------------ replay

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  const std::string original = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(original);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.byte, "invalid JSON");
  }
  const nlohmann::json& m = doc.contains("manifest") ? doc.at("manifest") : doc;
  std::vector<std::string> argv;
  std::string cwd;
  std::vector<std::string> outputs;
  try {
    argv = m.at("argv").get<std::vector<std::string>>();
    cwd = m.at("cwd").get<std::string>();
    outputs = m.at("outputs").get<std::vector<std::string>>();
    if (m.at("version").get<std::string>() != kVersion)
      err << "warning: manifest written by version " << m.at("version").get<std::string>() << '\n';
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, 0, std::string("not a run manifest: ") + e.what());
  }
  if (argv.empty() || argv.front() == "replay") throw ParseError(path, 0, 0, "nothing to replay");

  struct CwdGuard {
    fs::path saved = fs::current_path();
    ~CwdGuard() {
      std::error_code ec;
      fs::current_path(saved, ec);
    }
  } guard;
  fs::current_path(cwd);

  for (const auto& input : m.at("inputs")) {
    const std::string file = input.at("path").get<std::string>();
    if (digest(read_file(file)) != input.at("digest").get<std::string>())
      throw Error(file + ": contents differ from the manifest");
  }
  std::map<std::string, std::optional<std::string>> before;
  for (const auto& o : outputs) {
    std::error_code ec;
    before[o] = fs::exists(o, ec) ? std::optional<std::string>(read_file(o)) : std::nullopt;
  }

  std::ostringstream captured;
  const int code = run_cli(argv, captured, err);
  if (code != kExitOk) return code;

  ojson report;
  report["command"] = argv.front();
  report["inputs_verified"] = true;
  bool all_same = true;
  ojson checks = ojson::array();
  for (const auto& o : outputs) {
    const bool same = before[o] && *before[o] == read_file(o);
    all_same = all_same && same;
    checks.push_back({{"path", o}, {"identical", same}});
  }
  // A report printed to stdout is compared against the manifest file itself.
  if (doc.contains("manifest") && outputs.empty() && !captured.str().empty()) {
    const bool same = captured.str() == original;
    all_same = all_same && same;
    checks.push_back({{"path", path}, {"identical", same}});
  }
  report["outputs"] = std::move(checks);
  report["reproduced"] = all_same;
  out << to_json_string(report);
  return all_same ? kExitOk : kExitNumeric;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const DomainError*>(&e)) return kExitNumeric;
  return kExitData;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble convergence: bootstrap estimates of the error variance of voting ensembles",
               "ensconv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ensconv ") + kVersion + " (" + kBuildHash + ")");
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");

  EstimateArgs estimate;
  ExtrapolateArgs extrapolate;
  TrainArgs train;
  SimulateArgs simulate;
  GenerateArgs generate;
  std::string manifest_path;

  auto* c_estimate = app.add_subcommand("estimate", "bootstrap sigma_t from a prediction array");
  add_estimate(*c_estimate, estimate);
  auto* c_extrapolate = app.add_subcommand("extrapolate", "scale sigma to another ensemble size");
  add_extrapolate(*c_extrapolate, extrapolate);
  auto* c_train = app.add_subcommand("train", "train a bagged ensemble and write its arrays");
  add_train(*c_train, train);
  auto* c_simulate = app.add_subcommand("simulate", "first-order model simulations");
  add_simulate(*c_simulate, simulate);
  auto* c_generate = app.add_subcommand("generate", "write a synthetic two-class dataset");
  add_generate(*c_generate, generate);
  auto* c_replay = app.add_subcommand("replay", "rerun a command from its manifest");
  c_replay->add_option("--manifest", manifest_path, "manifest or report JSON")->required();
  for (auto* sub : {c_estimate, c_extrapolate, c_train, c_simulate, c_generate, c_replay})
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  struct ThreadGuard {
    ~ThreadGuard() { set_thread_count(0); }
  } thread_guard;
  if (threads > 0) set_thread_count(threads);

  try {
    if (*c_estimate) return cmd_estimate(estimate, args, out);
    if (*c_extrapolate) return cmd_extrapolate(extrapolate, args, out);
    if (*c_train) return cmd_train(train, args, out);
    if (*c_simulate) return cmd_simulate(simulate, args, out);
    if (*c_generate) return cmd_generate(generate, args, out);
    return cmd_replay(manifest_path, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return classify(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace ensconv
