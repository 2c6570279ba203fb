// gshap: command-line front end for exact group and feature Shapley values
// under Gaussian feature models, and for the grouped-vs-post-grouped
// simulation study.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "gshap/gshap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

template <typename Json = json>
Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gshap::ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const json::parse_error& e) {
    throw gshap::ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gshap::Error("cannot write '" + path.string() + "'");
  out << text;
}

/// {"mean": [...], "covariance": [[...]]} or {"design": {...}} against the
/// partition.
gshap::GaussianModel distribution_from_json(const json& doc,
                                            const gshap::FeaturePartition& partition,
                                            gshap::RepairPolicy repair) {
  try {
    if (doc.contains("design")) {
      const auto& d = doc.at("design");
      gshap::CorrelationDesign design{d.value("within_rho", 0.0), d.value("between_rho", 0.0),
                                      d.value("variance", 1.0), partition};
      return gshap::build_covariance(design, repair);
    }
    const auto mean = doc.at("mean").get<std::vector<double>>();
    const auto cov = doc.at("covariance").get<std::vector<std::vector<double>>>();
    const auto m = static_cast<Eigen::Index>(mean.size());
    if (static_cast<Eigen::Index>(cov.size()) != m) {
      throw gshap::ValidationError("covariance has " + std::to_string(cov.size()) +
                                   " rows, mean has " + std::to_string(mean.size()) +
                                   " entries");
    }
    gshap::Vector mu(m);
    gshap::Matrix sigma(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      mu(i) = mean[static_cast<std::size_t>(i)];
      const auto& row = cov[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != m) {
        throw gshap::ValidationError("covariance row " + std::to_string(i) + " has " +
                                     std::to_string(row.size()) + " entries");
      }
      for (Eigen::Index j = 0; j < m; ++j) sigma(i, j) = row[static_cast<std::size_t>(j)];
    }
    if (repair == gshap::RepairPolicy::kNearestPsd) {
      const auto sp = gshap::spectrum(0.5 * (sigma + sigma.transpose()));
      if (!(sp.min_eigenvalue > gshap::kPdRelativeTolerance * sp.max_eigenvalue)) {
        gshap::Matrix fixed = gshap::nearest_psd(0.5 * (sigma + sigma.transpose()));
        const double dist = (fixed - sigma).norm();
        gshap::GaussianModel g(mu, fixed);
        g.set_repair_distance(dist);
        return g;
      }
    }
    return gshap::GaussianModel(mu, sigma);
  } catch (const json::exception& e) {
    throw gshap::ValidationError(std::string("malformed distribution spec: ") + e.what());
  }
}

ordered_json config_to_json(const gshap::ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = c.experiment;
  j["models"] = json::array();
  for (auto id : c.models) j["models"].push_back(std::string(gshap::model_name(id)));
  j["grouping"] = std::string(1, gshap::grouping_letter(c.grouping));
  j["rho_grid"] = c.rho_grid;
  j["within_rho"] = c.within_rho ? json(*c.within_rho) : json(nullptr);
  j["n_test"] = c.n_test;
  j["mc_samples"] = c.mc_samples;
  j["estimator"] = std::string(gshap::estimator_kind_name(c.estimator));
  j["seed"] = c.seed;
  j["n_std"] = c.n_std;
  j["repair_psd"] = c.repair == gshap::RepairPolicy::kNearestPsd;
  j["whiskers"] = "tukey-1.5iqr";
  return j;
}

gshap::ExperimentConfig config_from_json(const json& j) {
  try {
    gshap::ExperimentConfig c = gshap::default_config(
        j.at("experiment").get<int>(), gshap::parse_grouping(j.at("grouping").get<std::string>()));
    c.models.clear();
    for (const auto& m : j.at("models")) c.models.push_back(gshap::parse_model_id(m.get<std::string>()));
    c.rho_grid = j.at("rho_grid").get<std::vector<double>>();
    c.within_rho = j.at("within_rho").is_null() ? std::nullopt
                                                : std::optional<double>(j.at("within_rho").get<double>());
    c.n_test = j.at("n_test").get<int>();
    c.mc_samples = j.at("mc_samples").get<Eigen::Index>();
    c.estimator = gshap::parse_estimator_kind(j.at("estimator").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.n_std = j.at("n_std").get<Eigen::Index>();
    c.repair = j.value("repair_psd", false) ? gshap::RepairPolicy::kNearestPsd
                                            : gshap::RepairPolicy::kReject;
    return c;
  } catch (const json::exception& e) {
    throw gshap::ValidationError(std::string("malformed manifest config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string model_path, dist_path, partition_path, instances_path, out_path;
  std::string estimator = "analytic";
  std::string method = "group";
  Eigen::Index mc_samples = 1000;
  std::uint64_t seed = 0;
  int threads = gshap::default_thread_count();
  int max_players = gshap::kDefaultPlayerCap;
  bool repair = false;
};

int cmd_explain(const ExplainArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto partition = gshap::partition_from_json(read_json_file<ordered_json>(a.partition_path));
  const auto repair = a.repair ? gshap::RepairPolicy::kNearestPsd : gshap::RepairPolicy::kReject;
  const auto dist = distribution_from_json(read_json_file(a.dist_path), partition, repair);
  if (dist.dimension() != partition.feature_count()) {
    throw gshap::ValidationError("distribution has " + std::to_string(dist.dimension()) +
                                 " features, partition has " +
                                 std::to_string(partition.feature_count()));
  }
  const auto model = gshap::model_from_json(read_json_file(a.model_path), dist.dimension());
  const auto kind = gshap::parse_estimator_kind(a.estimator);
  if (a.method != "group" && a.method != "post" && a.method != "feature" &&
      a.method != "theorem22") {
    throw gshap::ValidationError("method must be group, post, feature or theorem22");
  }
  if (a.mc_samples < 1) throw gshap::ValidationError("--mc-samples must be positive");

  std::ifstream in(a.instances_path);
  if (!in) throw gshap::ValidationError("cannot open '" + a.instances_path + "'");
  const auto rows = gshap::csv::read_numeric(in);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != dist.dimension()) {
      throw gshap::ValidationError("instance row " + std::to_string(r) + " has " +
                                   std::to_string(rows[r].size()) + " values, expected " +
                                   std::to_string(dist.dimension()));
    }
  }

  const gshap::ExplainOptions opt{a.max_players};
  std::vector<gshap::Explanation> out(rows.size());
  gshap::parallel_for(rows.size(), a.threads, [&](std::size_t r) {
    const gshap::Vector x = Eigen::Map<const gshap::Vector>(
        rows[r].data(), static_cast<Eigen::Index>(rows[r].size()));
    gshap::Estimator est = gshap::AnalyticEstimator{};
    if (kind == gshap::EstimatorKind::kMonteCarlo) {
      est = gshap::MonteCarloEstimator{a.mc_samples, a.seed, static_cast<std::uint64_t>(r)};
    }
    if (a.method == "theorem22") {
      out[r] = gshap::separable_group_values(model, dist, x, partition);
      return;
    }
    gshap::ContributionCache cache(model, dist, x, est);
    if (a.method == "group") {
      out[r] = gshap::group_shapley(cache, partition, opt);
    } else if (a.method == "post") {
      gshap::check_player_count(dist.dimension(), opt.player_cap);
      out[r] = gshap::post_grouped_shapley(cache, partition, opt);
    } else {
      gshap::check_player_count(dist.dimension(), opt.player_cap);
      out[r] = gshap::feature_shapley(cache, opt);
    }
  });

  using gshap::csv::format_double;
  std::ostringstream text;
  text << "instance,label,phi,base_value,predicted,efficiency_residual,mc_error_bound\n";
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto& e = out[r];
    for (std::size_t k = 0; k < e.phi.size(); ++k) {
      text << r << ',' << gshap::csv::quote(e.labels[k]) << ',' << format_double(e.phi[k])
           << ',' << format_double(e.base_value) << ',' << format_double(e.predicted) << ','
           << format_double(e.efficiency_residual) << ','
           << format_double(e.error_bound.empty() ? 0.0 : e.error_bound[k]) << '\n';
    }
  }
  if (a.out_path.empty()) {
    std::cout << text.str();
    return kExitOk;
  }
  write_file(a.out_path, text.str());
  ordered_json manifest;
  manifest["command"] = "explain";
  manifest["version"] = gshap::kVersion;
  manifest["config"] = {{"model", a.model_path},         {"dist", a.dist_path},
                        {"partition", a.partition_path}, {"instances", a.instances_path},
                        {"estimator", a.estimator},      {"method", a.method},
                        {"mc_samples", a.mc_samples},    {"max_players", a.max_players},
                        {"repair_psd", a.repair}};
  manifest["seed"] = a.seed;
  manifest["repairs"] = json::array();
  if (dist.repair_distance()) manifest["repairs"].push_back({{"frobenius_distance", *dist.repair_distance()}});
  manifest["timing_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["outputs"] = {a.out_path};
  write_file(a.out_path + ".manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  int experiment = 0;
  std::string grouping = "A";
  std::string estimator = "mc";
  std::vector<double> rho;
  std::optional<double> within_rho;
  std::vector<std::string> models;
  int n_test = 100;
  Eigen::Index mc_samples = 1000;
  Eigen::Index n_std = gshap::kDefaultStandardizeSamples;
  std::uint64_t seed = 0;
  int threads = gshap::default_thread_count();
  bool repair = false;
  bool strict = false;
  bool plot = false;
  std::string out_dir = ".";
  std::string prefix;
  std::string manifest_in;
};

int cmd_simulate(const SimulateArgs& a) {
  gshap::ExperimentConfig cfg;
  if (!a.manifest_in.empty()) {
    const auto m = read_json_file(a.manifest_in);
    if (m.value("command", "") != "simulate") {
      throw gshap::ValidationError("'" + a.manifest_in + "' is not a simulate manifest");
    }
    cfg = config_from_json(m.at("config"));
  } else {
    if (a.experiment < 1 || a.experiment > 3) {
      throw gshap::ValidationError("--experiment must be 1, 2 or 3");
    }
    cfg = gshap::default_config(a.experiment, gshap::parse_grouping(a.grouping));
    cfg.estimator = gshap::parse_estimator_kind(a.estimator);
    if (!a.rho.empty()) cfg.rho_grid = a.rho;
    if (a.within_rho) cfg.within_rho = a.within_rho;
    if (!a.models.empty()) {
      cfg.models.clear();
      for (const auto& m : a.models) cfg.models.push_back(gshap::parse_model_id(m));
    }
    cfg.n_test = a.n_test;
    cfg.mc_samples = a.mc_samples;
    cfg.n_std = a.n_std;
    cfg.seed = a.seed;
    cfg.repair = a.repair ? gshap::RepairPolicy::kNearestPsd : gshap::RepairPolicy::kReject;
  }
  cfg.threads = a.threads;

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = gshap::run_experiment(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto summaries = gshap::summarize(result.records);

  const std::string prefix =
      !a.prefix.empty() ? a.prefix
                        : "experiment" + std::to_string(cfg.experiment) + "_" +
                              gshap::grouping_letter(cfg.grouping);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const fs::path records_path = dir / (prefix + "_records.csv");
  const fs::path summary_path = dir / (prefix + "_summary.csv");
  const fs::path manifest_path = dir / (prefix + "_manifest.json");
  write_file(records_path, gshap::records_csv(result.records));
  write_file(summary_path, gshap::summary_csv(summaries));
  ordered_json outputs = {records_path.string(), summary_path.string()};
  if (a.plot) {
    const fs::path svg_path = dir / (prefix + ".svg");
    std::string title = "Experiment " + std::to_string(cfg.experiment) + ", grouping " +
                        gshap::grouping_letter(cfg.grouping) + ": MAD (log scale)";
    if (cfg.within_rho) title += ", within-group correlation " + gshap::csv::format_double(*cfg.within_rho);
    write_file(svg_path, gshap::render_boxplots(summaries, title));
    outputs.push_back(svg_path.string());
  }

  ordered_json manifest;
  manifest["command"] = "simulate";
  manifest["version"] = gshap::kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["seed"] = cfg.seed;
  manifest["threads"] = cfg.threads;
  manifest["repairs"] = json::array();
  for (const auto& r : result.repairs) {
    manifest["repairs"].push_back(
        {{"rho", r.rho}, {"within_rho", r.within_rho}, {"frobenius_distance", r.frobenius_distance}});
  }
  manifest["failures"] = json::array();
  for (const auto& f : result.failures) {
    manifest["failures"].push_back(
        {{"model", f.model}, {"rho", f.rho}, {"within_rho", f.within_rho}, {"message", f.message}});
    std::cerr << "warning: " << f.model << " at rho=" << f.rho << " (within " << f.within_rho
              << "): " << f.message << '\n';
  }
  manifest["timing_seconds"] = seconds;
  manifest["outputs"] = outputs;
  write_file(manifest_path, manifest.dump(2) + "\n");

  std::cerr << result.records.size() << " records, " << result.failures.size()
            << " failed grid points, " << seconds << " s\n";
  if (!result.failures.empty() && a.strict) return kExitRuntime;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(int trials, std::uint64_t seed, int instances,
               const std::vector<std::string>& models) {
  gshap::VerifyOptions opt;
  opt.trials = trials;
  opt.seed = seed;
  opt.instances = instances;
  for (const auto& m : models) opt.models.push_back(gshap::parse_model_id(m));
  if (trials < 0) throw gshap::ValidationError("--trials must be non-negative");
  const auto report = gshap::run_verification(opt);
  std::cout << report.text();
  return report.passed() ? kExitOk : kExitRuntime;
}

int cmd_plot(const std::string& summary_path, const std::string& out_path,
             const std::string& title) {
  std::ifstream in(summary_path);
  if (!in) throw gshap::ValidationError("cannot open '" + summary_path + "'");
  const auto summaries = gshap::summaries_from_csv(gshap::csv::read_table(in));
  write_file(out_path, gshap::render_boxplots(summaries, title));
  return kExitOk;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GSHAP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw gshap::ValidationError(std::string("GSHAP_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact group and feature Shapley values under Gaussian feature models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gshap::kVersion);

  std::uint64_t seed = 0;
  bool seed_given = false;

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Explain predictions for a set of instances");
  explain->add_option("--model", ex.model_path, "Model spec JSON")->required();
  explain->add_option("--dist", ex.dist_path, "Distribution spec JSON")->required();
  explain->add_option("--partition", ex.partition_path, "Partition spec JSON")->required();
  explain->add_option("--instances", ex.instances_path, "Instances CSV")->required();
  explain->add_option("--estimator", ex.estimator, "mc or analytic")->capture_default_str();
  explain->add_option("--method", ex.method, "group, post, feature or theorem22")
      ->capture_default_str();
  explain->add_option("--mc-samples", ex.mc_samples)->capture_default_str();
  explain->add_option("--seed", seed, "Master seed (default: $GSHAP_SEED or 0)");
  explain->add_option("--threads", ex.threads)->capture_default_str();
  explain->add_option("--max-players", ex.max_players, "Exact enumeration cap")
      ->capture_default_str();
  explain->add_flag("--repair-psd", ex.repair, "Project a non-PD covariance to the nearest PSD");
  explain->add_option("--out", ex.out_path, "Output CSV (default: stdout)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation experiment");
  simulate->add_option("--experiment", sim.experiment, "1, 2 or 3");
  simulate->add_option("--grouping", sim.grouping, "A or B")->capture_default_str();
  simulate->add_option("--estimator", sim.estimator, "mc or analytic")->capture_default_str();
  simulate->add_option("--rho", sim.rho, "Between-group correlation grid")->delimiter(',');
  simulate->add_option("--within-rho", sim.within_rho, "Fixed within-group correlation");
  simulate->add_option("--models", sim.models, "Subset of lm1..lm3, gam1..gam3")->delimiter(',');
  simulate->add_option("--n-test", sim.n_test)->capture_default_str();
  simulate->add_option("--mc-samples", sim.mc_samples)->capture_default_str();
  simulate->add_option("--n-std", sim.n_std, "Draws used to standardize each model")
      ->capture_default_str();
  simulate->add_option("--seed", seed, "Master seed (default: $GSHAP_SEED or 0)");
  simulate->add_option("--threads", sim.threads)->capture_default_str();
  simulate->add_flag("--repair-psd", sim.repair, "Repair non-PD covariances instead of failing");
  simulate->add_flag("--strict", sim.strict, "Exit nonzero when any grid point fails");
  simulate->add_flag("--plot", sim.plot, "Also write an SVG boxplot");
  simulate->add_option("--out-dir", sim.out_dir)->capture_default_str();
  simulate->add_option("--prefix", sim.prefix, "Output file prefix");
  simulate->add_option("--manifest", sim.manifest_in, "Replay the config of a manifest");

  int trials = 200, instances = 20;
  std::vector<std::string> verify_models;
  auto* verify = app.add_subcommand("verify", "Check the separable-group identities");
  verify->add_option("--trials", trials, "Randomized trials per case")->capture_default_str();
  verify->add_option("--seed", seed, "Master seed (default: $GSHAP_SEED or 0)");
  verify->add_option("--instances", instances, "Instances per benchmark-model case")
      ->capture_default_str();
  verify->add_option("--model", verify_models, "Restrict to these models");

  std::string summary_path, svg_path, title = "MAD (log scale)";
  auto* plot = app.add_subcommand("plot", "Render a summary CSV as SVG boxplots");
  plot->add_option("--summary", summary_path)->required();
  plot->add_option("--out", svg_path)->required();
  plot->add_option("--title", title)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    for (auto* sub : {explain, simulate, verify}) {
      if (sub->parsed() && sub->count("--seed") > 0) seed_given = true;
    }
    if (!seed_given) seed = default_seed();
    if (explain->parsed()) {
      ex.seed = seed;
      return cmd_explain(ex);
    }
    if (simulate->parsed()) {
      sim.seed = seed;
      return cmd_simulate(sim);
    }
    if (verify->parsed()) return cmd_verify(trials, seed, instances, verify_models);
    if (plot->parsed()) return cmd_plot(summary_path, svg_path, title);
  } catch (const gshap::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
