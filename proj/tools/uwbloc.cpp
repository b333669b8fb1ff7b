// Command-line front end: synthesize link pools, fit density models, run
// Monte-Carlo sweeps and emit plot-ready data.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uwb/config.hpp"
#include "uwb/dataset.hpp"
#include "uwb/errors.hpp"
#include "uwb/estimators.hpp"
#include "uwb/model.hpp"
#include "uwb/montecarlo.hpp"
#include "uwb/report.hpp"
#include "uwb/synth.hpp"
#include "uwb/textio.hpp"

namespace fs = std::filesystem;
using namespace uwb;

namespace {

constexpr const char* kVersion = "uwbloc 0.1.0";

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool no_split = false;
};

Config load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return Config();
  return Config::parse_file(args.config_path);
}

SynthParams synth_params_from(const Config& cfg) {
  SynthParams p;
  p.t_wall = cfg.get_double("synth", "t_wall_m", p.t_wall);
  p.wall_refractive_index =
      cfg.get_double("synth", "wall_refractive_index", p.wall_refractive_index);
  p.incidence_angle_max =
      cfg.get_double("synth", "incidence_angle_max_rad", p.incidence_angle_max);
  p.gamma = cfg.get_double("synth", "gamma", p.gamma);
  p.sigma_n_sq = cfg.get_double("synth", "sigma_n_sq", p.sigma_n_sq);
  p.beta = cfg.get_double("synth", "beta", p.beta);
  p.multipath_decay = cfg.get_double("synth", "multipath_decay_s", p.multipath_decay);
  p.tap_rate = cfg.get_double("synth", "tap_rate_hz", p.tap_rate);
  p.tap_amp_scale = cfg.get_double("synth", "tap_amp_scale", p.tap_amp_scale);
  p.nlos_direct_atten_db =
      cfg.get_double("synth", "nlos_direct_atten_db", p.nlos_direct_atten_db);
  p.sample_rate = cfg.get_double("synth", "sample_rate_hz", p.sample_rate);
  p.duration = cfg.get_double("synth", "duration_s", p.duration);
  p.pulse_rise = cfg.get_double("synth", "pulse_rise_s", p.pulse_rise);
  p.sample_noise = cfg.get_double("synth", "sample_noise", p.sample_noise);
  p.rng_seed = cfg.get_u64("synth", "seed", p.rng_seed);
  return p;
}

FitOptions fit_options_from(const Config& cfg) {
  FitOptions f;
  f.bins_2d = cfg.get_int("fit", "bins_2d", f.bins_2d);
  f.bins_4d = cfg.get_int("fit", "bins_4d", f.bins_4d);
  f.refine_2d = cfg.get_int("fit", "refine_2d", f.refine_2d);
  f.refine_4d = cfg.get_int("fit", "refine_4d", f.refine_4d);
  f.window_fraction = cfg.get_double("fit", "window_fraction", f.window_fraction);
  f.poly_degree = cfg.get_int("fit", "poly_degree", f.poly_degree);
  f.bias_blur_sigma = cfg.get_double("fit", "bias_blur_sigma_s", f.bias_blur_sigma);
  return f;
}

double train_fraction_from(const Config& cfg) {
  const double f = cfg.get_double("fit", "train_fraction", 0.5);
  if (!(f > 0.0 && f < 1.0))
    throw ConfigError("fit.train_fraction must lie in (0,1)");
  return f;
}

// Leading slice trains the models, the rest feeds the trials; --no-split
// hands the whole pool to both.
enum class Slice { kTrain, kEval, kAll };

std::vector<LinkObservation> slice_pool(std::vector<LinkObservation> pool,
                                        Slice slice, double train_fraction) {
  if (slice == Slice::kAll) return pool;
  const std::size_t cut = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(pool.size())));
  if (slice == Slice::kTrain)
    return std::vector<LinkObservation>(pool.begin(), pool.begin() + cut);
  return std::vector<LinkObservation>(pool.begin() + cut, pool.end());
}

std::vector<LinkObservation> load_pool(const fs::path& dir, const char* name,
                                       Slice slice, double train_fraction) {
  auto pool = read_dataset(dir / name);
  pool = slice_pool(std::move(pool), slice, train_fraction);
  if (pool.empty())
    throw DataError(std::string("pool '") + name + "' is empty after the "
                    "train/eval split; synthesize more links or use --no-split");
  return pool;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  std::ofstream out(out_dir / "manifest.txt");
  if (!out) throw DataError("cannot write manifest in '" + out_dir.string() + "'");
  for (const auto& [section, keys] : cfg.sections()) {
    if (section == "manifest") continue;
    out << '[' << section << "]\n";
    for (const auto& [k, v] : keys) out << k << " = " << v << '\n';
    out << '\n';
  }
  out << "[manifest]\n";
  out << "version = " << kVersion << '\n';
  out << "command = " << command << '\n';
  out << "seed = " << seed << '\n';
  const auto now = std::chrono::system_clock::now();
  out << "unix_time = "
      << std::chrono::duration_cast<std::chrono::seconds>(
             now.time_since_epoch())
             .count()
      << '\n';
  for (const std::string& i : inputs) out << "input = " << i << '\n';
  for (const std::string& o : outputs) out << "output = " << o << '\n';
}

// ---------------------------------------------------------------------------

int cmd_synth(const CommonArgs& args) {
  Config cfg = load_config(args);
  SynthParams params = synth_params_from(cfg);
  if (args.seed) params.rng_seed = *args.seed;
  const int n_los = cfg.get_int("synth", "n_los", 2000);
  const int n_nlos = cfg.get_int("synth", "n_nlos", 2000);
  const double d_min = cfg.get_double("synth", "d_min_m", 1.0);
  const double d_max = cfg.get_double("synth", "d_max_m", 5.0);
  cfg.check_consumed("synth");
  if (n_los < 0 || n_nlos < 0)
    throw ConfigError("synth.n_los / synth.n_nlos must be non-negative");
  if (!(d_min > 0.0) || !(d_max >= d_min))
    throw ConfigError("synth: need 0 < d_min_m <= d_max_m");
  validate(params);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  auto make_pool = [&](int count, ChannelState state, std::uint64_t stream) {
    Rng rng = make_stream(params.rng_seed, stream);
    std::uniform_real_distribution<double> dist(d_min, d_max);
    std::vector<LinkObservation> pool;
    pool.reserve(count);
    for (int i = 0; i < count; ++i)
      pool.push_back(synth_link(dist(rng), state, params, rng));
    return pool;
  };

  write_dataset(make_pool(n_los, ChannelState::kLos, 0), out / "los.dataset");
  write_dataset(make_pool(n_nlos, ChannelState::kNlos, 1), out / "nlos.dataset");
  write_manifest(out, "synth", cfg, params.rng_seed, {},
                 {"los.dataset", "nlos.dataset"});
  std::cout << (out / "los.dataset").string() << '\n'
            << (out / "nlos.dataset").string() << '\n';
  return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& data_dir,
            const std::string& kind_str, int dims, const std::string& param_str,
            bool fit_all) {
  Config cfg = load_config(args);
  const FitOptions opt = fit_options_from(cfg);
  const double train_fraction = train_fraction_from(cfg);
  cfg.check_consumed("fit");

  const Slice slice = args.no_split ? Slice::kAll : Slice::kTrain;
  const auto los = load_pool(data_dir, "los.dataset", slice, train_fraction);
  const auto nlos = load_pool(data_dir, "nlos.dataset", slice, train_fraction);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  struct Request {
    DensityKind kind;
    int dims;
    Parameterization param;
  };
  std::vector<Request> requests;
  if (fit_all) {
    requests = {{DensityKind::kSmooth, 2, Parameterization::kDistanceDependent},
                {DensityKind::kSmooth, 4, Parameterization::kDistanceDependent},
                {DensityKind::kSmooth, 2, Parameterization::kDistanceIndependent},
                {DensityKind::kPoly, 4, Parameterization::kDistanceDependent}};
  } else {
    if (dims != 2 && dims != 4) throw ConfigError("fit: --dims must be 2 or 4");
    requests.push_back({density_kind_from_string(kind_str), dims,
                        parameterization_from_string(param_str)});
  }

  std::vector<std::string> outputs;
  for (const Request& r : requests) {
    const ModelSet m = fit_model(los, nlos, r.kind, r.dims, r.param, opt);
    const std::string name = model_file_name(r.kind, r.dims, r.param);
    save_model(m, out / name);
    outputs.push_back(name);
    std::cout << (out / name).string() << '\n';
  }
  write_manifest(out, "fit", cfg, 0, {data_dir}, outputs);
  return 0;
}

struct SimulateArgs {
  std::string data_dir;
  std::string models_dir;
  std::optional<int> threads;
  std::optional<double> grid_step;
  std::string estimators;  // comma list, empty keeps the config/default set
};

int cmd_simulate(const CommonArgs& args, const SimulateArgs& sim) {
  Config cfg = load_config(args);
  ScenarioConfig sc;
  sc.n_anchors = cfg.get_int("simulate", "n_anchors", sc.n_anchors);
  sc.p_los_values = cfg.get_double_list("simulate", "p_los", sc.p_los_values);
  sc.trials = cfg.get_int("simulate", "trials", sc.trials);
  sc.grid_step = cfg.get_double("simulate", "grid_step_m", sc.grid_step);
  sc.grid_margin = cfg.get_double("simulate", "grid_margin_m", sc.grid_margin);
  sc.seed = cfg.get_u64("simulate", "seed", sc.seed);
  sc.threads = cfg.get_int("simulate", "threads", sc.threads);
  const double p_los_model = cfg.get_double("simulate", "p_los_model", 0.5);
  const std::string pe_str =
      cfg.get_string("simulate", "bias_point_estimate", "mean");
  std::vector<std::string> est_names = cfg.get_string_list(
      "simulate", "estimators", {});
  const bool cfg_no_split = cfg.get_bool("simulate", "no_split", false);
  const double train_fraction = train_fraction_from(cfg);
  cfg.check_consumed("simulate");

  if (args.seed) sc.seed = *args.seed;
  if (sim.threads) sc.threads = *sim.threads;
  if (sim.grid_step) sc.grid_step = *sim.grid_step;
  if (!sim.estimators.empty()) {
    est_names.clear();
    std::string item;
    std::istringstream ss(sim.estimators);
    while (std::getline(ss, item, ',')) est_names.push_back(item);
  }
  if (!est_names.empty()) {
    sc.estimators.clear();
    for (const std::string& n : est_names)
      sc.estimators.push_back(estimator_from_string(n));
  }
  BiasPointEstimate pe;
  if (pe_str == "mean") {
    pe = BiasPointEstimate::kPosteriorMean;
  } else if (pe_str == "map") {
    pe = BiasPointEstimate::kMap;
  } else {
    throw ConfigError("simulate.bias_point_estimate must be 'mean' or 'map'");
  }
  validate(sc);

  const bool no_split = args.no_split || cfg_no_split;
  const Slice slice = no_split ? Slice::kAll : Slice::kEval;
  Pools pools = Pools::from_observations(
      load_pool(sim.data_dir, "los.dataset", slice, train_fraction),
      load_pool(sim.data_dir, "nlos.dataset", slice, train_fraction));

  // Load only the models the selected estimators need.
  EstimatorBank::Models models;
  auto need = [&](EstimatorKind k) {
    return std::find(sc.estimators.begin(), sc.estimators.end(), k) !=
           sc.estimators.end();
  };
  auto load = [&](DensityKind kind, int dims, Parameterization param) {
    const fs::path path =
        fs::path(sim.models_dir) / model_file_name(kind, dims, param);
    if (!fs::exists(path))
      throw DataError("missing model file '" + path.string() +
                      "'; run 'uwbloc fit --all' first");
    return std::make_shared<const ModelSet>(load_model(path));
  };
  if (need(EstimatorKind::kMl2d) || need(EstimatorKind::kVe) ||
      need(EstimatorKind::kMl2dIt))
    models.smooth_2d_dd =
        load(DensityKind::kSmooth, 2, Parameterization::kDistanceDependent);
  if (need(EstimatorKind::kMl4d) || need(EstimatorKind::kMl4dIt))
    models.smooth_4d_dd =
        load(DensityKind::kSmooth, 4, Parameterization::kDistanceDependent);
  if (need(EstimatorKind::kMl2dId))
    models.smooth_2d_di =
        load(DensityKind::kSmooth, 2, Parameterization::kDistanceIndependent);
  if (need(EstimatorKind::kMl4dF))
    models.poly_4d_dd =
        load(DensityKind::kPoly, 4, Parameterization::kDistanceDependent);

  const EstimatorBank bank(models, p_los_model, pe);
  const ScenarioResult result = run_sweep(sc, pools, bank);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  write_rmse_csv(result, out / "rmse.csv");
  write_cdf_csv(result, out / "cdf.csv");
  write_manifest(out, "simulate", cfg, sc.seed,
                 {sim.data_dir, sim.models_dir}, {"rmse.csv", "cdf.csv"});
  std::cout << (out / "rmse.csv").string() << '\n'
            << (out / "cdf.csv").string() << '\n';
  return 0;
}

int cmd_report(const CommonArgs& args, const std::string& results_dir,
               const std::string& data_dir) {
  Config cfg = load_config(args);
  const double train_fraction = train_fraction_from(cfg);
  const fs::path results(results_dir);
  if (!fs::exists(results / "rmse.csv") || !fs::exists(results / "cdf.csv"))
    throw DataError("no results found in '" + results_dir + "'");

  const auto rmse_rows = read_rmse_csv(results / "rmse.csv");
  const auto cdf_rows = read_cdf_csv(results / "cdf.csv");
  if (rmse_rows.empty()) throw DataError("no results found in '" + results_dir + "'");

  const fs::path out = args.out_dir.empty() ? results : fs::path(args.out_dir);
  fs::create_directories(out);
  write_rmse_plot(rmse_rows, out / "rmse_vs_plos.dat");
  std::cout << (out / "rmse_vs_plos.dat").string() << '\n';
  for (const fs::path& p : write_cdf_plots(cdf_rows, out))
    std::cout << p.string() << '\n';

  if (!data_dir.empty()) {
    // Descriptive statistics over the full pools.
    const auto los = load_pool(data_dir, "los.dataset", Slice::kAll, train_fraction);
    const auto nlos = load_pool(data_dir, "nlos.dataset", Slice::kAll, train_fraction);
    std::vector<LinkObservation> all = los;
    all.insert(all.end(), nlos.begin(), nlos.end());
    const DIModelParams di = fit_di_model(all);
    const CorrelationReport rep = correlation_report(all, di);
    std::ofstream corr(out / "correlation.txt");
    if (!corr) throw DataError("cannot write correlation table");
    write_correlation_report(rep, corr);
    std::cout << (out / "correlation.txt").string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UWB TOA localization laboratory: synthetic link pools, joint "
               "bias/feature densities and NLOS-mitigating position "
               "estimators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs common;
  SimulateArgs sim;
  std::string data_dir, kind_str = "smooth", param_str = "dd";
  int dims = 2;
  bool fit_all = false;
  std::string results_dir;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", common.config_path,
                    "sectioned key = value configuration file");
    auto* out = sub->add_option("--out", common.out_dir, "output directory");
    if (out_required) out->required();
    sub->add_option("--seed", [&common](const std::vector<std::string>& v) {
      common.seed = std::stoull(v[0]);
      return true;
    }, "override the configured RNG seed");
    sub->add_flag("--no-split", common.no_split,
                  "use the full pools for both fitting and evaluation "
                  "instead of the default train/eval split");
  };

  CLI::App* synth = app.add_subcommand(
      "synth", "generate LOS and NLOS link pools (defaults: 2000 links each, "
               "distances 1-5 m, 32 cm wall, 110 ns records)");
  add_common(synth, true);

  CLI::App* fit = app.add_subcommand(
      "fit", "fit joint bias/feature densities on the training slice "
             "(histogram, spline+moving-average smoothing with a 1/15 "
             "window, or degree-8 polynomial)");
  add_common(fit, true);
  fit->add_option("--data", data_dir, "directory holding los.dataset / nlos.dataset")
      ->required();
  fit->add_option("--kind", kind_str, "hist | smooth | poly (default smooth)");
  fit->add_option("--dims", dims, "joint rank: 2 (bias, delay spread) or 4");
  fit->add_option("--param", param_str,
                  "dd (distance dependent) | di (distance independent)");
  fit->add_flag("--all", fit_all,
                "fit the standard set: smooth-2d-dd, smooth-4d-dd, "
                "smooth-2d-di, poly-4d-dd");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte-Carlo sweep over P_LOS (defaults: 3 anchors, 1000 "
                  "trials/point, 10 mm grid)");
  add_common(simulate, true);
  simulate->add_option("--data", sim.data_dir, "pool directory")->required();
  simulate->add_option("--models", sim.models_dir, "fitted model directory")
      ->required();
  simulate->add_option("--threads", [&sim](const std::vector<std::string>& v) {
    sim.threads = std::stoi(v[0]);
    return true;
  }, "worker thread cap (0 = hardware)");
  simulate->add_option("--grid-step", [&sim](const std::vector<std::string>& v) {
    sim.grid_step = std::stod(v[0]);
    return true;
  }, "search grid step in metres (default 0.01)");
  simulate->add_option("--estimators", sim.estimators,
                       "comma list among LS,VE,ML-2D,ML-4D,ML-2D-ID,ML-4D-F,"
                       "ML-2D-IT,ML-4D-IT");

  CLI::App* report = app.add_subcommand(
      "report", "turn sweep results into plot-ready series and, with --data, "
                "a bias/feature correlation table");
  add_common(report, false);
  report->add_option("--results", results_dir, "directory with rmse.csv/cdf.csv")
      ->required();
  report->add_option("--data", data_dir,
                     "pool directory for the correlation table");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(common);
    if (fit->parsed())
      return cmd_fit(common, data_dir, kind_str, dims, param_str, fit_all);
    if (simulate->parsed()) return cmd_simulate(common, sim);
    if (report->parsed()) return cmd_report(common, results_dir, data_dir);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
