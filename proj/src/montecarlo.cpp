#include "uwb/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

Pools Pools::from_observations(std::vector<LinkObservation> los,
                               std::vector<LinkObservation> nlos) {
  Pools p;
  p.los = std::move(los);
  p.nlos = std::move(nlos);
  p.los_features.reserve(p.los.size());
  for (const LinkObservation& o : p.los)
    p.los_features.push_back(extract_features(o.waveform, o.toa_est));
  p.nlos_features.reserve(p.nlos.size());
  for (const LinkObservation& o : p.nlos)
    p.nlos_features.push_back(extract_features(o.waveform, o.toa_est));
  return p;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.n_anchors < 3)
    throw ConfigError("scenario: need at least 3 anchors");
  if (cfg.trials < 1) throw ConfigError("scenario: trials must be positive");
  if (cfg.p_los_values.empty())
    throw ConfigError("scenario: no p_los values");
  for (double p : cfg.p_los_values)
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("scenario: p_los values must lie in [0,1]");
  if (cfg.estimators.empty())
    throw ConfigError("scenario: no estimators selected");
  if (!(cfg.grid_step > 0.0) || !(cfg.grid_margin >= 0.0))
    throw ConfigError("scenario: bad grid settings");
}

double SweepCell::rmse() const {
  if (errors.empty()) return 0.0;
  double acc = 0.0;
  for (double e : errors) acc += e * e;
  return std::sqrt(acc / static_cast<double>(errors.size()));
}

Scene build_scene(const ScenarioConfig& cfg, const Pools& pools, double p_los,
                  Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Scene scene;
  scene.links.resize(cfg.n_anchors);
  scene.states.resize(cfg.n_anchors);
  std::vector<Anchor> anchors(cfg.n_anchors);
  for (int i = 1; i <= cfg.n_anchors; ++i) {
    const bool is_los = u01(rng) < p_los;
    const auto& pool = is_los ? pools.los : pools.nlos;
    const auto& feats = is_los ? pools.los_features : pools.nlos_features;
    if (pool.empty())
      throw DataError(std::string("build_scene: empty ") +
                      (is_los ? "LOS" : "NLOS") + " pool");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t idx = pick(rng);
    const double d = pool[idx].true_distance;
    const double angle = 2.0 * 3.14159265358979323846 * (i - 1) / cfg.n_anchors;
    anchors[i - 1] = Anchor{d * std::sin(angle), d * std::cos(angle)};
    scene.links[i - 1] = LinkInput{anchors[i - 1], pool[idx].toa_est, feats[idx]};
    scene.states[i - 1] =
        is_los ? ChannelState::kLos : ChannelState::kNlos;
  }
  scene.grid = GridSpec::covering(anchors, cfg.grid_margin, cfg.grid_step);
  return scene;
}

std::vector<double> run_trial(const ScenarioConfig& cfg, const Pools& pools,
                              const EstimatorBank& bank, double p_los,
                              Rng& rng) {
  const Scene scene = build_scene(cfg, pools, p_los, rng);
  std::vector<double> errors(cfg.estimators.size());
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    const PositionEstimate est = bank.run(cfg.estimators[e], scene.links,
                                          scene.grid);
    errors[e] = std::hypot(est.x, est.y);
  }
  return errors;
}

ScenarioResult run_sweep(const ScenarioConfig& cfg, const Pools& pools,
                         const EstimatorBank& bank) {
  validate(cfg);
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t n_p = cfg.p_los_values.size();

  // errors[p][est][trial]
  std::vector<std::vector<std::vector<double>>> errors(
      n_p, std::vector<std::vector<double>>(
               n_est, std::vector<double>(cfg.trials, 0.0)));

  unsigned hw = std::thread::hardware_concurrency();
  const int n_threads =
      cfg.threads > 0 ? cfg.threads : static_cast<int>(hw > 0 ? hw : 1);

  const std::size_t n_tasks = n_p * static_cast<std::size_t>(cfg.trials);
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&](int tid) {
    try {
      for (std::size_t task = tid; task < n_tasks;
           task += static_cast<std::size_t>(n_threads)) {
        const std::size_t p_idx = task / static_cast<std::size_t>(cfg.trials);
        const std::size_t trial = task % static_cast<std::size_t>(cfg.trials);
        Rng rng = make_stream(cfg.seed, task);
        const std::vector<double> e =
            run_trial(cfg, pools, bank, cfg.p_los_values[p_idx], rng);
        for (std::size_t k = 0; k < n_est; ++k) errors[p_idx][k][trial] = e[k];
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };

  if (n_threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker, t);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ScenarioResult result;
  result.cells.reserve(n_est * n_p);
  for (std::size_t k = 0; k < n_est; ++k) {
    for (std::size_t p = 0; p < n_p; ++p) {
      SweepCell cell;
      cell.estimator = cfg.estimators[k];
      cell.p_los = cfg.p_los_values[p];
      cell.errors = errors[p][k];
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

void write_rmse_csv(const ScenarioResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << "estimator,p_los,rmse_m,n_trials\n";
  for (const SweepCell& c : r.cells) {
    out << to_string(c.estimator) << ',' << format_double(c.p_los) << ','
        << format_double(c.rmse()) << ',' << c.errors.size() << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void write_cdf_csv(const ScenarioResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << "estimator,p_los,error_m,cum_prob\n";
  for (const SweepCell& c : r.cells) {
    std::vector<double> sorted = c.errors;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      out << to_string(c.estimator) << ',' << format_double(c.p_los) << ','
          << format_double(sorted[k]) << ','
          << format_double(static_cast<double>(k + 1) / n) << '\n';
    }
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace uwb
