#include "noisesched/integrator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "noisesched/errors.hpp"
#include "noisesched/velocity.hpp"

namespace noisesched {

void SimulationConfig::validate() const {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (steps < 1) throw std::invalid_argument("number of steps must be >= 1");
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  if (record_coords < 0) throw std::invalid_argument("record_coords must be >= 0");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  if (coords_trajectories < 0) throw std::invalid_argument("coords_trajectories must be >= 0");
  if (dimension(model) != d) throw std::invalid_argument("model dimension differs from d");
  dilation.validate();
  if ((dilation.kind == DilationKind::dilated_vp || dilation.kind == DilationKind::dilated_ve) &&
      dilation.dim != d) {
    throw std::invalid_argument("dilation dimension differs from d");
  }
  if (dilation.kind == DilationKind::ddpm_gamma) {
    throw std::invalid_argument("ddpm-gamma is singular at t=0 and cannot drive a simulation");
  }
}

std::int64_t steps_from_delta_t(double delta_t) {
  if (!(delta_t > 0.0 && delta_t <= 1.0)) throw std::invalid_argument("delta_t must be in (0,1]");
  const auto k = static_cast<std::int64_t>(std::llround(1.0 / delta_t));
  if (std::abs(static_cast<double>(k) * delta_t - 1.0) > 1e-12) {
    throw std::invalid_argument("1/delta_t must be an integer");
  }
  return k;
}

std::vector<double> TrajectoryBatch::record_times() const {
  std::vector<double> times;
  if (trajectories.empty()) return times;
  for (const auto& rec : trajectories.front().records) times.push_back(rec.t);
  return times;
}

std::vector<double> TrajectoryBatch::final_magnetizations() const {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& tr : trajectories) out.push_back(tr.records.back().M);
  return out;
}

ObservableRecord observe(std::span<const double> x, double t, std::int64_t record_coords) {
  ObservableRecord rec;
  rec.t = t;
  const double d = static_cast<double>(x.size());
  const double overlap = std::accumulate(x.begin(), x.end(), 0.0);
  rec.M = overlap / d;
  rec.mu = overlap / std::sqrt(d);
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - rec.M) * (v - rec.M);
    rec.sigma_perp2 = ss / (d - 1.0);
  }
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(record_coords), x.size());
  rec.coords.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  return rec;
}

std::vector<double> init_noise(std::int64_t d, double c, Philox& rng) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("noise scale c must be > 0");
  std::normal_distribution<double> normal(0.0, c);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (double& v : x) v = normal(rng);
  return x;
}

void euler_step(const DriftFn& field, std::span<double> x, double t, double delta_t,
                std::span<double> scratch) {
  field(t, x, scratch);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(scratch[i])) {
      throw SingularityError("non-finite drift", t, std::nan(""));
    }
    x[i] += delta_t * scratch[i];
  }
}

std::vector<double> euler_step(const DriftFn& field, std::span<const double> x, double t,
                               double delta_t) {
  std::vector<double> out(x.begin(), x.end());
  std::vector<double> scratch(x.size());
  euler_step(field, out, t, delta_t, scratch);
  return out;
}

namespace {

std::vector<FieldContext> build_contexts(const SimulationConfig& config) {
  std::vector<FieldContext> contexts;
  contexts.reserve(static_cast<std::size_t>(config.steps));
  for (std::int64_t k = 0; k < config.steps; ++k) {
    // Left endpoints only: t = 1 is never evaluated.
    const double t = static_cast<double>(k) / static_cast<double>(config.steps);
    contexts.emplace_back(config.model, eval_coeffs(config.interpolant, config.dilation, t, config.d),
                          t);
  }
  return contexts;
}

Trajectory run_trajectory(const SimulationConfig& config, const std::vector<FieldContext>& contexts,
                          std::size_t index) {
  Trajectory out;
  out.sub_seed = derive_subseed(config.seed, index);
  Philox rng(out.sub_seed);
  const double c = eval_coeffs(config.interpolant, config.dilation, 0.0, config.d).c;
  std::vector<double> x = init_noise(config.d, c, rng);
  std::vector<double> drift(x.size());

  const bool keep_coords = static_cast<std::int64_t>(index) < config.coords_trajectories;
  const std::int64_t n_coords = keep_coords ? config.record_coords : 0;
  const double dt = config.delta_t();
  out.records.push_back(observe(x, 0.0, n_coords));
  for (std::int64_t k = 0; k < config.steps; ++k) {
    const FieldContext& ctx = contexts[static_cast<std::size_t>(k)];
    velocity(ctx, x, drift);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(drift[i])) {
        throw SimulationError("non-finite drift at t=" + std::to_string(ctx.t()) +
                                  ", tau=" + std::to_string(ctx.coeffs().tau),
                              index, static_cast<std::size_t>(k));
      }
      x[i] += dt * drift[i];
    }
    const std::int64_t done = k + 1;
    if (done == config.steps || done % config.record_stride == 0) {
      const double t = static_cast<double>(done) / static_cast<double>(config.steps);
      out.records.push_back(observe(x, t, n_coords));
    }
  }
  for (double v : x) {
    if (std::abs(v) <= 0.5) {
      ++out.census.n_unroundable;
    } else if (v > 0.0) {
      ++out.census.n_positive;
    } else {
      ++out.census.n_negative;
    }
  }
  if (config.keep_final_state) out.final_state = std::move(x);
  return out;
}

}  // namespace

TrajectoryBatch simulate_batch(const SimulationConfig& config) {
  config.validate();
  const std::vector<FieldContext> contexts = build_contexts(config);

  TrajectoryBatch batch;
  batch.config = config;
  batch.trajectories.resize(static_cast<std::size_t>(config.n_traj));

  unsigned n_threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(config.n_traj)));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = batch.trajectories.size();

  auto worker = [&] {
    for (std::size_t i = next++; i < batch.trajectories.size(); i = next++) {
      try {
        batch.trajectories[i] = run_trajectory(config, contexts, i);
      } catch (...) {
        // Report the lowest failing index so the error is schedule-independent.
        std::lock_guard lock(error_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  return batch;
}

std::vector<double> orthogonal_gain_path(const SimulationConfig& config) {
  const auto* gm = std::get_if<GaussianMixture>(&config.model);
  if (gm == nullptr) throw std::invalid_argument("orthogonal gain is defined for GM targets only");
  std::vector<double> gains{1.0};
  double g = 1.0;
  const double dt = config.delta_t();
  for (std::int64_t k = 0; k < config.steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(config.steps);
    const FieldContext ctx(config.model, eval_coeffs(config.interpolant, config.dilation, t, config.d), t);
    g *= 1.0 + dt * ctx.linear_coefficient();
    gains.push_back(g);
  }
  return gains;
}

}  // namespace noisesched
