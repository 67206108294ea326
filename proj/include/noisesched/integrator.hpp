#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "noisesched/models.hpp"
#include "noisesched/rng.hpp"
#include "noisesched/schedules.hpp"

namespace noisesched {

struct SimulationConfig {
  TargetModel model;
  InterpolantSpec interpolant;
  TimeDilation dilation;
  std::int64_t d = 1;
  std::int64_t steps = 100;  // K; delta_t = 1/K
  std::int64_t n_traj = 1;
  std::uint64_t seed = 0;
  std::int64_t record_coords = 0;
  std::int64_t record_stride = 1;
  std::int64_t coords_trajectories = 1;  // trajectories whose leading coordinates are kept
  bool keep_final_state = false;
  unsigned threads = 1;  // 0 = hardware concurrency

  double delta_t() const { return 1.0 / static_cast<double>(steps); }
  void validate() const;
};

/// Converts a step size into an integer step count K with K * delta_t == 1.
std::int64_t steps_from_delta_t(double delta_t);

struct ObservableRecord {
  double t = 0.0;
  double M = 0.0;            // r.x / d
  double mu = 0.0;           // r.x / sqrt(d)
  double sigma_perp2 = 0.0;  // |x - M r|^2 / (d - 1); 0 when d = 1
  std::vector<double> coords;
};

/// Sign census of the full final state (the state itself may be too large to keep).
struct FinalCensus {
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
  std::int64_t n_unroundable = 0;  // |x_i| <= 0.5
};

struct Trajectory {
  std::uint64_t sub_seed = 0;
  std::vector<ObservableRecord> records;
  FinalCensus census;
  std::vector<double> final_state;  // filled only with keep_final_state
};

struct TrajectoryBatch {
  SimulationConfig config;
  std::vector<Trajectory> trajectories;

  std::vector<double> record_times() const;
  std::vector<double> final_magnetizations() const;
};

ObservableRecord observe(std::span<const double> x, double t, std::int64_t record_coords);

/// X_0 ~ N(0, c^2 Id_d).
std::vector<double> init_noise(std::int64_t d, double c, Philox& rng);

using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// x <- x + delta_t * b_t(x). `scratch` must have the size of x.
/// Throws SingularityError when the drift is not finite.
void euler_step(const DriftFn& field, std::span<double> x, double t, double delta_t,
                std::span<double> scratch);
std::vector<double> euler_step(const DriftFn& field, std::span<const double> x, double t,
                               double delta_t);

/// Runs all trajectories; output depends only on the config (never on thread count).
TrajectoryBatch simulate_batch(const SimulationConfig& config);

/// Deterministic product of per-step Euler factors for the part of the state
/// orthogonal to r (GM only): sigma_perp(1) / sigma_perp(0) on the configured grid.
std::vector<double> orthogonal_gain_path(const SimulationConfig& config);

}  // namespace noisesched
