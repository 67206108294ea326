#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noisesched/integrator.hpp"

namespace noisesched {

struct ModeWeight {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::int64_t n = 0;
  std::int64_t n_ambiguous = 0;  // |M_final| < 1e-6; still classified by sign
};

/// Fraction of trajectories with final M > 0.
ModeWeight mode_weight(const TrajectoryBatch& batch);
ModeWeight mode_weight(std::span<const double> final_m);

/// Mean of sigma_perp2 over trajectories at a recorded time; throws DomainError listing
/// the recorded times otherwise.
double orth_variance(const TrajectoryBatch& batch, double t);

struct Series {
  std::vector<double> t;
  std::vector<double> value;
};

enum class Observable { M, mu, sigma_perp2 };

/// Batch mean of an observable at every recorded time.
Series batch_mean(const TrajectoryBatch& batch, Observable observable);

/// Last recorded time at which sgn(M) differs from sgn(M_final) or |M| <= threshold;
/// the first recorded time if there is none. Empty when the final record itself fails.
std::optional<double> trajectory_speciation_time(const Trajectory& trajectory, double threshold);

struct SpeciationEstimate {
  double threshold = 0.0;
  double t_median = 0.0;    // NaN when no trajectory stabilizes
  double tau_median = 0.0;  // the same estimate in interpolation time
  std::int64_t n_used = 0;
  std::int64_t n_unstable = 0;
  std::vector<double> per_trajectory_t;  // NaN for unstable trajectories
};

double default_speciation_threshold(std::int64_t d);
SpeciationEstimate speciation_time(const TrajectoryBatch& batch);
SpeciationEstimate speciation_time(const TrajectoryBatch& batch, double threshold);

struct ModeSpinStats {
  std::int64_t n_traj = 0;
  double mean_fraction = 0.0;  // mean over trajectories of the +1 fraction; NaN when empty
  double std_err = 0.0;
};

struct SpinStats {
  ModeSpinStats plus_mode;
  ModeSpinStats minus_mode;
  double unroundable_fraction = 0.0;
};

/// Per-mode +1 spin fractions from the final census. Throws QualityError when more than 1%
/// of the final coordinates satisfy |x_i| <= 0.5, unless `enforce_quality` is false.
SpinStats spin_stats(const TrajectoryBatch& batch, bool enforce_quality = true);

struct LimitComparison {
  std::vector<double> t;
  std::vector<double> abs_diff;
  double sup = 0.0;
};

/// |batch-mean observable - limit value| on the limit's grid. Every limit time must be a
/// recorded time of the batch (within 1e-9); DomainError otherwise.
LimitComparison compare_to_limit(const TrajectoryBatch& batch, const std::vector<double>& limit_t,
                                 const std::vector<double>& limit_value, Observable observable);
LimitComparison compare_series(const Series& batch_series, const std::vector<double>& limit_t,
                               const std::vector<double>& limit_value);

struct FeatureReport {
  ModeWeight mode;
  Series sigma_hat2;
  SpeciationEstimate speciation;
  std::optional<SpinStats> spins;
  std::int64_t n_traj = 0;
  std::int64_t d = 0;
  double delta_t = 0.0;
};

FeatureReport feature_report(const TrajectoryBatch& batch);

}  // namespace noisesched
