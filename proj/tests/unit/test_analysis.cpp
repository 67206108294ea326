#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "noisesched/analysis.hpp"
#include "noisesched/errors.hpp"

using namespace noisesched;
using doctest::Approx;

namespace {

TrajectoryBatch synthetic(const std::vector<std::vector<double>>& m_paths, std::int64_t d = 100) {
  TrajectoryBatch b;
  b.config.d = d;
  b.config.model = GaussianMixture::make(0.8, 0.25, d);
  for (const auto& path : m_paths) {
    Trajectory tr;
    for (std::size_t k = 0; k < path.size(); ++k) {
      ObservableRecord r;
      r.t = static_cast<double>(k) / static_cast<double>(path.size() - 1);
      r.M = path[k];
      r.mu = path[k] * std::sqrt(static_cast<double>(d));
      r.sigma_perp2 = 1.0 + 0.1 * static_cast<double>(k);
      tr.records.push_back(r);
    }
    b.trajectories.push_back(tr);
  }
  b.config.n_traj = static_cast<std::int64_t>(m_paths.size());
  return b;
}

SimulationConfig vp_config(std::int64_t d, std::int64_t n, std::int64_t steps) {
  SimulationConfig c;
  c.model = GaussianMixture::make(0.8, 0.25, d);
  c.d = d;
  c.steps = steps;
  c.n_traj = n;
  c.seed = 2024;
  return c;
}

}  // namespace

TEST_CASE("mode weight") {
  const auto all_plus = mode_weight(synthetic({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}));
  CHECK(all_plus.p_hat == 1.0);
  CHECK(all_plus.std_err == 0.0);
  const std::vector<double> finals{0.3, -0.2, 1e-8, 0.9};
  const auto w = mode_weight(finals);
  CHECK(w.p_hat == 0.75);
  CHECK(w.std_err == Approx(std::sqrt(0.75 * 0.25 / 4)));
  CHECK(w.n_ambiguous == 1);
  std::vector<double> scaled(finals);
  for (double& v : scaled) v *= 37.5;
  CHECK(mode_weight(scaled).p_hat == w.p_hat);
}

TEST_CASE("orthogonal variance at t = 0 and error on unrecorded times") {
  auto cfg = vp_config(10000, 100, 10);
  const auto batch = simulate_batch(cfg);
  CHECK(orth_variance(batch, 0.0) == Approx(1.0).epsilon(0.02));
  CHECK_THROWS_WITH_AS(orth_variance(batch, 0.05), doctest::Contains("recorded times"), DomainError);

  auto permuted = batch;
  std::reverse(permuted.trajectories.begin(), permuted.trajectories.end());
  CHECK(orth_variance(permuted, 1.0) == Approx(orth_variance(batch, 1.0)).epsilon(1e-14));
}

TEST_CASE("speciation on synthetic paths") {
  const double thr = 0.2;
  // Above threshold from the first step onward.
  const auto early = synthetic({{0.0, 0.5, 0.8, 1.0}});
  CHECK(*trajectory_speciation_time(early.trajectories[0], thr) == 0.0);
  const auto late = synthetic({{0.5, -0.5, 0.1, 0.5, 1.0}});
  CHECK(*trajectory_speciation_time(late.trajectories[0], thr) == 0.5);
  const auto unstable = synthetic({{0.5, 0.4, 0.1}});
  CHECK(!trajectory_speciation_time(unstable.trajectories[0], thr).has_value());
  const auto est = speciation_time(synthetic({{0.0, 0.5, 0.8, 1.0}, {0.5, -0.5, 0.1, 0.5, 1.0}, {0.5, 0.4, 0.1}}), thr);
  CHECK(est.n_unstable == 1);
  CHECK(est.n_used == 2);
}

TEST_CASE("speciation is monotone in the threshold") {
  auto cfg = vp_config(1000, 40, 100);
  const auto batch = simulate_batch(cfg);
  for (const auto& tr : batch.trajectories) {
    double prev = -1.0;
    for (double thr : {0.0, 0.01, 0.03, 0.063, 0.1, 0.3}) {
      const auto ts = trajectory_speciation_time(tr, thr);
      if (!ts) break;
      CHECK(*ts >= prev);
      prev = *ts;
    }
  }
  const auto est = speciation_time(batch);
  CHECK(est.threshold == Approx(2.0 / std::sqrt(1000.0)));
  CHECK(est.t_median > 0.0);
  CHECK(est.t_median < 0.5);
}

TEST_CASE("spin statistics and the quality gate") {
  auto b = synthetic({{0.0, 0.9}, {0.0, 0.9}, {0.0, -0.9}}, 100);
  b.config.model = CurieWeiss::make(0.8, 2.0, 100);
  b.trajectories[0].census = {98, 2, 0};
  b.trajectories[1].census = {96, 4, 0};
  b.trajectories[2].census = {3, 97, 0};
  const auto s = spin_stats(b);
  CHECK(s.plus_mode.n_traj == 2);
  CHECK(s.plus_mode.mean_fraction == Approx(0.97));
  CHECK(s.minus_mode.mean_fraction == Approx(0.03));
  b.trajectories[2].census = {3, 92, 5};
  CHECK_THROWS_AS(spin_stats(b), QualityError);
  CHECK(spin_stats(b, false).unroundable_fraction == Approx(5.0 / 300.0));
}

TEST_CASE("comparison against a limit series") {
  const auto b = synthetic({{0.0, 0.5, 1.0}, {0.0, 0.3, 0.8}});
  const auto cmp = compare_to_limit(b, {0.5, 1.0}, {0.4, 1.0}, Observable::M);
  CHECK(cmp.sup == Approx(0.1));
  CHECK(cmp.abs_diff[0] == Approx(0.0));
  CHECK_THROWS_AS(compare_to_limit(b, {0.25, 1.0}, {0.0, 0.0}, Observable::M), DomainError);
}
