#include "noisesched/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "noisesched/errors.hpp"

namespace noisesched {

namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pick(const ObservableRecord& rec, Observable observable) {
  switch (observable) {
    case Observable::M:
      return rec.M;
    case Observable::mu:
      return rec.mu;
    case Observable::sigma_perp2:
      return rec.sigma_perp2;
  }
  return kNaN;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ModeSpinStats summarize(const std::vector<double>& fractions) {
  ModeSpinStats s;
  s.n_traj = static_cast<std::int64_t>(fractions.size());
  if (fractions.empty()) {
    s.mean_fraction = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double f : fractions) sum += f;
  s.mean_fraction = sum / static_cast<double>(fractions.size());
  if (fractions.size() > 1) {
    double ss = 0.0;
    for (double f : fractions) ss += (f - s.mean_fraction) * (f - s.mean_fraction);
    s.std_err = std::sqrt(ss / static_cast<double>(fractions.size() - 1) /
                          static_cast<double>(fractions.size()));
  }
  return s;
}

}  // namespace

ModeWeight mode_weight(std::span<const double> final_m) {
  if (final_m.empty()) throw std::invalid_argument("mode weight of an empty batch");
  ModeWeight w;
  w.n = static_cast<std::int64_t>(final_m.size());
  std::int64_t positive = 0;
  for (double m : final_m) {
    if (m > 0.0) ++positive;
    if (std::abs(m) < 1e-6) ++w.n_ambiguous;
  }
  w.p_hat = static_cast<double>(positive) / static_cast<double>(w.n);
  w.std_err = std::sqrt(w.p_hat * (1.0 - w.p_hat) / static_cast<double>(w.n));
  return w;
}

ModeWeight mode_weight(const TrajectoryBatch& batch) {
  const std::vector<double> finals = batch.final_magnetizations();
  return mode_weight(finals);
}

double orth_variance(const TrajectoryBatch& batch, double t) {
  const std::vector<double> times = batch.record_times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= kTimeTol) {
      double sum = 0.0;
      for (const auto& tr : batch.trajectories) sum += tr.records[k].sigma_perp2;
      return sum / static_cast<double>(batch.trajectories.size());
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "t=" << t << " is not a recorded time; recorded times:";
  for (double rt : times) msg << ' ' << rt;
  throw DomainError(msg.str());
}

Series batch_mean(const TrajectoryBatch& batch, Observable observable) {
  Series s;
  s.t = batch.record_times();
  s.value.assign(s.t.size(), 0.0);
  for (const auto& tr : batch.trajectories) {
    for (std::size_t k = 0; k < s.t.size(); ++k) s.value[k] += pick(tr.records[k], observable);
  }
  for (double& v : s.value) v /= static_cast<double>(batch.trajectories.size());
  return s;
}

std::optional<double> trajectory_speciation_time(const Trajectory& trajectory, double threshold) {
  const auto& recs = trajectory.records;
  if (recs.empty()) throw std::invalid_argument("trajectory has no records");
  const double final_sign = sgn(recs.back().M);
  auto fails = [&](const ObservableRecord& r) {
    return sgn(r.M) != final_sign || std::abs(r.M) <= threshold;
  };
  if (final_sign == 0.0 || fails(recs.back())) return std::nullopt;
  for (std::size_t k = recs.size(); k-- > 0;) {
    if (fails(recs[k])) return recs[k].t;
  }
  return recs.front().t;
}

double default_speciation_threshold(std::int64_t d) {
  return 2.0 / std::sqrt(static_cast<double>(d));
}

SpeciationEstimate speciation_time(const TrajectoryBatch& batch) {
  return speciation_time(batch, default_speciation_threshold(batch.config.d));
}

SpeciationEstimate speciation_time(const TrajectoryBatch& batch, double threshold) {
  SpeciationEstimate est;
  est.threshold = threshold;
  std::vector<double> ts, taus;
  for (const auto& tr : batch.trajectories) {
    const auto ts_opt = trajectory_speciation_time(tr, threshold);
    if (!ts_opt) {
      ++est.n_unstable;
      est.per_trajectory_t.push_back(kNaN);
      continue;
    }
    ++est.n_used;
    est.per_trajectory_t.push_back(*ts_opt);
    ts.push_back(*ts_opt);
    taus.push_back(eval_dilation(batch.config.dilation, *ts_opt).tau);
  }
  est.t_median = median(ts);
  est.tau_median = median(taus);
  return est;
}

SpinStats spin_stats(const TrajectoryBatch& batch, bool enforce_quality) {
  if (!std::holds_alternative<CurieWeiss>(batch.config.model)) {
    throw std::invalid_argument("spin statistics need a Curie-Weiss batch");
  }
  std::vector<double> plus, minus;
  std::int64_t unroundable = 0, total = 0;
  for (const auto& tr : batch.trajectories) {
    const FinalCensus& c = tr.census;
    unroundable += c.n_unroundable;
    total += c.n_positive + c.n_negative + c.n_unroundable;
    const std::int64_t rounded = c.n_positive + c.n_negative;
    if (rounded == 0) continue;
    const double frac = static_cast<double>(c.n_positive) / static_cast<double>(rounded);
    const double s = tr.records.back().M;
    if (s > 0.0) {
      plus.push_back(frac);
    } else if (s < 0.0) {
      minus.push_back(frac);
    }
  }
  SpinStats out;
  out.plus_mode = summarize(plus);
  out.minus_mode = summarize(minus);
  out.unroundable_fraction = total > 0 ? static_cast<double>(unroundable) / static_cast<double>(total) : 0.0;
  if (enforce_quality && out.unroundable_fraction > 0.01) {
    throw QualityError("unroundable spin fraction " + std::to_string(out.unroundable_fraction) +
                       " exceeds 1%");
  }
  return out;
}

LimitComparison compare_series(const Series& batch_series, const std::vector<double>& limit_t,
                               const std::vector<double>& limit_value) {
  if (limit_t.size() != limit_value.size() || limit_t.empty()) {
    throw DomainError("limit series is empty or malformed");
  }
  LimitComparison out;
  std::size_t j = 0;
  for (std::size_t k = 0; k < limit_t.size(); ++k) {
    while (j < batch_series.t.size() && batch_series.t[j] < limit_t[k] - kTimeTol) ++j;
    if (j == batch_series.t.size() || std::abs(batch_series.t[j] - limit_t[k]) > kTimeTol) {
      throw DomainError("time grid mismatch: limit time " + std::to_string(limit_t[k]) +
                        " is not recorded by the batch");
    }
    const double diff = std::abs(batch_series.value[j] - limit_value[k]);
    out.t.push_back(limit_t[k]);
    out.abs_diff.push_back(diff);
    out.sup = std::max(out.sup, diff);
  }
  return out;
}

LimitComparison compare_to_limit(const TrajectoryBatch& batch, const std::vector<double>& limit_t,
                                 const std::vector<double>& limit_value, Observable observable) {
  return compare_series(batch_mean(batch, observable), limit_t, limit_value);
}

FeatureReport feature_report(const TrajectoryBatch& batch) {
  FeatureReport r;
  r.mode = mode_weight(batch);
  r.sigma_hat2 = batch_mean(batch, Observable::sigma_perp2);
  r.speciation = speciation_time(batch);
  if (std::holds_alternative<CurieWeiss>(batch.config.model)) {
    r.spins = spin_stats(batch, false);
  }
  r.n_traj = batch.config.n_traj;
  r.d = batch.config.d;
  r.delta_t = batch.config.delta_t();
  return r;
}

}  // namespace noisesched
