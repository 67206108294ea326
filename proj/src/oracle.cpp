#include "noisesched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "noisesched/errors.hpp"

namespace noisesched {

namespace {

void check_alpha(const InterpolantCoeffs& k) {
  if (!(k.alpha > 0.0)) throw DomainError("oracle requires alpha > 0");
}

double log_likelihood(std::span<const double> x, std::span<const double> a,
                      const InterpolantCoeffs& k) {
  const double var = k.c * k.c * k.alpha * k.alpha;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - k.beta * a[i];
    ss += r * r;
  }
  return -ss / (2.0 * var);
}

}  // namespace

OracleEstimate cw_enumeration_denoiser(const CurieWeiss& model, const InterpolantCoeffs& coeffs,
                                       std::span<const double> x) {
  check_alpha(coeffs);
  const auto d = static_cast<std::int64_t>(x.size());
  if (d != model.d) throw std::invalid_argument("state size does not match model dimension");
  if (d > kEnumerationMaxDim) throw std::invalid_argument("enumeration limited to d <= 12");
  const std::uint64_t n = std::uint64_t{1} << d;
  const double m = model.m;
  std::vector<double> log_w(n);
  std::vector<double> a(static_cast<std::size_t>(d));
  double top = -std::numeric_limits<double>::infinity();
  for (std::uint64_t cfg = 0; cfg < n; ++cfg) {
    double lp_plus = 0.0, lp_minus = 0.0;
    for (std::int64_t i = 0; i < d; ++i) {
      a[i] = (cfg >> i) & 1U ? 1.0 : -1.0;
      lp_plus += std::log(0.5 * (1.0 + m * a[i]));
      lp_minus += std::log(0.5 * (1.0 - m * a[i]));
    }
    const double hi = std::max(lp_plus, lp_minus);
    const double prior = hi + std::log(model.p * std::exp(lp_plus - hi) +
                                       (1.0 - model.p) * std::exp(lp_minus - hi));
    log_w[cfg] = prior + log_likelihood(x, a, coeffs);
    top = std::max(top, log_w[cfg]);
  }
  OracleEstimate est;
  est.value.assign(static_cast<std::size_t>(d), 0.0);
  est.std_err.assign(static_cast<std::size_t>(d), 0.0);
  double norm = 0.0;
  for (std::uint64_t cfg = 0; cfg < n; ++cfg) {
    const double w = std::exp(log_w[cfg] - top);
    norm += w;
    for (std::int64_t i = 0; i < d; ++i) est.value[i] += w * ((cfg >> i) & 1U ? 1.0 : -1.0);
  }
  for (double& v : est.value) v /= norm;
  est.n_samples = static_cast<std::int64_t>(n);
  est.ess = static_cast<double>(n);
  est.exact = true;
  return est;
}

OracleEstimate mc_denoiser(const TargetModel& model, const InterpolantCoeffs& coeffs,
                           std::span<const double> x, std::int64_t n_samples, Philox& rng) {
  check_alpha(coeffs);
  const auto d = static_cast<std::size_t>(dimension(model));
  if (x.size() != d) throw std::invalid_argument("state size does not match model dimension");
  if (const auto* cw = std::get_if<CurieWeiss>(&model); cw && cw->d <= kEnumerationMaxDim) {
    return cw_enumeration_denoiser(*cw, coeffs, x);
  }
  if (n_samples < 1000) throw std::invalid_argument("oracle needs at least 1000 samples");

  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<double> samples(n * d);
  std::vector<double> log_w(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    std::span<double> a(samples.data() + j * d, d);
    sample_target(model, rng, a);
    log_w[j] = log_likelihood(x, a, coeffs);
    top = std::max(top, log_w[j]);
  }
  double sw = 0.0, sw2 = 0.0;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = std::exp(log_w[j] - top);
    sw += w[j];
    sw2 += w[j] * w[j];
  }
  OracleEstimate est;
  est.n_samples = n_samples;
  est.ess = sw * sw / sw2;
  if (est.ess < kMinEffectiveSamples) {
    throw UnreliableEstimateError("effective sample size " + std::to_string(est.ess) +
                                  " below 50; increase n_samples or use enumeration");
  }
  est.value.assign(d, 0.0);
  est.std_err.assign(d, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) est.value[i] += w[j] * samples[j * d + i];
  }
  for (double& v : est.value) v /= sw;
  // Delta-method variance of a ratio estimator.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      const double r = w[j] * (samples[j * d + i] - est.value[i]);
      est.std_err[i] += r * r;
    }
  }
  for (double& s : est.std_err) s = std::sqrt(s) / sw;
  return est;
}

OracleEstimate mc_velocity(const TargetModel& model, const InterpolantCoeffs& coeffs,
                           std::span<const double> x, std::int64_t n_samples, Philox& rng) {
  OracleEstimate est = mc_denoiser(model, coeffs, x, n_samples, rng);
  const double lin = coeffs.alpha_dot / coeffs.alpha;
  const double drive = (coeffs.alpha * coeffs.beta_dot - coeffs.alpha_dot * coeffs.beta) / coeffs.alpha;
  for (std::size_t i = 0; i < x.size(); ++i) {
    est.value[i] = lin * x[i] + drive * est.value[i];
    est.std_err[i] *= std::abs(drive);
  }
  return est;
}

void corrupted_velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  velocity(ctx, x, out);
  // v = lin x + n(x)  ->  lin x - n(x) = 2 lin x - v.
  const double lin = ctx.linear_coefficient();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * lin * x[i] - out[i];
}

ValidationReport validate_field(const TargetModel& model, const InterpolantSpec& spec,
                                const TimeDilation& dilation, const ValidationOptions& options,
                                const FieldFn& field) {
  if (options.n_points < 1) throw std::invalid_argument("need at least one validation point");
  if (!(options.t_min >= 0.0 && options.t_min < options.t_max && options.t_max < 1.0)) {
    throw std::invalid_argument("validation times must satisfy 0 <= t_min < t_max < 1");
  }
  const std::int64_t d = dimension(model);
  ValidationReport report;
  report.tol_sigmas = options.tol_sigmas;
  std::int64_t n_z = 0, n_above_3 = 0;
  bool exact_ok = true;
  for (std::int64_t k = 0; k < options.n_points; ++k) {
    Philox rng(derive_subseed(options.seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> uniform(options.t_min, options.t_max);
    std::normal_distribution<double> normal(0.0, 1.0);
    ValidationPoint pt;
    pt.t = uniform(rng);
    const InterpolantCoeffs coeffs = eval_coeffs(spec, dilation, pt.t, d);
    const std::vector<double> a = sample_target(model, rng);
    pt.x.resize(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < d; ++i) {
      pt.x[i] = coeffs.c * coeffs.alpha * normal(rng) + coeffs.beta * a[i];
    }
    const FieldContext ctx(model, coeffs, pt.t);
    pt.closed_form.resize(pt.x.size());
    field(ctx, pt.x, pt.closed_form);
    try {
      const OracleEstimate est = mc_velocity(model, coeffs, pt.x, options.n_samples, rng);
      pt.oracle = est.value;
      pt.ess = est.ess;
      pt.exact = est.exact;
      for (std::size_t i = 0; i < pt.x.size(); ++i) {
        const double dev = pt.closed_form[i] - est.value[i];
        pt.max_abs_dev = std::max(pt.max_abs_dev, std::abs(dev));
        if (est.exact) continue;
        const double z = est.std_err[i] > 0.0
                             ? dev / est.std_err[i]
                             : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        pt.z.push_back(z);
        pt.max_abs_z = std::max(pt.max_abs_z, std::abs(z));
        ++n_z;
        if (std::abs(z) > 3.0) ++n_above_3;
      }
      if (pt.exact) {
        report.max_abs_dev = std::max(report.max_abs_dev, pt.max_abs_dev);
        if (!(pt.max_abs_dev < options.exact_tol)) exact_ok = false;
      } else {
        report.max_abs_z = std::max(report.max_abs_z, pt.max_abs_z);
      }
    } catch (const UnreliableEstimateError& e) {
      pt.excluded = true;
      pt.note = e.what();
      ++report.n_excluded;
    }
    report.points.push_back(std::move(pt));
  }
  report.frac_above_3 = n_z > 0 ? static_cast<double>(n_above_3) / static_cast<double>(n_z) : 0.0;
  const bool any_used = report.n_excluded < options.n_points;
  report.passed = any_used && exact_ok && report.max_abs_z < options.tol_sigmas &&
                  report.frac_above_3 < 0.01;
  return report;
}

}  // namespace noisesched
