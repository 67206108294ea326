#include "noisesched/velocity.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "noisesched/errors.hpp"

namespace noisesched {
namespace {

inline double clamped_tanh(double s) {
  return std::tanh(std::clamp(s, -kTanhClamp, kTanhClamp));
}

void check_sizes(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  const auto d = static_cast<std::size_t>(dimension(ctx.model()));
  if (x.size() != d || out.size() != d) {
    throw std::invalid_argument("state size does not match model dimension");
  }
}

}  // namespace

FieldContext::FieldContext(TargetModel model, InterpolantCoeffs coeffs, double t)
    : model_(std::move(model)), coeffs_(coeffs), t_(t) {
  const auto& [alpha, alpha_dot, beta, beta_dot, c, tau] = coeffs_;
  const double c2 = c * c;
  if (const auto* gm = std::get_if<GaussianMixture>(&model_)) {
    denom_ = c2 * alpha * alpha + gm->sigma2 * beta * beta;
    if (!(denom_ > 0.0) || !std::isfinite(denom_)) {
      throw SingularityError("GM velocity denominator vanishes", t_, tau);
    }
    linear_ = (c2 * alpha * alpha_dot + gm->sigma2 * beta * beta_dot) / denom_;
    drive_ = c2 * alpha * (alpha * beta_dot - alpha_dot * beta) / denom_;
    return;
  }
  if (!(alpha > 0.0)) throw SingularityError("CW velocity requires alpha > 0", t_, tau);
  linear_ = alpha_dot / alpha;
  drive_ = (alpha * beta_dot - alpha_dot * beta) / alpha;
  spin_scale_ = beta / (c2 * alpha * alpha);
}

void gm_velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  check_sizes(ctx, x, out);
  const auto& gm = std::get<GaussianMixture>(ctx.model());
  const double overlap = std::accumulate(x.begin(), x.end(), 0.0);  // r . x
  const double arg = gm.h + ctx.coeffs().beta * overlap / ctx.denom();
  // h may be +-inf for a single-mode target; tanh(+-inf) is exact.
  const double push = ctx.drive_coefficient() * (std::isinf(arg) ? std::tanh(arg) : clamped_tanh(arg));
  const double lin = ctx.linear_coefficient();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lin * x[i] + push;
}

std::vector<double> gm_velocity(const FieldContext& ctx, std::span<const double> x) {
  std::vector<double> out(x.size());
  gm_velocity(ctx, x, out);
  return out;
}

void cw_denoiser(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  check_sizes(ctx, x, out);
  const auto& cw = std::get<CurieWeiss>(ctx.model());
  const double m = cw.m;
  assert(m < 1.0);
  const double scale = ctx.spin_field_scale();

  // ln Q+- = sum_i ln(1 +- m tanh(s_i)); out temporarily holds tanh(s_i).
  double log_q_plus = 0.0;
  double log_q_minus = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double th = clamped_tanh(scale * x[i]);
    out[i] = th;
    log_q_plus += std::log1p(m * th);
    log_q_minus += std::log1p(-m * th);
  }
  const double lp = std::log(cw.p) + log_q_plus;
  const double lm = std::log1p(-cw.p) + log_q_minus;
  const double top = std::max(lp, lm);
  const double ep = std::exp(lp - top);
  const double em = std::exp(lm - top);
  const double w_plus = ep / (ep + em);
  const double w_minus = em / (ep + em);

  // tanh(+-beta m + s) = (th +- m) / (1 +- m th), using tanh(beta m) = m.
  for (double& th : out) {
    th = w_plus * (th + m) / (1.0 + m * th) + w_minus * (th - m) / (1.0 - m * th);
  }
}

std::vector<double> cw_denoiser(const FieldContext& ctx, std::span<const double> x) {
  std::vector<double> out(x.size());
  cw_denoiser(ctx, x, out);
  return out;
}

void cw_velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  cw_denoiser(ctx, x, out);
  const double lin = ctx.linear_coefficient();
  const double drive = ctx.drive_coefficient();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lin * x[i] + drive * out[i];
}

std::vector<double> cw_velocity(const FieldContext& ctx, std::span<const double> x) {
  std::vector<double> out(x.size());
  cw_velocity(ctx, x, out);
  return out;
}

void velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out) {
  if (std::holds_alternative<GaussianMixture>(ctx.model())) {
    gm_velocity(ctx, x, out);
  } else {
    cw_velocity(ctx, x, out);
  }
}

}  // namespace noisesched
