#include "noisesched/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "noisesched/errors.hpp"

namespace noisesched {

TimeDilation TimeDilation::dilated_vp(double kappa, std::int64_t dim) {
  TimeDilation out{DilationKind::dilated_vp, kappa, dim};
  out.validate();
  return out;
}

TimeDilation TimeDilation::dilated_ve(double kappa, std::int64_t dim) {
  TimeDilation out{DilationKind::dilated_ve, kappa, dim};
  out.validate();
  return out;
}

TimeDilation TimeDilation::ddpm_gamma(double gamma_min, double gamma_max) {
  TimeDilation out;
  out.kind = DilationKind::ddpm_gamma;
  out.gamma_min = gamma_min;
  out.gamma_max = gamma_max;
  out.validate();
  return out;
}

void TimeDilation::validate() const {
  switch (kind) {
    case DilationKind::uniform:
      return;
    case DilationKind::dilated_vp:
    case DilationKind::dilated_ve:
      if (dim < 1) throw std::invalid_argument("dilation dimension must be >= 1");
      // kappa/sqrt(d) < 1 keeps both linear pieces nondecreasing.
      if (!(kappa > 0.0) || !(kappa < std::sqrt(static_cast<double>(dim)))) {
        throw std::invalid_argument("dilation requires 0 < kappa < sqrt(d)");
      }
      return;
    case DilationKind::ddpm_gamma:
      if (!(gamma_min >= 0.0) || !(gamma_max >= gamma_min)) {
        throw std::invalid_argument("ddpm-gamma requires 0 <= gamma_min <= gamma_max");
      }
      return;
  }
}

DilationValue eval_dilation(const TimeDilation& dilation, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("dilation time t=" + std::to_string(t) + " outside [0,1]");
  }
  const double root_d = std::sqrt(static_cast<double>(dilation.dim));
  switch (dilation.kind) {
    case DilationKind::uniform:
      return {t, 1.0};
    case DilationKind::dilated_vp: {
      const double knee = dilation.kappa / root_d;
      if (t < 0.5) return {2.0 * knee * t, 2.0 * knee};
      if (t == 1.0) return {1.0, 2.0 * (1.0 - knee)};
      return {knee + (1.0 - knee) * (2.0 * t - 1.0), 2.0 * (1.0 - knee)};
    }
    case DilationKind::dilated_ve: {
      const double knee = dilation.kappa / root_d;
      if (t < 0.5) return {(1.0 - knee) * 2.0 * t, 2.0 * (1.0 - knee)};
      if (t == 1.0) return {1.0, 2.0 * knee};
      return {(1.0 - knee) + knee * (2.0 * t - 1.0), 2.0 * knee};
    }
    case DilationKind::ddpm_gamma: {
      if (t == 0.0) throw DomainError("ddpm-gamma dilation is singular at t=0");
      const double lt = std::log(t);
      const double spread = dilation.gamma_max - dilation.gamma_min;
      const double tau = std::exp(dilation.gamma_min * lt - spread * lt * lt / 2.0);
      return {tau, tau * (dilation.gamma_min - spread * lt) / t};
    }
  }
  throw std::logic_error("unhandled dilation kind");
}

InterpolantCoeffs eval_coeffs(const InterpolantSpec& spec, const TimeDilation& dilation, double t,
                              std::int64_t d) {
  const auto [tau, tau_dot] = eval_dilation(dilation, t);
  InterpolantCoeffs out{};
  out.tau = tau;
  out.beta = tau;
  out.beta_dot = tau_dot;
  out.c = spec.noise_scale == NoiseScale::ve ? std::sqrt(static_cast<double>(d)) : 1.0;
  switch (spec.alpha_form) {
    case AlphaForm::linear:
      out.alpha = 1.0 - tau;
      out.alpha_dot = -tau_dot;
      break;
    case AlphaForm::circular:
      out.alpha = std::sqrt(std::max(0.0, 1.0 - tau * tau));
      if (out.alpha == 0.0) {
        throw SingularityError("circular interpolant derivative is singular at tau=1", t, tau);
      }
      out.alpha_dot = -tau * tau_dot / out.alpha;
      break;
  }
  return out;
}

double ve_sde_noise_magnitude(double t, double sigma_min, double sigma_max) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t outside [0,1]");
  const auto sigma = [&](double s) { return sigma_min * std::pow(sigma_max / sigma_min, s); };
  const double s0 = sigma(0.0);
  const double s1 = sigma(1.0 - t);
  return std::sqrt(std::max(0.0, s1 * s1 - s0 * s0));
}

std::string_view to_string(DilationKind kind) {
  switch (kind) {
    case DilationKind::uniform:
      return "uniform";
    case DilationKind::dilated_vp:
      return "dilated-vp";
    case DilationKind::dilated_ve:
      return "dilated-ve";
    case DilationKind::ddpm_gamma:
      return "ddpm-gamma";
  }
  return "?";
}

std::string_view to_string(AlphaForm form) {
  return form == AlphaForm::linear ? "linear" : "circular";
}

std::string_view to_string(NoiseScale scale) { return scale == NoiseScale::vp ? "vp" : "ve"; }

DilationKind parse_dilation_kind(std::string_view name) {
  for (auto kind : {DilationKind::uniform, DilationKind::dilated_vp, DilationKind::dilated_ve,
                    DilationKind::ddpm_gamma}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown dilation kind '" + std::string(name) + "'");
}

AlphaForm parse_alpha_form(std::string_view name) {
  if (name == "linear") return AlphaForm::linear;
  if (name == "circular") return AlphaForm::circular;
  throw std::invalid_argument("unknown alpha_form '" + std::string(name) + "'");
}

NoiseScale parse_noise_scale(std::string_view name) {
  if (name == "vp") return NoiseScale::vp;
  if (name == "ve") return NoiseScale::ve;
  throw std::invalid_argument("unknown noise_scale '" + std::string(name) + "'");
}

}  // namespace noisesched
