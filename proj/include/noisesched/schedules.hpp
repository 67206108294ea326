#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace noisesched {

enum class DilationKind { uniform, dilated_vp, dilated_ve, ddpm_gamma };

/// Monotone reparameterization t -> tau(t) of interpolation time on [0,1].
///
/// dilated_vp spends the first half of [0,1] on tau in [0, kappa/sqrt(d)];
/// dilated_ve spends the second half on tau in [1 - kappa/sqrt(d), 1].
/// ddpm_gamma is the schedule induced by a linear gamma_s VP SDE and is only
/// asymptotic at t = 0 (it is meant for schedule comparison, not simulation).
struct TimeDilation {
  DilationKind kind = DilationKind::uniform;
  double kappa = 3.0;
  std::int64_t dim = 1;
  double gamma_min = 0.1;
  double gamma_max = 20.0;

  static TimeDilation uniform() { return {}; }
  static TimeDilation dilated_vp(double kappa, std::int64_t dim);
  static TimeDilation dilated_ve(double kappa, std::int64_t dim);
  static TimeDilation ddpm_gamma(double gamma_min, double gamma_max);

  /// Throws std::invalid_argument when parameters violate the monotonicity invariants.
  void validate() const;
};

struct DilationValue {
  double tau;
  double tau_dot;
};

/// tau(t) and its derivative. At the t = 1/2 kink of the piecewise schedules
/// the right derivative is returned.
DilationValue eval_dilation(const TimeDilation& dilation, double t);

enum class AlphaForm { linear, circular };
enum class NoiseScale { vp, ve };

/// I_tau = c * alpha(tau) * z + tau * a.
struct InterpolantSpec {
  AlphaForm alpha_form = AlphaForm::linear;
  NoiseScale noise_scale = NoiseScale::vp;
};

/// Instantaneous coefficients; derivatives are with respect to dilated time t.
struct InterpolantCoeffs {
  double alpha;
  double alpha_dot;
  double beta;
  double beta_dot;
  double c;
  double tau;  // kept for error context and the CW log-argument scale
};

InterpolantCoeffs eval_coeffs(const InterpolantSpec& spec, const TimeDilation& dilation, double t,
                              std::int64_t d);

/// Noise magnitude sqrt(sigma_{1-t}^2 - sigma_0^2) of the VE SDE with
/// sigma_s = sigma_min (sigma_max / sigma_min)^s. Plotting only.
double ve_sde_noise_magnitude(double t, double sigma_min, double sigma_max);

std::string_view to_string(DilationKind kind);
std::string_view to_string(AlphaForm form);
std::string_view to_string(NoiseScale scale);
DilationKind parse_dilation_kind(std::string_view name);
AlphaForm parse_alpha_form(std::string_view name);
NoiseScale parse_noise_scale(std::string_view name);

}  // namespace noisesched
