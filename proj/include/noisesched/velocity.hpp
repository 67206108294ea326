#pragma once

#include <span>
#include <vector>

#include "noisesched/models.hpp"
#include "noisesched/schedules.hpp"

namespace noisesched {

/// Target model plus the coefficients at one instant, with the derived scalars
/// that every velocity evaluation at that instant shares.
class FieldContext {
 public:
  /// Throws SingularityError when the field is not defined for these
  /// coefficients (GM: c^2 alpha^2 + sigma^2 beta^2 <= 0; CW: alpha <= 0).
  FieldContext(TargetModel model, InterpolantCoeffs coeffs, double t = 0.0);

  const TargetModel& model() const noexcept { return model_; }
  const InterpolantCoeffs& coeffs() const noexcept { return coeffs_; }
  double t() const noexcept { return t_; }

  /// GM: c^2 alpha^2 + sigma^2 beta^2.
  double denom() const noexcept { return denom_; }
  /// Coefficient multiplying x in the drift (the whole drift orthogonal to r for GM).
  double linear_coefficient() const noexcept { return linear_; }
  /// Coefficient multiplying the denoiser (CW) or r tanh(...) (GM).
  double drive_coefficient() const noexcept { return drive_; }
  /// beta / (c^2 alpha^2): the per-coordinate log-likelihood scale for spins.
  double spin_field_scale() const noexcept { return spin_scale_; }

 private:
  TargetModel model_;
  InterpolantCoeffs coeffs_;
  double t_;
  double denom_ = 0.0;
  double linear_ = 0.0;
  double drive_ = 0.0;
  double spin_scale_ = 0.0;
};

/// Arguments of tanh beyond this magnitude are clamped; tanh is +-1 to double precision.
inline constexpr double kTanhClamp = 40.0;

void gm_velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out);
std::vector<double> gm_velocity(const FieldContext& ctx, std::span<const double> x);

/// E[a | I = x] for the Curie-Weiss target, computed with log-space mode weights.
void cw_denoiser(const FieldContext& ctx, std::span<const double> x, std::span<double> out);
std::vector<double> cw_denoiser(const FieldContext& ctx, std::span<const double> x);

void cw_velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out);
std::vector<double> cw_velocity(const FieldContext& ctx, std::span<const double> x);

/// Dispatches on the model held by ctx.
void velocity(const FieldContext& ctx, std::span<const double> x, std::span<double> out);

}  // namespace noisesched
