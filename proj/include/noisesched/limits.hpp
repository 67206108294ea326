#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "noisesched/models.hpp"
#include "noisesched/rng.hpp"
#include "noisesched/schedules.hpp"

namespace noisesched {

/// Reduced d -> infinity scalar dynamics.
enum class LimitKind {
  ve_magnetization,
  vp_dilated_phase1_mu,
  vp_dilated_phase2_M,
  ve_dilated_phase1_M,
  cw_ve_phase1_M,
  cw_ve_phase2_coord,
  cw_vp_phase1_mu,
  cw_vp_phase2_coord,
  vp_circular_phase2_M,
};

struct LimitInterval {
  double lo;
  double hi;
  bool hi_open;  // the right-hand side is singular at hi; it may still be the end of an Euler grid
};

LimitInterval limit_interval(LimitKind kind);
std::string_view to_string(LimitKind kind);
LimitKind parse_limit_kind(std::string_view name);

struct LimitParams {
  double h = 0.0;  // GM: mode bias; CW: the h with p = e^{mh} / (e^{mh} + e^{-mh})
  double kappa = 3.0;
  double sigma2 = 0.25;
  double m = 1.0;
  double beta_temp = 2.0;
  AlphaForm alpha_form = AlphaForm::linear;  // ve-magnetization only
  int mode_sign = 1;        // sgn(M) used by coordinate kinds, and by M-kinds when M == 0
  std::int64_t d = 10000;   // phase-boundary samplers for the phase-2 M kinds
  double p = 0.8;           // initial-law samplers

  static LimitParams for_gm(double p, double sigma2, double kappa);
  static LimitParams for_cw(double p, double beta_temp, double kappa);
};

/// Throws DomainError outside the kind's interval or at a singular endpoint.
double limit_rhs(LimitKind kind, double t, double y, const LimitParams& params);

struct LimitTrajectory {
  std::vector<double> t;
  std::vector<double> y;
};

/// Explicit Euler on t_k = t0 + k (t1 - t0) / n with n = (t1 - t0) / delta_t an integer.
/// Non-finite values raise SingularityError carrying the failure time.
LimitTrajectory integrate_limit(LimitKind kind, double initial, double t0, double t1,
                                double delta_t, const LimitParams& params);

struct LimitEnsemble {
  std::vector<double> t;
  std::vector<std::vector<double>> members;  // members[j][k]

  std::vector<double> mean() const;
  std::vector<double> terminal() const;
};

LimitEnsemble integrate_limit_ensemble(LimitKind kind, const std::vector<double>& initial,
                                       double t0, double t1, double delta_t,
                                       const LimitParams& params);

/// Asymptotic law at the start of the kind's interval.
std::vector<double> sample_limit_initial(LimitKind kind, const LimitParams& params,
                                         std::int64_t n, std::uint64_t seed);

enum class OrthTheorem { thm1, thm2, thm5 };
OrthTheorem parse_orth_theorem(std::string_view name);

/// Predicted orthogonal standard deviation. For thm2 with t < 1/2 the value is in units of sqrt(d).
double predicted_orth_std(OrthTheorem theorem, double t, double kappa, double sigma2);

/// Potential V(mu) whose negative derivative is the drift of mu = r.x / sqrt(d). Requires beta > 0.
double potential_landscape(const GaussianMixture& model, const InterpolantCoeffs& coeffs, double mu,
                           std::int64_t d);
double potential_drift(const GaussianMixture& model, const InterpolantCoeffs& coeffs, double mu,
                       std::int64_t d);

struct SpeciationScaling {
  std::vector<std::int64_t> dims;
  std::vector<double> tau0;
  double slope;
};

/// Balance point alpha(tau) = sqrt(d) tau per dimension, and the log-log slope of tau0 against d.
SpeciationScaling speciation_scaling(const std::vector<std::int64_t>& dims, AlphaForm form);

struct ConservationEstimate {
  double mean;
  double std_err;
  double m;
  std::int64_t n;
};

/// Monte-Carlo estimate of E[tanh(beta m + lambda Z + lambda^2 a)] with lambda = 1/(kappa (2-2t))
/// and a = +-1 with mean m.
ConservationEstimate cw_conservation_mc(double beta_temp, double kappa, double t, std::int64_t n,
                                        std::uint64_t seed);

/// log cosh without overflow.
double log_cosh(double y);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace noisesched
