#include "noisesched/limits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "noisesched/errors.hpp"

namespace noisesched {

namespace {

struct KindInfo {
  LimitKind kind;
  std::string_view name;
  LimitInterval interval;
};

constexpr std::array<KindInfo, 9> kKinds{{
    {LimitKind::ve_magnetization, "ve-magnetization", {0.0, 1.0, true}},
    {LimitKind::vp_dilated_phase1_mu, "vp-dilated-phase1-mu", {0.0, 0.5, false}},
    {LimitKind::vp_dilated_phase2_M, "vp-dilated-phase2-M", {0.5, 1.0, true}},
    {LimitKind::ve_dilated_phase1_M, "ve-dilated-phase1-M", {0.0, 0.5, true}},
    {LimitKind::cw_ve_phase1_M, "cw-ve-phase1-M", {0.0, 0.5, true}},
    {LimitKind::cw_ve_phase2_coord, "cw-ve-phase2-coord", {0.5, 1.0, true}},
    {LimitKind::cw_vp_phase1_mu, "cw-vp-phase1-mu", {0.0, 0.5, false}},
    {LimitKind::cw_vp_phase2_coord, "cw-vp-phase2-coord", {0.5, 1.0, true}},
    {LimitKind::vp_circular_phase2_M, "vp-circular-phase2-M", {0.5, 1.0, false}},
}};

const KindInfo& info(LimitKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw std::invalid_argument("unknown limit kind");
}

double sign_or(double y, int fallback) {
  if (y > 0.0) return 1.0;
  if (y < 0.0) return -1.0;
  return static_cast<double>(fallback);
}

}  // namespace

LimitInterval limit_interval(LimitKind kind) { return info(kind).interval; }

std::string_view to_string(LimitKind kind) { return info(kind).name; }

LimitKind parse_limit_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw std::invalid_argument("unknown limit kind '" + std::string(name) + "'");
}

LimitParams LimitParams::for_gm(double p, double sigma2, double kappa) {
  LimitParams params;
  params.p = p;
  params.sigma2 = sigma2;
  params.kappa = kappa;
  params.h = bias_from_weight(p, 1.0);
  params.m = 1.0;
  return params;
}

LimitParams LimitParams::for_cw(double p, double beta_temp, double kappa) {
  LimitParams params;
  params.p = p;
  params.kappa = kappa;
  params.beta_temp = beta_temp;
  params.m = cw_fixed_point(beta_temp);
  params.h = bias_from_weight(p, params.m);
  return params;
}

double limit_rhs(LimitKind kind, double t, double y, const LimitParams& params) {
  const LimitInterval iv = limit_interval(kind);
  if (!(t >= iv.lo && t <= iv.hi) || (iv.hi_open && t >= iv.hi)) {
    throw DomainError(std::string(to_string(kind)) + ": t=" + std::to_string(t) +
                      " outside its interval");
  }
  const double kappa = params.kappa;
  const double s2 = params.sigma2;
  const double m = params.m;
  switch (kind) {
    case LimitKind::ve_magnetization: {
      // alpha = 1 - t or sqrt(1 - t^2), beta = t.
      double alpha = 1.0 - t;
      double alpha_dot = -1.0;
      if (params.alpha_form == AlphaForm::circular) {
        alpha = std::sqrt(1.0 - t * t);
        alpha_dot = -t / alpha;
      }
      const double beta = t;
      const double beta_dot = 1.0;
      return (alpha_dot / alpha) * y +
             ((alpha * beta_dot - alpha_dot * beta) / alpha) *
                 std::tanh(params.h + beta * y / (alpha * alpha));
    }
    case LimitKind::vp_dilated_phase1_mu:
      return 2.0 * kappa * std::tanh(params.h + 2.0 * kappa * t * y);
    case LimitKind::vp_dilated_phase2_M: {
      const double u = 1.0 - t;
      const double v = t - 0.5;
      const double den = u * u + s2 * v * v;
      if (!(den > 0.0)) throw DomainError("vp-dilated-phase2-M: vanishing denominator");
      return (-u + s2 * v) / den * y + u * sign_or(y, params.mode_sign) / den;
    }
    case LimitKind::ve_dilated_phase1_M: {
      const double w = 1.0 - 2.0 * t;
      return (-y + std::tanh(params.h + 2.0 * t * y / (w * w))) / (0.5 - t);
    }
    case LimitKind::cw_ve_phase1_M: {
      const double w = 1.0 - 2.0 * t;
      return (-y + m * std::tanh(m * params.h + 2.0 * t * m * y / (w * w))) / (0.5 - t);
    }
    case LimitKind::cw_ve_phase2_coord: {
      const double w = kappa * (2.0 - 2.0 * t);
      return (-y + std::tanh(params.beta_temp * m * params.mode_sign + y / (w * w))) / (1.0 - t);
    }
    case LimitKind::cw_vp_phase1_mu:
      return 2.0 * kappa * m * std::tanh(m * params.h + 2.0 * kappa * m * t * y);
    case LimitKind::cw_vp_phase2_coord: {
      const double w = 2.0 - 2.0 * t;
      return (-y + std::tanh(params.beta_temp * m * params.mode_sign + (2.0 * t - 1.0) / (w * w) * y)) /
             (1.0 - t);
    }
    case LimitKind::vp_circular_phase2_M: {
      const double tau = 2.0 * t - 1.0;
      const double den = 1.0 + (s2 - 1.0) * tau * tau;
      if (!(den > 0.0)) throw DomainError("vp-circular-phase2-M: vanishing denominator");
      return (s2 - 1.0) * tau * 2.0 / den * y + 2.0 * sign_or(y, params.mode_sign) / den;
    }
  }
  throw std::invalid_argument("unknown limit kind");
}

LimitTrajectory integrate_limit(LimitKind kind, double initial, double t0, double t1,
                                double delta_t, const LimitParams& params) {
  const LimitInterval iv = limit_interval(kind);
  if (!(t0 >= iv.lo && t1 <= iv.hi && t0 < t1)) {
    throw DomainError(std::string(to_string(kind)) + ": [" + std::to_string(t0) + ", " +
                      std::to_string(t1) + "] is not inside its interval");
  }
  if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be > 0");
  const double span = t1 - t0;
  const auto n = static_cast<std::int64_t>(std::llround(span / delta_t));
  if (n < 1 || std::abs(static_cast<double>(n) * delta_t - span) > 1e-9) {
    throw std::invalid_argument("(t1 - t0) / delta_t must be an integer");
  }
  const double dt = span / static_cast<double>(n);
  LimitTrajectory out;
  out.t.reserve(static_cast<std::size_t>(n + 1));
  out.y.reserve(static_cast<std::size_t>(n + 1));
  double y = initial;
  out.t.push_back(t0);
  out.y.push_back(y);
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = t0 + span * static_cast<double>(k) / static_cast<double>(n);
    y += dt * limit_rhs(kind, t, y, params);
    const double t_next = t0 + span * static_cast<double>(k + 1) / static_cast<double>(n);
    if (!std::isfinite(y)) {
      throw SingularityError(std::string(to_string(kind)) + ": solution blew up", t_next, t_next);
    }
    out.t.push_back(t_next);
    out.y.push_back(y);
  }
  return out;
}

std::vector<double> LimitEnsemble::mean() const {
  std::vector<double> out(t.size(), 0.0);
  for (const auto& member : members) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += member[k];
  }
  for (double& v : out) v /= static_cast<double>(members.size());
  return out;
}

std::vector<double> LimitEnsemble::terminal() const {
  std::vector<double> out;
  out.reserve(members.size());
  for (const auto& member : members) out.push_back(member.back());
  return out;
}

LimitEnsemble integrate_limit_ensemble(LimitKind kind, const std::vector<double>& initial,
                                       double t0, double t1, double delta_t,
                                       const LimitParams& params) {
  if (initial.empty()) throw std::invalid_argument("empty ensemble");
  LimitEnsemble out;
  out.members.reserve(initial.size());
  for (double y0 : initial) {
    LimitTrajectory tr = integrate_limit(kind, y0, t0, t1, delta_t, params);
    if (out.t.empty()) out.t = std::move(tr.t);
    out.members.push_back(std::move(tr.y));
  }
  return out;
}

std::vector<double> sample_limit_initial(LimitKind kind, const LimitParams& params,
                                         std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ensemble size must be >= 1");
  Philox rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution plus(params.p);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& y : out) {
    const double z = normal(rng);
    switch (kind) {
      case LimitKind::vp_dilated_phase2_M:
      case LimitKind::vp_circular_phase2_M: {
        // mu_{1/2} ~ p N(kappa, 1) + (1-p) N(-kappa, 1), and M = mu / sqrt(d).
        const double s = plus(rng) ? 1.0 : -1.0;
        y = (s * params.kappa + z) / std::sqrt(static_cast<double>(params.d));
        break;
      }
      case LimitKind::cw_ve_phase2_coord:
        y = params.kappa * z + params.m * params.mode_sign;
        break;
      default:
        y = z;
        break;
    }
  }
  return out;
}

OrthTheorem parse_orth_theorem(std::string_view name) {
  if (name == "thm1") return OrthTheorem::thm1;
  if (name == "thm2") return OrthTheorem::thm2;
  if (name == "thm5") return OrthTheorem::thm5;
  throw std::invalid_argument("unknown theorem '" + std::string(name) + "'");
}

double predicted_orth_std(OrthTheorem theorem, double t, double kappa, double sigma2) {
  switch (theorem) {
    case OrthTheorem::thm1:
      if (t <= 0.5) return 1.0;
      return std::sqrt((2.0 - 2.0 * t) * (2.0 - 2.0 * t) + (2.0 * t - 1.0) * (2.0 * t - 1.0) * sigma2);
    case OrthTheorem::thm2: {
      if (t < 0.5) return 1.0 - 2.0 * t;
      const double k2 = kappa * kappa;
      return kappa * std::sqrt((k2 * (2.0 - 2.0 * t) * (2.0 - 2.0 * t) + sigma2) / (k2 + sigma2));
    }
    case OrthTheorem::thm5:
      if (t <= 0.5) return 1.0;
      return std::sqrt(1.0 + (sigma2 - 1.0) * (2.0 * t - 1.0) * (2.0 * t - 1.0));
  }
  throw std::invalid_argument("unknown theorem");
}

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

namespace {

struct PotentialTerms {
  double linear;  // A
  double gain;    // c^2 alpha (alpha beta' - alpha' beta) / den
  double field;   // beta sqrt(d) / den
};

PotentialTerms potential_terms(const GaussianMixture& model, const InterpolantCoeffs& k,
                               std::int64_t d) {
  const double c2 = k.c * k.c;
  const double den = c2 * k.alpha * k.alpha + model.sigma2 * k.beta * k.beta;
  if (!(den > 0.0)) throw DomainError("potential: vanishing denominator");
  const double rd = std::sqrt(static_cast<double>(d));
  return {(c2 * k.alpha * k.alpha_dot + model.sigma2 * k.beta * k.beta_dot) / den,
          c2 * k.alpha * (k.alpha * k.beta_dot - k.alpha_dot * k.beta) / den * rd,
          k.beta * rd / den};
}

}  // namespace

double potential_landscape(const GaussianMixture& model, const InterpolantCoeffs& coeffs, double mu,
                           std::int64_t d) {
  if (!(coeffs.beta > 0.0)) throw DomainError("potential requires beta > 0");
  const PotentialTerms p = potential_terms(model, coeffs, d);
  // gain / field = c^2 alpha (alpha beta' - alpha' beta) / beta.
  return -0.5 * p.linear * mu * mu - (p.gain / p.field) * log_cosh(model.h + p.field * mu);
}

double potential_drift(const GaussianMixture& model, const InterpolantCoeffs& coeffs, double mu,
                       std::int64_t d) {
  const PotentialTerms p = potential_terms(model, coeffs, d);
  return p.linear * mu + p.gain * std::tanh(model.h + p.field * mu);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct abscissae");
  return sxy / sxx;
}

SpeciationScaling speciation_scaling(const std::vector<std::int64_t>& dims, AlphaForm form) {
  if (dims.size() < 3) throw std::invalid_argument("speciation scaling needs >= 3 dimensions");
  SpeciationScaling out;
  out.dims = dims;
  std::vector<double> log_d, log_tau;
  for (std::int64_t d : dims) {
    if (d < 1) throw std::invalid_argument("dimensions must be >= 1");
    const double rd = std::sqrt(static_cast<double>(d));
    auto gap = [&](double tau) {
      const double alpha = form == AlphaForm::linear ? 1.0 - tau : std::sqrt(1.0 - tau * tau);
      return alpha - rd * tau;
    };
    // gap is decreasing with gap(0) = 1 > 0 > gap(1).
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    const double tau0 = 0.5 * (lo + hi);
    out.tau0.push_back(tau0);
    log_d.push_back(std::log(static_cast<double>(d)));
    log_tau.push_back(std::log(tau0));
  }
  const double span = log_d.back() - log_d.front();
  if (std::abs(span) < 2.0 * std::numbers::ln10 - 1e-12) {
    throw std::invalid_argument("dimensions must span at least two decades");
  }
  out.slope = least_squares_slope(log_d, log_tau);
  return out;
}

ConservationEstimate cw_conservation_mc(double beta_temp, double kappa, double t, std::int64_t n,
                                        std::uint64_t seed) {
  if (!(t >= 0.5 && t < 1.0)) throw DomainError("conservation check needs t in [1/2, 1)");
  if (n < 2) throw std::invalid_argument("need at least 2 draws");
  const double m = cw_fixed_point(beta_temp);
  const double lambda = 1.0 / (kappa * (2.0 - 2.0 * t));
  Philox rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution plus(0.5 * (1.0 + m));
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double a = plus(rng) ? 1.0 : -1.0;
    const double z = normal(rng);
    const double v = std::tanh(beta_temp * m + lambda * z + lambda * lambda * a);
    sum += v;
    sum2 += v * v;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = (sum2 - nn * mean * mean) / (nn - 1.0);
  return {mean, std::sqrt(std::max(var, 0.0) / nn), m, n};
}

}  // namespace noisesched
