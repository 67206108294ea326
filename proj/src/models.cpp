#include "noisesched/models.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "noisesched/errors.hpp"

namespace noisesched {
namespace {

void check_weight(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mode weight p must lie in [0,1]");
}

double bias_or_infinite(double p, double m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p == 1.0) return inf;
  if (p == 0.0) return -inf;
  return bias_from_weight(p, m);
}

}  // namespace

GaussianMixture GaussianMixture::make(double p, double sigma2, std::int64_t d) {
  check_weight(p);
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return {p, sigma2, d, bias_or_infinite(p, 1.0)};
}

CurieWeiss CurieWeiss::make(double p, double beta_temp, std::int64_t d) {
  check_weight(p);
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  const double m = cw_fixed_point(beta_temp);
  return {p, beta_temp, m, d, bias_or_infinite(p, m)};
}

std::int64_t dimension(const TargetModel& model) {
  return std::visit([](const auto& m) { return m.d; }, model);
}

double bias_from_weight(double p, double m) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("bias is infinite for mode weight p=" + std::to_string(p));
  }
  if (!(m > 0.0)) throw DomainError("bias_from_weight requires m > 0");
  return std::log(p / (1.0 - p)) / (2.0 * m);
}

double cw_fixed_point(double beta_temp) {
  if (!(beta_temp > 1.0)) {
    throw DomainError("m = tanh(beta m) has no positive root for beta <= 1");
  }
  // g(m) = m - tanh(beta m) is negative on (0, m*) and positive on (m*, 1].
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - std::tanh(beta_temp * mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void sample_target(const TargetModel& model, Philox& rng, std::span<double> out) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (const auto* gm = std::get_if<GaussianMixture>(&model)) {
    if (static_cast<std::int64_t>(out.size()) != gm->d) throw std::invalid_argument("size != d");
    const double sign = uniform(rng) < gm->p ? 1.0 : -1.0;
    const double sigma = std::sqrt(gm->sigma2);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = sign + sigma * normal(rng);
    return;
  }
  const auto& cw = std::get<CurieWeiss>(model);
  if (static_cast<std::int64_t>(out.size()) != cw.d) throw std::invalid_argument("size != d");
  const double eta_sign = uniform(rng) < cw.p ? 1.0 : -1.0;
  // tanh(beta * eta) = sign(eta) * m at the fixed point.
  const double p_up = 0.5 * (1.0 + eta_sign * cw.m);
  for (double& v : out) v = uniform(rng) < p_up ? 1.0 : -1.0;
}

std::vector<double> sample_target(const TargetModel& model, Philox& rng) {
  std::vector<double> out(static_cast<std::size_t>(dimension(model)));
  sample_target(model, rng, out);
  return out;
}

}  // namespace noisesched
