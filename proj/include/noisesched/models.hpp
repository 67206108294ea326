#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "noisesched/rng.hpp"

namespace noisesched {

/// p N(r, sigma2 Id) + (1-p) N(-r, sigma2 Id) with r = (1,...,1), so |r|^2 = d.
struct GaussianMixture {
  double p = 0.5;
  double sigma2 = 1.0;
  std::int64_t d = 1;
  double h = 0.0;  // e^h / (e^h + e^-h) = p; +-inf when p is 1 or 0

  static GaussianMixture make(double p, double sigma2, std::int64_t d);
};

/// Two-state Curie-Weiss spins: eta = +-m with weights (p, 1-p), then each
/// spin is +1 with probability (1 + tanh(beta eta)) / 2.
struct CurieWeiss {
  double p = 0.5;
  double beta_temp = 2.0;
  double m = 0.0;  // positive root of m = tanh(beta m)
  std::int64_t d = 1;
  double h = 0.0;  // e^{mh} / (e^{mh} + e^{-mh}) = p

  static CurieWeiss make(double p, double beta_temp, std::int64_t d);
};

using TargetModel = std::variant<GaussianMixture, CurieWeiss>;

std::int64_t dimension(const TargetModel& model);

/// h = ln(p/(1-p)) / (2m). Throws DomainError for p outside (0,1).
double bias_from_weight(double p, double m);

/// Positive root of m - tanh(beta m) by 64-step bisection. Requires beta > 1.
double cw_fixed_point(double beta_temp);

void sample_target(const TargetModel& model, Philox& rng, std::span<double> out);
std::vector<double> sample_target(const TargetModel& model, Philox& rng);

}  // namespace noisesched
