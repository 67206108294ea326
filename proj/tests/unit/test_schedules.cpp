#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "noisesched/errors.hpp"
#include "noisesched/schedules.hpp"

using namespace noisesched;
using doctest::Approx;

TEST_CASE("dilation examples") {
  CHECK(eval_dilation(TimeDilation::dilated_vp(3.0, 1000000), 0.5).tau == Approx(0.003).epsilon(1e-14));
  const auto u = eval_dilation(TimeDilation::uniform(), 0.3);
  CHECK(u.tau == 0.3);
  CHECK(u.tau_dot == 1.0);
  const double tg = eval_dilation(TimeDilation::ddpm_gamma(0.1, 20.0), std::exp(-1.0)).tau;
  CHECK(tg == Approx(std::exp(-0.1 - 9.95)).epsilon(1e-12));
  CHECK(tg == Approx(4.32e-5).epsilon(1e-3));
  CHECK(eval_dilation(TimeDilation::dilated_ve(3.0, 10000), 0.5).tau == Approx(0.97).epsilon(1e-14));
}

TEST_CASE("dilation domain errors") {
  CHECK_THROWS_AS(eval_dilation(TimeDilation::uniform(), -0.1), DomainError);
  CHECK_THROWS_AS(eval_dilation(TimeDilation::uniform(), 1.1), DomainError);
  CHECK_THROWS_AS(eval_dilation(TimeDilation::ddpm_gamma(0.1, 20.0), 0.0), DomainError);
  CHECK_THROWS_AS(TimeDilation::dilated_vp(200.0, 10000).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TimeDilation::dilated_ve(0.0, 10000).validate(), std::invalid_argument);
}

TEST_CASE("dilations are monotone with exact endpoints") {
  const TimeDilation kinds[] = {TimeDilation::uniform(), TimeDilation::dilated_vp(3.0, 10000),
                                TimeDilation::dilated_ve(3.0, 10000), TimeDilation::dilated_vp(1.0, 100),
                                TimeDilation::ddpm_gamma(0.1, 20.0)};
  for (const auto& dil : kinds) {
    const bool asymptotic = dil.kind == DilationKind::ddpm_gamma;
    if (!asymptotic) CHECK(std::abs(eval_dilation(dil, 0.0).tau) <= 1e-12);
    CHECK(std::abs(eval_dilation(dil, 1.0).tau - 1.0) <= 1e-12);
    double prev = -1.0;
    for (int k = asymptotic ? 1 : 0; k <= 10000; ++k) {
      const double tau = eval_dilation(dil, k / 10000.0).tau;
      CHECK_MESSAGE(tau >= prev, "kind " << to_string(dil.kind) << " k=" << k);
      prev = tau;
    }
  }
  CHECK(eval_dilation(TimeDilation::ddpm_gamma(0.1, 20.0), 1e-6).tau < 1e-10);
}

TEST_CASE("tau_dot matches central differences away from the kink") {
  const TimeDilation kinds[] = {TimeDilation::uniform(), TimeDilation::dilated_vp(3.0, 10000),
                                TimeDilation::dilated_ve(3.0, 10000), TimeDilation::ddpm_gamma(0.1, 20.0)};
  const double eps = 1e-6;
  for (const auto& dil : kinds) {
    for (double t : {0.05, 0.2, 0.45, 0.55, 0.8, 0.95}) {
      const double fd = (eval_dilation(dil, t + eps).tau - eval_dilation(dil, t - eps).tau) / (2 * eps);
      CHECK(std::abs(fd - eval_dilation(dil, t).tau_dot) < 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("right derivative at the kink") {
  const auto dil = TimeDilation::dilated_vp(3.0, 10000);
  CHECK(eval_dilation(dil, 0.5).tau_dot == Approx(2.0 * (1.0 - 0.03)).epsilon(1e-14));
  const auto dve = TimeDilation::dilated_ve(3.0, 10000);
  CHECK(eval_dilation(dve, 0.5).tau_dot == Approx(2.0 * 0.03).epsilon(1e-14));
}

TEST_CASE("coefficient examples") {
  const auto k1 = eval_coeffs({AlphaForm::linear, NoiseScale::vp}, TimeDilation::uniform(), 0.25, 1);
  CHECK(k1.alpha == 0.75);
  CHECK(k1.alpha_dot == -1.0);
  CHECK(k1.beta == 0.25);
  CHECK(k1.beta_dot == 1.0);
  CHECK(k1.c == 1.0);
  const auto k2 = eval_coeffs({AlphaForm::linear, NoiseScale::ve}, TimeDilation::uniform(), 0.5, 100);
  CHECK(k2.alpha == 0.5);
  CHECK(k2.c == 10.0);
  const auto k3 = eval_coeffs({AlphaForm::circular, NoiseScale::vp}, TimeDilation::uniform(), 0.6, 1);
  CHECK(k3.alpha == Approx(0.8).epsilon(1e-14));
  CHECK(k3.alpha_dot == Approx(-0.75).epsilon(1e-14));
  CHECK_THROWS_AS(eval_coeffs({AlphaForm::circular, NoiseScale::vp}, TimeDilation::uniform(), 1.0, 1),
                  SingularityError);
}

TEST_CASE("uniform linear coefficients are exact and signs hold") {
  for (int k = 0; k < 1000; ++k) {
    const double t = k / 1000.0;
    const auto c = eval_coeffs({}, TimeDilation::uniform(), t, 1);
    CHECK(c.alpha == 1.0 - t);
    CHECK(c.beta == t);
  }
  const TimeDilation kinds[] = {TimeDilation::dilated_vp(3.0, 10000), TimeDilation::dilated_ve(3.0, 10000)};
  for (const auto& dil : kinds) {
    for (auto form : {AlphaForm::linear, AlphaForm::circular}) {
      for (int k = 0; k < 100; ++k) {
        const auto c = eval_coeffs({form, NoiseScale::ve}, dil, k / 100.0, 10000);
        CHECK(c.alpha_dot <= 0.0);
        CHECK(c.beta_dot >= 0.0);
        CHECK(c.c * c.c * c.alpha * c.alpha + 0.25 * c.beta * c.beta > 0.0);
      }
    }
  }
}

TEST_CASE("names round-trip") {
  for (auto k : {DilationKind::uniform, DilationKind::dilated_vp, DilationKind::dilated_ve, DilationKind::ddpm_gamma}) {
    CHECK(parse_dilation_kind(to_string(k)) == k);
  }
  CHECK(parse_alpha_form("circular") == AlphaForm::circular);
  CHECK(parse_noise_scale("ve") == NoiseScale::ve);
  CHECK_THROWS_AS(parse_dilation_kind("cosine"), std::invalid_argument);
}

TEST_CASE("ve sde magnitude vanishes at t = 1") {
  CHECK(ve_sde_noise_magnitude(1.0, 0.01, 50.0) == Approx(0.0));
  CHECK(ve_sde_noise_magnitude(0.0, 0.01, 50.0) == Approx(std::sqrt(2500.0 - 1e-4)));
}
