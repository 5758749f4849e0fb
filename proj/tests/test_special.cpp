#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdens/special.hpp"

using namespace sdens;

namespace {
// reference values from tools/oracles/derived_values.py (50-digit closed
// forms differentiated symbolically-free via mpmath.diff)
constexpr double kPsi0 = 0.37612638903183752;
constexpr double kPsi025 = 0.36233145037466791;
constexpr double kPsi05 = 0.32443435338129656;
constexpr double kPsi1 = 0.21379664776456008;
constexpr double kPsi2 = 0.059624268394423039;
constexpr double kPsiP025 = -0.10792088699155792;
constexpr double kPsiP1 = -0.22628244587308555;
constexpr double kPsiP2 = -0.079102909914588532;
constexpr double kPsiPP0 = -0.45135166683820503;
constexpr double kPsiPP025 = -0.39329406688730182;
constexpr double kPsiPP1 = 0.074914788651152776;
constexpr double kPsiPPP025 = 0.44578243211323675;
constexpr double kPsiPPP1 = 0.45564105158542553;
constexpr double kPsiPPP2 = -0.14751072532383801;
constexpr double kV05 = -1.1757559154239002;
constexpr double kV1 = -0.42759329552912017;
constexpr double kV3 = 0.16029945351571518;
constexpr double kQ025 = -1.5693845018246046;
constexpr double kQ1 = -0.423833187047939;
constexpr double kQ3 = 0.16523337542663055;
constexpr double kQx1 = 1.4407018122591651;
constexpr double kVmax = 0.18704362024989018;
constexpr double kVargmax = 2.2430101185978266;

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace

TEST_CASE("psi matches reference values") {
  CHECK(close(psi(0.0), kPsi0, 1e-15));
  CHECK(close(psi(0.0), 2.0 / (3.0 * kSqrtPi), 1e-15));
  CHECK(close(psi(0.25), kPsi025, 1e-14));
  CHECK(close(psi(0.5), kPsi05, 1e-14));
  CHECK(close(psi(1.0), kPsi1, 1e-14));
  CHECK(close(psi(2.0), kPsi2, 1e-14));
  CHECK(close(psi(10.0), 5e-4, 1e-14));
}

TEST_CASE("psi derivatives match reference values") {
  CHECK(close(psi_prime(0.25), kPsiP025, 1e-13));
  CHECK(close(psi_prime(1.0), kPsiP1, 1e-13));
  CHECK(close(psi_prime(2.0), kPsiP2, 1e-13));
  CHECK(psi_prime(0.0) == 0.0);
  CHECK(close(psi_second(0.0), kPsiPP0, 1e-14));
  CHECK(close(psi_second(0.0), -4.0 / (5.0 * kSqrtPi), 1e-14));
  CHECK(close(psi_second(0.25), kPsiPP025, 1e-13));
  CHECK(close(psi_second(1.0), kPsiPP1, 1e-12));
  CHECK(close(psi_third(0.25), kPsiPPP025, 1e-12));
  CHECK(close(psi_third(1.0), kPsiPPP1, 1e-12));
  CHECK(close(psi_third(2.0), kPsiPPP2, 1e-11));
  CHECK(close(psi_prime_over_x(0.0), psi_second(0.0), 1e-15));
  CHECK(close(psi_prime_over_x(1.5), psi_prime(1.5) / 1.5, 1e-13));
}

TEST_CASE("psi is even and smooth across the series switch radius") {
  for (double x : {0.1, 0.3, 0.7, 1.3, 2.5}) {
    CHECK(psi(x) == psi(-x));
    CHECK(psi_prime(x) == -psi_prime(-x));
    CHECK(psi_second(x) == psi_second(-x));
  }
  // Branch agreement: evaluate both the series and the closed form at the
  // same abscissa by moving the switch radius around it.
  const SeriesPolicy ser{0.55, 12};     // forces the series branch
  const SeriesPolicy closed{0.25, 12};  // forces the closed form
  for (double x : {0.3, 0.45, 0.5}) {
    CHECK(close(psi(x, ser), psi(x, closed), 1e-13));
    CHECK(close(psi_prime(x, ser), psi_prime(x, closed), 1e-12));
    CHECK(close(psi_second(x, ser), psi_second(x, closed), 1e-11));
    CHECK(close(psi_third(x, ser), psi_third(x, closed), 1e-10));
    CHECK(close(normal_form_q_x(x, ser), normal_form_q_x(x, closed), 1e-10));
  }
}

TEST_CASE("psi is positive, decreasing, with the cubic tail") {
  double prev = psi(0.0);
  for (double x = 0.25; x <= 12.0; x += 0.25) {
    const double p = psi(x);
    CHECK(p > 0.0);
    CHECK(p < prev);
    prev = p;
  }
  CHECK(close(psi(15.0), 1.0 / (2.0 * 15.0 * 15.0 * 15.0), 1e-14));
}

TEST_CASE("series coefficients") {
  const auto a = psi_series(6);
  CHECK(close(a[0], 2.0 / (3.0 * kSqrtPi), 1e-15));
  CHECK(close(a[1], -2.0 / (5.0 * kSqrtPi), 1e-15));
  CHECK(close(a[2], 1.0 / (7.0 * kSqrtPi), 1e-15));
  const auto b = psi_inverse_series(6);
  CHECK(close(b[0], 3.0 * kSqrtPi / 2.0, 1e-15));
  CHECK(close(b[1], 9.0 * kSqrtPi / 10.0, 1e-14));
  CHECK(close(b[2], 153.0 * kSqrtPi / 700.0, 1e-14));
  // product of the two series telescopes to 1
  const auto aa = psi_series(12);
  const auto bb = psi_inverse_series(12);
  for (int k = 1; k < 12; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += aa[j] * bb[k - j];
    CHECK(std::abs(s) < 1e-14);
  }
}

TEST_CASE("potential V matches references and upper bound") {
  CHECK(close(potential_v(0.0), -14.0 / (5.0 * kSqrtPi), 1e-14));
  CHECK(close(potential_v(0.5), kV05, 1e-13));
  CHECK(close(potential_v(1.0), kV1, 1e-13));
  CHECK(close(potential_v(3.0), kV3, 1e-12));
  CHECK(close(potential_v(kVargmax), kVmax, 1e-12));
  for (double x = 0.05; x <= 40.0; x += 0.05) {
    CHECK(potential_v(x) < 0.5 / x);
  }
}

TEST_CASE("normal-form potential Q and its derivative") {
  CHECK(close(normal_form_q(0.0), -3.0 / kSqrtPi, 1e-14));
  CHECK(close(normal_form_q(0.25), kQ025, 1e-13));
  CHECK(close(normal_form_q(1.0), kQ1, 1e-12));
  CHECK(close(normal_form_q(3.0), kQ3, 1e-12));
  CHECK(close(normal_form_q_x(1.0), kQx1, 1e-11));
  // finite-difference cross-check of Qx at a few points
  for (double x : {0.2, 0.8, 1.7, 4.0}) {
    const double d = 1e-6;
    const double fd = (normal_form_q(x + d) - normal_form_q(x - d)) / (2 * d);
    CHECK(close(normal_form_q_x(x), fd, 1e-8));
  }
}

TEST_CASE("freq_sq matches the algebraic tail at x = 100") {
  const double f = freq_sq(100.0, 1.0);
  CHECK(close(f, 0.995000000028125, 1e-14));
  const double tail = 1.0 - 0.5 / 100.0 + (9.0 / 32.0) * 1e-10;
  CHECK(close(f, tail, 1e-13));
}

TEST_CASE("weight functions") {
  CHECK(weight(0.0) == 0.0);
  CHECK(close(weight(1.0), std::exp(-1.0), 1e-15));
  CHECK(close(sqrt_weight(2.0), 2.0 * std::exp(-2.0), 1e-15));
  CHECK(close(sqrt_weight(1.5) * sqrt_weight(1.5), weight(1.5), 1e-15));
}
