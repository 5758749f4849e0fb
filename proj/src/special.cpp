#include "sdens/special.hpp"

#include <cmath>
#include <stdexcept>

namespace sdens {

namespace {

constexpr int kMaxTerms = 40;

const std::vector<double>& cached_psi_series() {
  static const std::vector<double> a = psi_series(kMaxTerms);
  return a;
}

// Horner sum of sum_m coef[m] x^{2m} using terms entries
double even_series(const std::vector<double>& coef, int terms, double x) {
  const double x2 = x * x;
  double s = 0.0;
  for (int m = terms - 1; m >= 0; --m) s = s * x2 + coef[m];
  return s;
}

}  // namespace

double weight(double x) { return x * x * std::exp(-x * x); }

double sqrt_weight(double x) { return x * std::exp(-0.5 * x * x); }

std::vector<double> psi_series(int terms) {
  if (terms < 1 || terms > 64) throw std::invalid_argument("psi_series: terms out of range");
  std::vector<double> a(terms);
  double mfact = 1.0;
  for (int m = 0; m < terms; ++m) {
    if (m > 0) mfact *= m;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    a[m] = 2.0 * kInvSqrtPi * sign / (mfact * (2 * m + 3));
  }
  return a;
}

std::vector<double> psi_inverse_series(int terms) {
  const std::vector<double> a = psi_series(terms);
  std::vector<double> b(terms);
  b[0] = 1.0 / a[0];
  for (int k = 1; k < terms; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += a[j] * b[k - j];
    b[k] = -s / a[0];
  }
  return b;
}

double psi(double x, const SeriesPolicy& pol) {
  if (std::abs(x) < pol.switch_radius) {
    return even_series(cached_psi_series(), pol.terms, x);
  }
  const double n = std::erf(x) - 2.0 * kInvSqrtPi * x * std::exp(-x * x);
  return n / (2.0 * x * x * x);
}

double psi_prime(double x, const SeriesPolicy& pol) {
  if (std::abs(x) < pol.switch_radius) {
    const auto& a = cached_psi_series();
    const double x2 = x * x;
    double s = 0.0;
    for (int m = pol.terms - 1; m >= 1; --m) s = s * x2 + 2 * m * a[m];
    return s * x;
  }
  const double e = std::exp(-x * x);
  return 2.0 * kInvSqrtPi * e / x - 3.0 * psi(x, pol) / x;
}

double psi_prime_over_x(double x, const SeriesPolicy& pol) {
  if (std::abs(x) < pol.switch_radius) {
    const auto& a = cached_psi_series();
    const double x2 = x * x;
    double s = 0.0;
    for (int m = pol.terms - 1; m >= 1; --m) s = s * x2 + 2 * m * a[m];
    return s;
  }
  const double e = std::exp(-x * x);
  const double x2 = x * x;
  return 2.0 * kInvSqrtPi * e / x2 - 3.0 * psi(x, pol) / x2;
}

double psi_second(double x, const SeriesPolicy& pol) {
  if (std::abs(x) < pol.switch_radius) {
    const auto& a = cached_psi_series();
    const double x2 = x * x;
    double s = 0.0;
    for (int m = pol.terms - 1; m >= 1; --m) s = s * x2 + 2 * m * (2 * m - 1) * a[m];
    return s;
  }
  const double e = std::exp(-x * x);
  const double x2 = x * x;
  return 12.0 * psi(x, pol) / x2 - 4.0 * kInvSqrtPi * e * (1.0 + 2.0 / x2);
}

double psi_third(double x, const SeriesPolicy& pol) {
  if (std::abs(x) < pol.switch_radius) {
    const auto& a = cached_psi_series();
    const double x2 = x * x;
    double s = 0.0;
    for (int m = pol.terms - 1; m >= 2; --m)
      s = s * x2 + 2 * m * (2 * m - 1) * (2 * m - 2) * a[m];
    return s * x;
  }
  const double e = std::exp(-x * x);
  const double x2 = x * x;
  const double x3 = x2 * x;
  return 12.0 * psi_prime(x, pol) / x2 - 24.0 * psi(x, pol) / x3 +
         8.0 * kInvSqrtPi * e * (x + 2.0 / x + 2.0 / x3);
}

double potential_v(double x, const SeriesPolicy& pol) {
  return (1.0 - x * x) * psi_prime_over_x(x, pol) + (x * x - 3.0) * psi(x, pol);
}

double normal_form_q(double x, const SeriesPolicy& pol) {
  const double p = psi(x, pol);
  const double p1 = psi_prime(x, pol);
  return 0.25 * psi_second(x, pol) - p1 * p1 / (16.0 * p) + potential_v(x, pol);
}

double normal_form_q_x(double x, const SeriesPolicy& pol) {
  const double p = psi(x, pol);
  const double p1 = psi_prime(x, pol);
  const double p2 = psi_second(x, pol);
  const double p3 = psi_third(x, pol);
  // (Psi'' - Psi'/x)/x is O(x) near 0; sum the combined series there
  double core;
  if (std::abs(x) < pol.switch_radius) {
    const auto& a = cached_psi_series();
    const double x2 = x * x;
    double s = 0.0;
    for (int m = pol.terms - 1; m >= 2; --m) s = s * x2 + 2 * m * (2 * m - 2) * a[m];
    core = s * x;
  } else {
    core = (p2 - p1 / x) / x;
  }
  const double v1 = (1.0 - x * x) * core + (x * x - 5.0) * p1 + 2.0 * x * p;
  return 0.25 * p3 - (2.0 * p1 * p2 * p - p1 * p1 * p1) / (16.0 * p * p) + v1;
}

double freq_sq(double x, double lambda, const SeriesPolicy& pol) {
  return lambda - normal_form_q(x, pol);
}

}  // namespace sdens
