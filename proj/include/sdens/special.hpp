#pragma once

#include <vector>

// Special functions for the radial operator
//   L u = -(Psi w u')' / w,   w(x) = x^2 exp(-x^2),
//   Psi(x) = [erf(x) - (2/sqrt(pi)) x exp(-x^2)] / (2 x^3),
// including the potentials of the equivalent scalar forms
//   -(Psi y')' + V y = lambda y          (regular at the origin)
//   -U''(s) + Q(x(s)) U = lambda U       (Liouville normal form).
//
// Psi and its derivatives are entire and even; the closed forms above
// cancel catastrophically near x = 0, so evaluation switches to a Taylor
// series inside |x| < SeriesPolicy::switch_radius.

namespace sdens {

inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kSqrtPi = 1.7724538509055160272981674833411;
inline constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;

struct SeriesPolicy {
  double switch_radius = 0.5;
  int terms = 12;
};

// w(x) and sqrt(w(x)) = x exp(-x^2/2)
double weight(double x);
double sqrt_weight(double x);

// Taylor coefficients: Psi(x) = sum_m a[m] x^{2m},
// a[m] = (2/sqrt(pi)) (-1)^m / (m! (2m+3)).
std::vector<double> psi_series(int terms);

// Coefficients of 1/Psi(x) = sum_m b[m] x^{2m} by series inversion.
// b[0] = 3 sqrt(pi)/2, b[1] = 9 sqrt(pi)/10, b[2] = 153 sqrt(pi)/700, ...
std::vector<double> psi_inverse_series(int terms);

double psi(double x, const SeriesPolicy& pol = {});
double psi_prime(double x, const SeriesPolicy& pol = {});
// Psi'(x)/x, finite at x = 0 (equals Psi''(0) there)
double psi_prime_over_x(double x, const SeriesPolicy& pol = {});
double psi_second(double x, const SeriesPolicy& pol = {});
double psi_third(double x, const SeriesPolicy& pol = {});

// V(x) = (1 - x^2) Psi'(x)/x + (x^2 - 3) Psi(x); V(0) = -14/(5 sqrt(pi)),
// max V = 0.187044 near x = 2.243, and V(x) < 1/(2x) for x > 0.
double potential_v(double x, const SeriesPolicy& pol = {});

// Normal-form potential Q(x) = Psi''/4 - (Psi')^2/(16 Psi) + V(x);
// Q(0) = -3/sqrt(pi), Q(x) ~ 1/(2x) - lambda-shift-free tail.
double normal_form_q(double x, const SeriesPolicy& pol = {});
// dQ/dx
double normal_form_q_x(double x, const SeriesPolicy& pol = {});

// F(x; lambda) = lambda - Q(x), the local squared frequency of the
// normal form; F = lambda - 1/(2x) + (9/32) x^{-5} + (rapidly decaying).
double freq_sq(double x, double lambda, const SeriesPolicy& pol = {});

}  // namespace sdens
