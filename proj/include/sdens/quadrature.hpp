#pragma once

#include <functional>
#include <vector>

// Gauss-Legendre nodes and weights, computed by Newton iteration on the
// Legendre recurrence with interlacing initial guesses. Shared by the
// collocation tableau, dense-output weights, and the integral utilities.

namespace sdens {

struct GaussLegendre {
  std::vector<double> node;    // on (-1, 1), ascending
  std::vector<double> weight;  // sum = 2
};

// Cached; thread-safe. n in [1, 64].
const GaussLegendre& gauss_legendre(int n);

// Integral of f over [a, b] with one n-point panel.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

// Composite rule with uniform panels.
double gl_integrate_panels(const std::function<double(double)>& f, double a, double b, int n,
                           int panels);

}  // namespace sdens
