#include "sdens/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "sdens/special.hpp"

namespace sdens {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence
void legendre(int n, double x, double* p, double* dp) {
  double pm1 = 1.0, pc = x;
  if (n == 0) {
    *p = 1.0;
    *dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pn = ((2 * k - 1) * x * pc - (k - 1) * pm1) / k;
    pm1 = pc;
    pc = pn;
  }
  *p = pc;
  *dp = n * (x * pc - pm1) / (x * x - 1.0);
}

GaussLegendre compute(int n) {
  GaussLegendre g;
  g.node.resize(n);
  g.weight.resize(n);
  for (int i = 0; i < n; ++i) {
    // interlacing guess, descending in i; store ascending later
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, &p, &dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(n, x, &p, &dp);
    g.node[n - 1 - i] = x;
    g.weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n out of range");
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& g = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += g.weight[i] * f(mid + half * g.node[i]);
  return s * half;
}

double gl_integrate_panels(const std::function<double(double)>& f, double a, double b, int n,
                           int panels) {
  double s = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * w, a + (p + 1) * w, n);
  return s;
}

}  // namespace sdens
