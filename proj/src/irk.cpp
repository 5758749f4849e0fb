#include "sdens/irk.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sdens {

Eigen::VectorXd IrkTableau::basis(double t) const {
  Eigen::VectorXd ell(nu);
  for (int j = 0; j < nu; ++j) {
    double v = 1.0;
    for (int i = 0; i < nu; ++i) {
      if (i != j) v *= (t - c[i]) / (c[j] - c[i]);
    }
    ell(j) = v;
  }
  return ell;
}

Eigen::VectorXd IrkTableau::dense_weights(double theta) const {
  // exact for the degree nu-1 basis polynomials
  const auto& g = gauss_legendre(nu);
  Eigen::VectorXd L = Eigen::VectorXd::Zero(nu);
  for (int q = 0; q < nu; ++q) {
    const double t = 0.5 * theta * (1.0 + g.node[q]);
    L += (0.5 * theta * g.weight[q]) * basis(t);
  }
  return L;
}

const IrkTableau& gauss_tableau(int nu) {
  if (nu < 1 || nu > 32) throw std::invalid_argument("gauss_tableau: nu out of range");
  static std::map<int, IrkTableau> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(nu);
  if (it != cache.end()) return it->second;

  IrkTableau t;
  t.nu = nu;
  const auto& g = gauss_legendre(nu);
  t.c.resize(nu);
  t.b.resize(nu);
  for (int i = 0; i < nu; ++i) {
    t.c[i] = 0.5 * (1.0 + g.node[i]);
    t.b[i] = 0.5 * g.weight[i];
  }
  t.a.resize(nu, nu);
  for (int i = 0; i < nu; ++i) {
    t.a.row(i) = t.dense_weights(t.c[i]).transpose();
  }
  return cache.emplace(nu, std::move(t)).first->second;
}

double kappa_nu(int nu, double delta) {
  return std::max(1.5, (4.0 / 9.0) * std::pow(delta, -1.0 / (2.0 * nu - 1.0)));
}

double freq_bound(double x, double abs_lambda) {
  const double r = 1.0 + x * x;
  const double s = std::sqrt(abs_lambda);
  return 5.0 * s * std::pow(r, 0.75) + 3.5 / s * std::pow(r, 0.25);
}

double steps_bound(double x0, double x1, double abs_lambda, int nu, double delta, double safety) {
  const double kap = kappa_nu(nu, delta);
  const int panels = std::max(4, static_cast<int>((x1 - x0) * 2));
  const double I = gl_integrate_panels([&](double x) { return freq_bound(x, abs_lambda); }, x0,
                                       x1, 12, panels);
  return kap * I / safety;
}

}  // namespace sdens
