#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sdens/special.hpp"
#include "sdens/systems.hpp"

// Taylor-series construction of the normalized fundamental matrix of the
// YZ system near the apparent singularity at x = 0:
//
//   x Phi' = (A0 + A2 x^2 + A4 x^4 + ...) Phi,
//   A0 = [[1, b0], [0, 0]],  A2 = [[-1, b1], [-lambda, 1]],
//   A_{2j} = [[0, b_j], [0, 0]]  (j >= 2),
//
// where b_m are the Taylor coefficients of 1/Psi. One column is even,
// the other odd:
//   r0 = c_0 + c_2 x^2 + ...,   r1 = c_1 x + c_3 x^3 + ...,
//   A0 c_0 = 0,                 (2k I - A0) c_2k   = sum_j A_{2j} c_{2k-2j},
//   (I - A0) c_1 = 0,           ((2k+1) I - A0) c_{2k+1} = sum_j A_{2j} c_{2k+1-2j}.
//
// The free factors are fixed by c_0 = (b0, -1), c_1 = (1, 0), which makes
// u_1(0) = 1 and det Phi(x) = x (unit Wronskian).

namespace sdens {

template <class Scalar>
struct SeriesSeed {
  Scalar lambda;
  // c_{2k} and c_{2k+1} for k = 0..pairs-1
  std::vector<Vec2<Scalar>> even, odd;

  // Phi(x) = (r0(x), r1(x)); accurate for |x| well inside the series
  // radius (the first complex zero of Psi), with truncation error
  // O(x^{2*pairs}).
  Mat2<Scalar> eval(double x) const {
    const double x2 = x * x;
    Vec2<Scalar> r0 = even.back(), r1 = odd.back();
    for (int k = static_cast<int>(even.size()) - 2; k >= 0; --k) {
      r0 = r0 * x2 + even[k];
      r1 = r1 * x2 + odd[k];
    }
    Mat2<Scalar> out;
    out.col(0) = r0;
    out.col(1) = r1 * x;
    return out;
  }

  // dPhi/dx, for residual checks
  Mat2<Scalar> eval_deriv(double x) const {
    const double x2 = x * x;
    Vec2<Scalar> d0 = Vec2<Scalar>::Zero(), d1 = Vec2<Scalar>::Zero();
    for (int k = static_cast<int>(even.size()) - 1; k >= 1; --k) {
      d0 = d0 * x2 + 2.0 * k * even[k];
    }
    for (int k = static_cast<int>(odd.size()) - 1; k >= 0; --k) {
      d1 = d1 * x2 + (2.0 * k + 1.0) * odd[k];
    }
    Mat2<Scalar> out;
    out.col(0) = d0 * x;
    out.col(1) = d1;
    return out;
  }
};

template <class Scalar>
SeriesSeed<Scalar> series_seed(Scalar lambda, int pairs = 8) {
  const std::vector<double> b = psi_inverse_series(pairs + 1);
  SeriesSeed<Scalar> s;
  s.lambda = lambda;
  s.even.resize(pairs);
  s.odd.resize(pairs);
  s.even[0] << Scalar(b[0]), Scalar(-1.0);
  s.odd[0] << Scalar(1.0), Scalar(0.0);

  // rhs contribution of A_{2j} applied to c: A2 is full, higher A_{2j}
  // only feed b_j * c(1) into the first component
  auto apply = [&](int j, const Vec2<Scalar>& c) -> Vec2<Scalar> {
    Vec2<Scalar> r;
    if (j == 1) {
      r(0) = -c(0) + Scalar(b[1]) * c(1);
      r(1) = -lambda * c(0) + c(1);
    } else {
      r(0) = Scalar(b[j]) * c(1);
      r(1) = Scalar(0);
    }
    return r;
  };
  // (m I - A0)^{-1} = [[m, b0], [0, m-1]] / (m (m-1))
  auto solve = [&](double m, const Vec2<Scalar>& rhs) -> Vec2<Scalar> {
    Vec2<Scalar> c;
    c(0) = (m * rhs(0) + b[0] * rhs(1)) / (m * (m - 1.0));
    c(1) = rhs(1) / m;
    return c;
  };

  for (int k = 1; k < pairs; ++k) {
    Vec2<Scalar> re = Vec2<Scalar>::Zero(), ro = Vec2<Scalar>::Zero();
    for (int j = 1; j <= k; ++j) {
      re += apply(j, s.even[k - j]);
      ro += apply(j, s.odd[k - j]);
    }
    s.even[k] = solve(2.0 * k, re);
    s.odd[k] = solve(2.0 * k + 1.0, ro);
  }
  return s;
}

}  // namespace sdens
