#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "sdens/special.hpp"

// First-order 2x2 formulations of the spectral ODE and conversions
// between them. All act on y(x) = sqrt(w(x)) u(x):
//
//   YZ:              x Phi' = (A0 + A2 x^2 + ...) Phi, state (y, z) with
//                    z = x Psi y' + (x^2 - 1) Psi y.  det Phi = x for the
//                    normalized fundamental pair.
//   SchrodingerLike: state (y, Psi y'); traceless, det Phi = const.
//   Balanced:        state (y, sqrt(Psi/lambda) y'); both components grow
//                    like x^{3/4} in the oscillatory regime. trace =
//                    -Psi'/(2 Psi), so det Phi = const / sqrt(Psi).
//
// wronskian() divides out each form's determinant law so that the
// normalized fundamental pair gives exactly 1 for every form.

namespace sdens {

enum class SystemForm { YZ, SchrodingerLike, Balanced };

template <class Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

// Coefficient matrix A(x) with Phi' = A Phi (the YZ form divides by x).
template <class Scalar>
void system_matrix(SystemForm form, double x, Scalar lambda, Mat2<Scalar>& A,
                   const SeriesPolicy& pol = {}) {
  switch (form) {
    case SystemForm::YZ: {
      const double pinv = 1.0 / psi(x, pol);
      A(0, 0) = Scalar(1.0 - x * x) / x;
      A(0, 1) = Scalar(pinv) / x;
      A(1, 0) = -lambda * x;
      A(1, 1) = Scalar(x);
      return;
    }
    case SystemForm::SchrodingerLike: {
      A(0, 0) = Scalar(0);
      A(0, 1) = Scalar(1.0 / psi(x, pol));
      A(1, 0) = Scalar(potential_v(x, pol)) - lambda;
      A(1, 1) = Scalar(0);
      return;
    }
    case SystemForm::Balanced: {
      const Scalar sq = std::sqrt(lambda * Scalar(psi(x, pol)));
      A(0, 0) = Scalar(0);
      A(0, 1) = std::sqrt(lambda / Scalar(psi(x, pol)));
      A(1, 0) = (Scalar(potential_v(x, pol)) - lambda) / sq;
      A(1, 1) = Scalar(-0.5 * psi_prime(x, pol) / psi(x, pol));
      return;
    }
  }
  throw std::logic_error("system_matrix: bad form");
}

// Determinant of Phi with the form's growth law divided out; identically 1
// for the normalized fundamental pair of every form.
template <class Scalar>
Scalar wronskian(SystemForm form, double x, Scalar lambda, const Mat2<Scalar>& Phi,
                 const SeriesPolicy& pol = {}) {
  const Scalar det = Phi(0, 0) * Phi(1, 1) - Phi(0, 1) * Phi(1, 0);
  switch (form) {
    case SystemForm::YZ:
      return det / Scalar(x);
    case SystemForm::SchrodingerLike:
      return det;
    case SystemForm::Balanced:
      return det * std::sqrt(lambda * Scalar(psi(x, pol)));
  }
  throw std::logic_error("wronskian: bad form");
}

// Convert one state column (y, second component) between forms at x.
template <class Scalar>
Vec2<Scalar> convert_state(SystemForm from, SystemForm to, double x, Scalar lambda,
                           const Vec2<Scalar>& v, const SeriesPolicy& pol = {}) {
  const double p = psi(x, pol);
  const Scalar y = v(0);
  // common intermediate: p2 = Psi y'
  Scalar p2;
  switch (from) {
    case SystemForm::YZ:
      p2 = (v(1) - Scalar((x * x - 1.0) * p) * y) / Scalar(x);
      break;
    case SystemForm::SchrodingerLike:
      p2 = v(1);
      break;
    case SystemForm::Balanced:
      p2 = v(1) * std::sqrt(lambda * Scalar(p));
      break;
    default:
      throw std::logic_error("convert_state: bad from");
  }
  Vec2<Scalar> out;
  out(0) = y;
  switch (to) {
    case SystemForm::YZ:
      out(1) = Scalar(x) * p2 + Scalar((x * x - 1.0) * p) * y;
      break;
    case SystemForm::SchrodingerLike:
      out(1) = p2;
      break;
    case SystemForm::Balanced:
      out(1) = p2 / std::sqrt(lambda * Scalar(p));
      break;
    default:
      throw std::logic_error("convert_state: bad to");
  }
  return out;
}

template <class Scalar>
Mat2<Scalar> convert(SystemForm from, SystemForm to, double x, Scalar lambda,
                     const Mat2<Scalar>& Phi, const SeriesPolicy& pol = {}) {
  Mat2<Scalar> out;
  for (int j = 0; j < 2; ++j) {
    Vec2<Scalar> v = Phi.col(j);
    out.col(j) = convert_state(from, to, x, lambda, v, pol);
  }
  return out;
}

// Observables of the original operator: u = y / sqrt(w), u' from the YZ
// second component.
template <class Scalar>
Scalar u_value(double x, const Vec2<Scalar>& yz) {
  return yz(0) / Scalar(sqrt_weight(x));
}

template <class Scalar>
Scalar u_deriv(double x, const Vec2<Scalar>& yz, const SeriesPolicy& pol = {}) {
  return yz(1) / Scalar(x * sqrt_weight(x) * psi(x, pol));
}

}  // namespace sdens
