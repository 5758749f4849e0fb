#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "sdens/cheb.hpp"
#include "sdens/irk.hpp"
#include "sdens/systems.hpp"

// Boundary-value data for the half-line problem: the Weyl coefficient
//   m(lambda) = -lim y0(x)/y1(x)   (Im lambda > 0)
// and the spectral density rho'(tau) = (1/pi) Im m(tau + i0).
//
// The limit upward from the real axis is reached by Chebyshev segment
// extrapolation (cheb module) of samples on Gamma = tau + i ell theta_k.
// Two routes produce the samples:
//   naive    - integrate the fundamental matrix from the series seed with
//              complex lambda and read -y0/y1 at the Wronskian-drift stop;
//   improved - factor Phi(x*; tau) at the first negative extremum x* of y1
//              by a closed-form rotation SVD (real arithmetic, determinant
//              law enforced), integrate only the tail matrix from identity
//              at x*, and recombine. The recombination never subtracts the
//              two large solution components, so the density keeps relative
//              accuracy even when the solutions have grown by many orders.

namespace sdens {

struct ExtremumNotFound : std::runtime_error {
  explicit ExtremumNotFound(const std::string& what) : std::runtime_error(what) {}
};
struct MaxStepsExceeded : std::runtime_error {
  explicit MaxStepsExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateMatrix : std::runtime_error {
  explicit DegenerateMatrix(const std::string& what) : std::runtime_error(what) {}
};
struct BranchInconsistency : std::runtime_error {
  explicit BranchInconsistency(const std::string& what) : std::runtime_error(what) {}
};

struct MweylConfig {
  SystemForm form = SystemForm::YZ;
  IrkOptions irk{};               // nu = 12, delta = 1e-13, safety = 1
  Precision precision = Precision::Double;
  int n_cheb = 0;                 // 0 -> precision default
  double ell = 0.0;               // 0 -> segment_length formula
  bool autotune = false;          // search ell; fall back to formula on failure
  double drift_threshold = 1.0;   // stop when |W/W0 - 1| exceeds this
  int series_pairs = 12;          // seed order
  double x_cap = 0.0;             // 0 -> automatic integration cap
  int threads = 1;                // concurrency across Chebyshev nodes
};

/// First negative extremum of the regular solution and the matrix there.
struct StarData {
  double x_star = 0.0;
  double y_max = 0.0;  // y1(x_star), negative
  double Y = 1.0;      // sqrt(1 + y_max^2)
  Mat2<double> Phi_star;
};

/// Closed-form SVD R(a,b) diag(alpha*scale, scale/alpha) [[c,d],[-d,c]].
struct RotSvd {
  double a = 1.0, b = 0.0;  // left rotation, a^2 + b^2 = 1
  double c = 1.0, d = 0.0;  // right factor, c^2 + d^2 = 1
  double alpha = 1.0;       // >= 1
  double scale = 1.0;       // sqrt of the determinant law value
};

/// One density sample with its diagnostics.
struct DensityRecord {
  double lambda = 0.0;
  double rho_prime = 0.0;
  Cplx m_plus{};        // m(lambda + i0)
  Cplx m_tilde_plus{};  // extrapolated tail coefficient (improved route)
  double Y = 1.0;
  double x_star = 0.0;
  std::vector<Cplx> cheb_modes;
  double segment_length = 0.0;
  long steps = 0;  // integrator steps spent on this sample
};

/// Series seed location: keeps |lambda| x0^2 small enough for the seed order.
double seed_start(double abs_lambda);

StarData find_star(double lambda, const MweylConfig& cfg = {});

/// -y0/y1 at the Wronskian-drift stop for the problem whose fundamental
/// matrix equals `start` at x_start. steps, if given, accumulates step count.
Cplx m_limit(Cplx lambda, double x_start, const Mat2<Cplx>& start, const MweylConfig& cfg = {},
             long* steps = nullptr);

/// scale is the square root of the determinant-law value at x_star; the
/// smaller singular value is replaced by scale^2 / (larger).
RotSvd rot_svd(const Mat2<double>& phi_star, double scale);

DensityRecord rho_prime(double lambda, const MweylConfig& cfg = {});
DensityRecord rho_prime_naive(double lambda, const MweylConfig& cfg = {});

/// Parallel map of rho_prime (or the naive route) over a lambda grid.
std::vector<DensityRecord> density_grid(const std::vector<double>& lambdas,
                                        const MweylConfig& cfg = {}, bool naive = false);

}  // namespace sdens
