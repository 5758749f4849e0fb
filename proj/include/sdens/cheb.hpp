#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

// Chebyshev-Lobatto collocation on the complex segment
//   Gamma = { lambda + i ell theta : theta in [0, 1] },
// sampled at theta_k = (1 - cos(k pi / n))/2 for k = 1..n (the node at
// theta = 0 is the extrapolation target, not a sample). The degree-(n-1)
// interpolant is evaluated at theta = 0 by an alternating sum that is
// exact for this node set. Mode diagnostics recover the Chebyshev
// coefficients of q(theta) = sum q_j T_j(1 - 2 theta), whose geometric
// decay rate measures the analyticity margin and whose roundoff plateau
// drives the segment-length autotuner.

namespace sdens {

using Cplx = std::complex<double>;

struct ChebSegment {
  double lambda = 0.0;
  double ell = 0.0;
  int n = 0;
  std::vector<double> theta;          // theta_k, k = 1..n; theta_n = 1

  Cplx node(int k) const { return {lambda, ell * theta[k]}; }  // k = 0..n-1 -> theta_{k+1}
};

enum class Precision { Double, Extended };

struct PlateauPolicy {
  int run = 3;            // consecutive modes required
  double ratio = 5.0;     // max/min spread within the run
  double rel_floor = 1e-10;  // threshold relative to |q_0|
};

struct ChebDiagnostics {
  std::vector<Cplx> modes;            // q_j, j = 0..n-1
  double decay_rate = 0.0;            // fitted -d ln|q_j| / dj
  std::optional<int> plateau_index;   // first index of a qualifying run
};

struct TuneFailed : std::runtime_error {
  explicit TuneFailed(const std::string& what) : std::runtime_error(what) {}
};

// ell = 13 lambda / (11 + lambda^{-11/8})        (double precision)
//       1.85 lambda / (9 + lambda^{-11/8})       (extended precision)
double segment_length(double lambda, Precision prec = Precision::Double);

// Default node count: 25 in double precision, 48 in extended.
int default_node_count(Precision prec = Precision::Double);
// Accuracy-driven alternative: ceil(0.6226 ln(1/delta)).
int node_count_for(double delta);

// n < 0 selects the precision's default node count.
ChebSegment make_segment(double lambda, Precision prec = Precision::Double, int n = -1);
ChebSegment make_segment_ell(double lambda, double ell, int n);

// q(0) of the interpolant through values at theta_1..theta_n:
//   q(0) = (-1)^{n-1} q(theta_n) - 2 sum_{k=1}^{n-1} (-1)^k q(theta_k).
Cplx extrapolate(const std::vector<Cplx>& values);

// Chebyshev coefficients via the discrete cosine relation on the Lobatto
// grid augmented with the extrapolated q(0); first/last coefficients carry
// the halving convention. modes.size() == values.size().
ChebDiagnostics modes(const std::vector<Cplx>& values, const PlateauPolicy& pol = {});

// Scale ell by factors of 1.5 (at most 6 iterations, within
// [ell0/8, 8 ell0]) until the roundoff plateau first appears at index
// >= n-3. sampler maps a segment node to a sample value.
ChebSegment autotune_ell(double lambda, const std::function<Cplx(Cplx)>& sampler,
                         const ChebSegment& seg, const PlateauPolicy& pol = {});

// sum_k 1/theta_k, equal to (2n^2+1)/3
double node_sum(int n);

}  // namespace sdens
