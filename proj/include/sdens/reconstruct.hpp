#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdens/dft.hpp"
#include "sdens/transform.hpp"

// Evaluation of the expansion
//   u(x,t) = (4/sqrt(pi)) fhat(0)
//          + e^{x^2/2} integral g(x; lambda) ftil(lambda, t) dvariable
// by the trapezoid rule on nested uniform grids in sigma = log lambda or in
// the stretched variable xi. The integrand splits into two factors:
//
//   g(x; lambda) = y1(x; lambda) / (x Y(lambda)),   one ODE sweep per
//     lambda, expensive but independent of the initial condition, so it is
//     cached on disk per (variable, level, x);
//   ftil = fhat Y rho' e^{-lambda t} dlambda/dvariable,   assembled from the
//     transform table. Finer levels are never recomputed from new density
//     samples: the profile at the table's t_star is interpolated upward by
//     zero-padded Fourier modes, and the remaining factor e^{-lambda (t-t*)}
//     is applied exactly afterwards, so interpolation only ever acts on the
//     profile that is already resolved on the base grid.
//
// On a uniform grid with the right endpoint excluded, the trapezoid value is
// (interval width) x (mean of samples) = width x (Fourier mode 0), and the
// quadrature is resolved exactly when the Fourier modes of the integrand
// have decayed at the top of the band. Escalation doubles the level until
// the trailing modes fall below a tolerance relative to the largest mode.

namespace sdens {

/// Requested evaluation time is earlier than the table's resolvable time.
struct TimeBeforeTStar : std::runtime_error {
  explicit TimeBeforeTStar(const std::string& what) : std::runtime_error(what) {}
};

/// Level escalation hit the hierarchy cap with modes still undecayed.
struct MaxLevelExceeded : std::runtime_error {
  double mode_ratio;  // trailing-mode / max-mode at the last level tried
  MaxLevelExceeded(const std::string& what, double ratio)
      : std::runtime_error(what), mode_ratio(ratio) {}
};

/// Spectral profile has not decayed at the grid edges: the expansion cannot
/// be evaluated on this grid at this time.
struct UnresolvedTransform : std::runtime_error {
  explicit UnresolvedTransform(const std::string& what) : std::runtime_error(what) {}
};

/// lambda = 25 (sqrt(1+xi^2) + xi)^2 on the numerically stable branch:
/// the product form for xi >= 0, the reciprocal form for xi < 0.
double lambda_of_xi(double xi);

/// Nested uniform grids on [left, right): level p has base_count * 2^p
/// nodes, the left endpoint is included, the right excluded, and the nodes
/// of level p sit at the even indices of level p+1.
struct GridHierarchy {
  GridVariable variable = GridVariable::Sigma;
  double left = -4.0;
  double right = 14.0;
  long base_count = 768;
  int max_level = 12;

  /// Default grid in sigma = log lambda on [-4, 14).
  static GridHierarchy sigma();
  /// Default grid in the stretched variable on [-15, 81).
  static GridHierarchy xi();

  long count(int level) const { return base_count << level; }
  double width() const { return right - left; }
  double node(int level, long j) const {
    return left + width() * (static_cast<double>(j) / static_cast<double>(count(level)));
  }
  double lambda_at(int level, long j) const;
  /// lambda values of a whole level, in node order (the density-table grid).
  std::vector<double> lambdas(int level) const;
};

/// One level's samples of the weighted spectral profile at a fixed time.
struct SpectralSamples {
  GridVariable variable = GridVariable::Sigma;
  int level = 0;
  double t_star = 0.0;
  double t = 0.0;
  std::vector<double> values;   // ftil (sigma) or fcheck = 2 ftil / sqrt(1+xi^2)
  std::vector<Cplx> modes;      // forward transform (1/N convention) of values
  int filter_cutoff = -1;       // modes above this index were zeroed, -1 = off
};

/// Samples of the spectral profile at time t on the given level: the base
/// profile comes pointwise from the table at t_star, finer levels by
/// zero-padded Fourier interpolation of that profile, and the factor
/// e^{-lambda (t - t_star)} is applied exactly at the level's own nodes.
/// filter_cutoff >= 0 zeroes base modes above that index first.
SpectralSamples ftilde_samples(const TransformTable& table, const GridHierarchy& hier, double t,
                               int level, int filter_cutoff = -1);

/// Throws UnresolvedTransform unless the first and last 8 samples are all
/// below threshold times the peak magnitude.
void require_edge_decay(const SpectralSamples& samples, double threshold = 1e-10);

/// Disk-backed store of the basis profile g(x; lambda) on hierarchy nodes.
/// Each node's value is computed by one real-lambda ODE sweep that observes
/// every requested x and locates the first negative extremum for Y(lambda);
/// a node shared with a coarser level is stored once at its owning level.
/// Files live under dir/{sigma|xi}/p{level}/basis.bin with a version header
/// and a human-readable index.json; a header mismatch is treated as a stale
/// cache and recomputed. An empty dir keeps the cache in memory only.
class BasisCache {
 public:
  explicit BasisCache(GridHierarchy hier, std::filesystem::path dir = {},
                      TransformOptions sweep = {});

  /// Computes (or loads) g(x; lambda_j) for every x in xs and node index j
  /// of `level` listed in `need`. One sweep per missing lambda covers all
  /// xs at once, in ascending node order.
  void ensure(int level, const std::vector<double>& xs, const std::vector<long>& need);

  /// Value for a node of `level`; the entry must have been ensured.
  double g(int level, double x, long index) const;

  const GridHierarchy& hierarchy() const { return hier_; }
  /// ODE sweeps run so far (cache misses); zero when fully served from disk.
  long sweeps() const { return sweeps_; }
  long steps() const { return steps_; }
  /// Writes dirty levels back to dir (no-op for a memory-only cache).
  void flush();

 private:
  struct Level {
    std::map<double, std::vector<double>> by_x;  // x -> owned-slot values, NaN = missing
    bool loaded = false;
    bool dirty = false;
  };

  long owned_count(int level) const;
  long slot_of(int level, long index) const;
  void locate(int level, long index, int& owner, long& slot) const;
  std::filesystem::path level_dir(int level) const;
  void load(int level);
  void store(int level);

  GridHierarchy hier_;
  std::filesystem::path dir_;
  TransformOptions opt_;
  std::vector<Level> levels_;
  long sweeps_ = 0;
  long steps_ = 0;
};

struct ReconstructOptions {
  /// Trailing Fourier modes of the integrand must fall below tol times the
  /// largest mode for a level to count as resolved.
  double tol = 1e-12;
  /// Zero base modes above this index before interpolation (-1 = off).
  int filter_cutoff = -1;
  /// Profile samples below this fraction of the peak contribute less than
  /// roundoff to the trapezoid; their basis sweeps are skipped and the
  /// product treated as zero.
  double skip_threshold = 1e-15;
  /// Escalate at least to this level before testing the stop criterion.
  int force_level = -1;
};

struct ReconstructResult {
  double x = 0.0;
  double t = 0.0;
  double u = 0.0;        // (4/sqrt(pi)) fhat0 + e^{x^2/2} u_tilde
  double u_tilde = 0.0;  // trapezoid value at level_used
  int level_used = 0;
  bool resolved = false;
  double mode_ratio = 0.0;          // trailing/max mode at level_used
  std::vector<double> u_by_level;   // u at each level tried, first entry = level 0
};

/// Reconstruction at many x for one time, sharing basis sweeps across all
/// of them per level. Unresolved entries carry resolved = false and the
/// mode ratio of the last level tried.
std::vector<ReconstructResult> reconstruct_many(const std::vector<double>& xs, double t,
                                                const TransformTable& table,
                                                const GridHierarchy& hier, BasisCache& cache,
                                                const ReconstructOptions& opt = {});

/// Single-point reconstruction; throws MaxLevelExceeded (with the unresolved
/// mode ratio) if the hierarchy cap is reached before the modes decay.
ReconstructResult reconstruct_u(double x, double t, const TransformTable& table,
                                const GridHierarchy& hier, BasisCache& cache, double tol = 1e-12);

/// integral fhat^2 e^{-2 lambda t} rho' dlambda over the table grid
/// (trapezoid in the table's own variable); non-increasing in t.
double energy(const TransformTable& table, double t);

/// integral_0^6 u(x,t) w(x) dx by Gauss-Legendre panels on the reconstructed
/// solution; equals the transform of u(.,t) at lambda = 0, which the
/// evolution conserves, so the value should match table.fhat0. Points with
/// x >= 4 are reconstructed with a relaxed tolerance: the weight there is
/// below 2e-6, so a looser u_tilde still leaves the integrand error under
/// 1e-9.
double mass(const TransformTable& table, const GridHierarchy& hier, BasisCache& cache, double t,
            const ReconstructOptions& opt = {}, int panels = 4, int nodes = 24);

}  // namespace sdens
