#include "sdens/cheb.hpp"

#include <cmath>

#include "sdens/special.hpp"

namespace sdens {

double segment_length(double lambda, Precision prec) {
  const double t = std::pow(lambda, -11.0 / 8.0);
  if (prec == Precision::Double) return 13.0 * lambda / (11.0 + t);
  return 1.85 * lambda / (9.0 + t);
}

int default_node_count(Precision prec) { return prec == Precision::Double ? 25 : 48; }

int node_count_for(double delta) {
  return static_cast<int>(std::ceil(0.6226 * std::log(1.0 / delta)));
}

ChebSegment make_segment_ell(double lambda, double ell, int n) {
  ChebSegment s;
  s.lambda = lambda;
  s.ell = ell;
  s.n = n;
  s.theta.resize(n);
  for (int k = 1; k <= n; ++k) s.theta[k - 1] = 0.5 * (1.0 - std::cos(k * kPi / n));
  s.theta[n - 1] = 1.0;
  return s;
}

ChebSegment make_segment(double lambda, Precision prec, int n) {
  if (n < 0) n = default_node_count(prec);
  return make_segment_ell(lambda, segment_length(lambda, prec), n);
}

Cplx extrapolate(const std::vector<Cplx>& values) {
  const int n = static_cast<int>(values.size());
  Cplx q0 = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * values[n - 1];
  for (int k = 1; k <= n - 1; ++k) {
    q0 -= 2.0 * (k % 2 == 0 ? 1.0 : -1.0) * values[k - 1];
  }
  return q0;
}

ChebDiagnostics modes(const std::vector<Cplx>& values, const PlateauPolicy& pol) {
  const int n = static_cast<int>(values.size());
  ChebDiagnostics d;
  d.modes.resize(n);

  // Lobatto samples v_k = q(theta at t = cos(k pi/n)), k = 0..n;
  // v_0 is the extrapolated q(0), v_k = values[k-1] otherwise.
  std::vector<Cplx> v(n + 1);
  v[0] = extrapolate(values);
  for (int k = 1; k <= n; ++k) v[k] = values[k - 1];

  for (int j = 0; j < n; ++j) {
    Cplx s = 0.5 * (v[0] + (j % 2 == 0 ? 1.0 : -1.0) * v[n]);
    for (int k = 1; k < n; ++k) s += v[k] * std::cos(j * k * kPi / n);
    s *= 2.0 / n;
    if (j == 0) s *= 0.5;  // (j == n would be halved too, but is not reported)
    d.modes[j] = s;
  }

  const double q0 = std::abs(d.modes[0]);
  const double floor = pol.rel_floor * q0;
  for (int j = 0; j + pol.run <= n; ++j) {
    double lo = std::abs(d.modes[j]), hi = lo;
    bool below = true;
    for (int r = 0; r < pol.run; ++r) {
      const double a = std::abs(d.modes[j + r]);
      lo = std::min(lo, a);
      hi = std::max(hi, a);
      below = below && a <= floor;
    }
    if (below && hi <= pol.ratio * lo + 1e-30 * q0) {
      d.plateau_index = j;
      break;
    }
  }

  // least-squares slope of ln|q_j| over the decaying range
  const int jend = d.plateau_index.value_or(n);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int j = 0; j < jend; ++j) {
    const double a = std::abs(d.modes[j]);
    if (a <= 0.0) continue;
    const double y = std::log(a);
    sx += j;
    sy += y;
    sxx += static_cast<double>(j) * j;
    sxy += j * y;
    ++cnt;
  }
  if (cnt >= 2) {
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    d.decay_rate = -slope;
  }
  return d;
}

ChebSegment autotune_ell(double lambda, const std::function<Cplx(Cplx)>& sampler,
                         const ChebSegment& seg, const PlateauPolicy& pol) {
  const double ell0 = seg.ell;
  double ell = ell0;
  for (int it = 0; it < 6; ++it) {
    ChebSegment cur = make_segment_ell(lambda, ell, seg.n);
    std::vector<Cplx> vals(cur.n);
    for (int k = 0; k < cur.n; ++k) vals[k] = sampler(cur.node(k));
    const auto diag = modes(vals, pol);
    if (diag.plateau_index && *diag.plateau_index >= cur.n - 3) return cur;
    double next = diag.plateau_index ? ell * 1.5 : ell / 1.5;
    next = std::min(8.0 * ell0, std::max(ell0 / 8.0, next));
    if (next == ell) break;  // pinned at the cap without satisfying the criterion
    ell = next;
  }
  throw TuneFailed("segment length search exhausted without a late plateau");
}

double node_sum(int n) {
  const auto seg = make_segment_ell(1.0, 1.0, n);
  double s = 0.0;
  for (double t : seg.theta) s += 1.0 / t;
  return s;
}

}  // namespace sdens
