#include "sdens/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <utility>

#include "sdens/irk.hpp"
#include "sdens/mweyl.hpp"
#include "sdens/quadrature.hpp"
#include "sdens/series.hpp"
#include "sdens/special.hpp"
#include "sdens/systems.hpp"

namespace sdens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kFourInvSqrtPi = 4.0 * 0.5641895835477562869;  // 4 / sqrt(pi)

std::string variable_name(GridVariable v) {
  return v == GridVariable::Sigma ? "sigma" : "xi";
}

// Largest magnitude in a sample vector.
double peak(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double lambda_of_xi(double xi) {
  const double r = std::sqrt(1.0 + xi * xi);
  // (sqrt(1+xi^2) - |xi|) loses digits for large |xi|; each sign uses the
  // branch whose sum has no cancellation.
  if (xi >= 0.0) {
    const double s = r + xi;
    return 25.0 * s * s;
  }
  const double s = r - xi;
  return 25.0 / (s * s);
}

GridHierarchy GridHierarchy::sigma() { return GridHierarchy{GridVariable::Sigma, -4.0, 14.0, 768, 12}; }

GridHierarchy GridHierarchy::xi() { return GridHierarchy{GridVariable::Xi, -15.0, 81.0, 768, 12}; }

double GridHierarchy::lambda_at(int level, long j) const {
  const double v = node(level, j);
  return variable == GridVariable::Sigma ? std::exp(v) : lambda_of_xi(v);
}

std::vector<double> GridHierarchy::lambdas(int level) const {
  std::vector<double> out(count(level));
  for (long j = 0; j < count(level); ++j) out[j] = lambda_at(level, j);
  return out;
}

SpectralSamples ftilde_samples(const TransformTable& table, const GridHierarchy& hier, double t,
                               int level, int filter_cutoff) {
  if (t < table.t_star) {
    throw TimeBeforeTStar("requested t = " + std::to_string(t) +
                          " is earlier than the table's t_star = " + std::to_string(table.t_star));
  }
  if (level < 0 || level > hier.max_level) {
    throw std::invalid_argument("ftilde_samples: level out of range");
  }
  if (table.variable != hier.variable) {
    throw std::invalid_argument("ftilde_samples: table and hierarchy use different variables");
  }
  const long n0 = hier.count(0);
  if (static_cast<long>(table.lambda.size()) != n0) {
    throw std::invalid_argument("ftilde_samples: table size does not match the base grid");
  }

  std::vector<double> base(n0);
  for (long j = 0; j < n0; ++j) {
    const double lam = table.lambda[j];
    if (std::abs(lam - hier.lambda_at(0, j)) > 1e-9 * std::max(1.0, lam)) {
      throw std::invalid_argument("ftilde_samples: table grid does not match the hierarchy");
    }
    double v = table.fhat[j] * table.Y[j] * table.rho_prime[j] * lam * std::exp(-lam * table.t_star);
    if (hier.variable == GridVariable::Xi) {
      const double xi = hier.node(0, j);
      v *= 2.0 / std::sqrt(1.0 + xi * xi);
    }
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ftilde_samples: table row " + std::to_string(j) +
                                  " is not finite");
    }
    base[j] = v;
  }

  SpectralSamples out;
  out.variable = hier.variable;
  out.level = level;
  out.t_star = table.t_star;
  out.t = t;
  out.filter_cutoff = filter_cutoff;

  const long n = hier.count(level);
  if (level == 0 && filter_cutoff < 0) {
    out.values = base;
  } else {
    std::vector<Cplx> modes0 = dft(std::vector<Cplx>(base.begin(), base.end()));
    if (filter_cutoff >= 0) {
      for (long k = 0; k < n0; ++k) {
        if (std::min(k, n0 - k) > filter_cutoff) modes0[k] = Cplx(0.0, 0.0);
      }
    }
    const std::vector<Cplx> fine =
        idft(n == n0 ? modes0 : zero_pad_modes(modes0, static_cast<std::size_t>(n)));
    out.values.resize(n);
    for (long j = 0; j < n; ++j) out.values[j] = fine[j].real();
  }
  for (long j = 0; j < n; ++j) {
    out.values[j] *= std::exp(-hier.lambda_at(level, j) * (t - table.t_star));
  }
  out.modes = dft(std::vector<Cplx>(out.values.begin(), out.values.end()));
  return out;
}

void require_edge_decay(const SpectralSamples& samples, double threshold) {
  const auto& v = samples.values;
  const long n = static_cast<long>(v.size());
  if (n == 0) return;
  const double vmax = peak(v);
  if (vmax == 0.0) return;
  const long m = std::min<long>(8, n / 2);
  double edge = 0.0;
  for (long j = 0; j < m; ++j) {
    edge = std::max(edge, std::abs(v[j]));
    edge = std::max(edge, std::abs(v[n - 1 - j]));
  }
  if (edge > threshold * vmax) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "spectral profile has not decayed at the grid edges (edge/peak = %.3e); "
                  "widen the grid or raise t*",
                  edge / vmax);
    throw UnresolvedTransform(buf);
  }
}

// ---------------------------------------------------------------------------
// basis sweeps

namespace {

struct SweepOut {
  double Y = 1.0;
  std::vector<double> y;  // y1 at the requested xs
};

// One real-lambda sweep of the regular solution: observes y1 at every x in
// xs (ascending, unique) and captures the first negative extremum for Y.
// xs at or below the series seed point are evaluated from the series.
SweepOut basis_sweep(double lambda, const std::vector<double>& xs, const TransformOptions& opt,
                     long* steps_out) {
  const MweylConfig& cfg = opt.mweyl;
  const double x0 = seed_start(lambda);
  const auto seed = series_seed<double>(lambda, cfg.series_pairs);

  SweepOut out;
  out.y.assign(xs.size(), kNaN);
  std::vector<double> obs;
  std::vector<std::size_t> obs_idx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= x0) {
      out.y[i] = seed.eval(xs[i])(0, 1);
    } else {
      obs.push_back(xs[i]);
      obs_idx.push_back(i);
    }
  }

  MatX<double> phi = convert_state(SystemForm::YZ, cfg.form, x0, lambda,
                                   Vec2<double>(seed.eval(x0).col(1)));
  const auto fill = [&](double x, MatX<double>& A) {
    Mat2<double> a;
    system_matrix(cfg.form, x, lambda, a);
    A = a;
  };

  bool star = false;
  double y_max = 0.0;
  std::size_t seen = 0;

  PropagateControl<double> ctl;
  // x Psi y1', zero at extrema; constant after the capture so that no
  // further sign change triggers the event bisection.
  ctl.event = [&](double x, const MatX<double>& p) {
    if (star) return 1.0;
    Vec2<double> st{p(0, 0), p(1, 0)};
    return x * convert_state(cfg.form, SystemForm::SchrodingerLike, x, lambda, st)(1);
  };
  ctl.on_event = [&](double, const MatX<double>& p) {
    if (!star && p(0, 0) < 0.0) {
      star = true;
      y_max = p(0, 0);
    }
    return false;  // never stop here: observations may lie further out
  };
  ctl.observe_at = obs;
  ctl.observe = [&](double, const MatX<double>& p) { out.y[obs_idx[seen++]] = p(0, 0); };
  ctl.after_step = [&](double, const MatX<double>&) { return !(star && seen == obs.size()); };

  const double cap =
      std::max(60.0 + 1.5 / lambda, (obs.empty() ? x0 : obs.back()) + 0.5);
  IrkOptions irk = cfg.irk;
  irk.safety *= opt.sweep_safety;
  if (opt.sweep_max_h > 0.0) irk.max_h = opt.sweep_max_h;
  const auto res =
      propagate<double>(fill, 2, x0, cap, phi, std::max(lambda, 1.0), irk, ctl);
  if (steps_out) *steps_out += res.steps;
  if (!star) {
    throw ExtremumNotFound("basis sweep found no negative extremum of y1 below x = " +
                           std::to_string(cap));
  }
  if (seen != obs.size()) {
    throw MaxStepsExceeded("basis sweep ended before reaching every observation point");
  }
  out.Y = std::sqrt(1.0 + y_max * y_max);
  return out;
}

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::ifstream& i, T& v) {
  return static_cast<bool>(i.read(reinterpret_cast<char*>(&v), sizeof v));
}

constexpr char kMagic[8] = {'S', 'D', 'B', 'A', 'S', 'I', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

// ---------------------------------------------------------------------------
// BasisCache

BasisCache::BasisCache(GridHierarchy hier, std::filesystem::path dir, TransformOptions sweep)
    : hier_(hier), dir_(std::move(dir)), opt_(std::move(sweep)) {
  levels_.resize(hier_.max_level + 1);
}

long BasisCache::owned_count(int level) const {
  return level == 0 ? hier_.count(0) : hier_.count(level) / 2;
}

// Walks a node down to the coarsest level containing it: even indices are
// inherited, so a level owns exactly its odd indices (level 0 owns all).
void BasisCache::locate(int level, long index, int& owner, long& slot) const {
  while (level > 0 && (index & 1) == 0) {
    index >>= 1;
    --level;
  }
  owner = level;
  slot = level == 0 ? index : (index - 1) / 2;
}

std::filesystem::path BasisCache::level_dir(int level) const {
  return dir_ / variable_name(hier_.variable) / ("p" + std::to_string(level));
}

void BasisCache::load(int level) {
  Level& L = levels_[level];
  if (L.loaded) return;
  L.loaded = true;
  if (dir_.empty()) return;
  std::ifstream in(level_dir(level) / "basis.bin", std::ios::binary);
  if (!in) return;

  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) return;
  std::uint32_t version = 0, variable = 0;
  std::int64_t lvl = 0, owned = 0, base = 0, xcount = 0;
  double left = 0.0, right = 0.0;
  if (!get(in, version) || !get(in, variable) || !get(in, lvl) || !get(in, owned) ||
      !get(in, left) || !get(in, right) || !get(in, base) || !get(in, xcount)) {
    return;
  }
  // a stale or foreign file is simply ignored and later overwritten
  if (version != kVersion || variable != static_cast<std::uint32_t>(hier_.variable) ||
      lvl != level || owned != owned_count(level) || left != hier_.left ||
      right != hier_.right || base != hier_.base_count) {
    return;
  }

  std::map<double, std::vector<double>> parsed;
  for (std::int64_t e = 0; e < xcount; ++e) {
    double x = 0.0;
    std::int64_t nrec = 0;
    if (!get(in, x) || !get(in, nrec) || nrec < 0 || nrec > owned) return;
    std::vector<double> row(owned, kNaN);
    for (std::int64_t r = 0; r < nrec; ++r) {
      std::int64_t slot = 0;
      double gval = 0.0;
      if (!get(in, slot) || !get(in, gval) || slot < 0 || slot >= owned) return;
      row[slot] = gval;
    }
    parsed.emplace(x, std::move(row));
  }
  L.by_x = std::move(parsed);  // committed only after a complete parse
}

void BasisCache::store(int level) {
  Level& L = levels_[level];
  if (dir_.empty() || !L.dirty) return;
  const auto dir = level_dir(level);
  std::filesystem::create_directories(dir);
  const auto tmp = dir / "basis.bin.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(hier_.variable));
    put(out, static_cast<std::int64_t>(level));
    put(out, static_cast<std::int64_t>(owned_count(level)));
    put(out, hier_.left);
    put(out, hier_.right);
    put(out, static_cast<std::int64_t>(hier_.base_count));
    put(out, static_cast<std::int64_t>(L.by_x.size()));
    for (const auto& [x, row] : L.by_x) {
      std::int64_t nrec = 0;
      for (double gv : row) nrec += std::isfinite(gv) ? 1 : 0;
      put(out, x);
      put(out, nrec);
      for (std::int64_t s = 0; s < static_cast<std::int64_t>(row.size()); ++s) {
        if (std::isfinite(row[s])) {
          put(out, s);
          put(out, row[s]);
        }
      }
    }
    if (!out) return;  // leave the old file in place on a write failure
  }
  std::filesystem::rename(tmp, dir / "basis.bin");

  std::ofstream idx(dir / "index.json", std::ios::trunc);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\n  \"format\": \"SDBASIS1\",\n  \"version\": %u,\n  \"variable\": \"%s\",\n"
                "  \"level\": %d,\n  \"bounds\": [%.17g, %.17g],\n  \"base_count\": %ld,\n"
                "  \"owned_nodes\": %ld,\n  \"entries\": [",
                kVersion, variable_name(hier_.variable).c_str(), level, hier_.left, hier_.right,
                hier_.base_count, owned_count(level));
  idx << buf;
  bool first = true;
  for (const auto& [x, row] : L.by_x) {
    long nrec = 0;
    for (double gv : row) nrec += std::isfinite(gv) ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%s\n    {\"x\": %.17g, \"records\": %ld}", first ? "" : ",", x,
                  nrec);
    idx << buf;
    first = false;
  }
  idx << "\n  ]\n}\n";
  L.dirty = false;
}

void BasisCache::ensure(int level, const std::vector<double>& xs, const std::vector<long>& need) {
  if (level < 0 || level > hier_.max_level) {
    throw std::invalid_argument("BasisCache::ensure: level out of range");
  }
  for (int q = 0; q <= level; ++q) load(q);

  std::vector<double> xs_sorted(xs);
  std::sort(xs_sorted.begin(), xs_sorted.end());
  xs_sorted.erase(std::unique(xs_sorted.begin(), xs_sorted.end()), xs_sorted.end());
  if (xs_sorted.empty() || !(xs_sorted.front() >= 0.0)) {
    throw std::invalid_argument("BasisCache::ensure: xs must be nonnegative");
  }

  std::vector<std::vector<long>> slots(level + 1);
  for (long j : need) {
    if (j < 0 || j >= hier_.count(level)) {
      throw std::invalid_argument("BasisCache::ensure: node index out of range");
    }
    int q;
    long s;
    locate(level, j, q, s);
    slots[q].push_back(s);
  }
  for (int q = 0; q <= level; ++q) {
    auto& v = slots[q];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (double x : xs_sorted) {
      auto& row = levels_[q].by_x[x];
      if (row.empty()) row.assign(owned_count(q), kNaN);
    }
  }

  std::vector<double> missing;
  std::vector<std::vector<double>*> rows;
  for (int q = 0; q <= level; ++q) {
    for (long s : slots[q]) {
      missing.clear();
      rows.clear();
      for (double x : xs_sorted) {
        auto& row = levels_[q].by_x[x];
        if (std::isnan(row[s])) {
          missing.push_back(x);
          rows.push_back(&row);
        }
      }
      if (missing.empty()) continue;
      const double lam = hier_.lambda_at(q, q == 0 ? s : 2 * s + 1);
      const SweepOut sw = basis_sweep(lam, missing, opt_, &steps_);
      ++sweeps_;
      for (std::size_t i = 0; i < missing.size(); ++i) {
        const double x = missing[i];
        (*rows[i])[s] = x == 0.0 ? 1.0 / sw.Y : sw.y[i] / (x * sw.Y);
      }
      levels_[q].dirty = true;
    }
  }
  for (int q = 0; q <= level; ++q) store(q);
}

double BasisCache::g(int level, double x, long index) const {
  int q;
  long s;
  locate(level, index, q, s);
  const auto& by_x = levels_.at(q).by_x;
  const auto it = by_x.find(x);
  if (it == by_x.end() || s >= static_cast<long>(it->second.size()) ||
      std::isnan(it->second[s])) {
    throw std::out_of_range("BasisCache::g: value was not ensured");
  }
  return it->second[s];
}

void BasisCache::flush() {
  for (int q = 0; q <= hier_.max_level; ++q) store(q);
}

// ---------------------------------------------------------------------------
// reconstruction

std::vector<ReconstructResult> reconstruct_many(const std::vector<double>& xs, double t,
                                                const TransformTable& table,
                                                const GridHierarchy& hier, BasisCache& cache,
                                                const ReconstructOptions& opt) {
  if (t < table.t_star) {
    throw TimeBeforeTStar("requested t = " + std::to_string(t) +
                          " is earlier than the table's t_star = " + std::to_string(table.t_star));
  }

  std::vector<double> unique_xs(xs);
  std::sort(unique_xs.begin(), unique_xs.end());
  unique_xs.erase(std::unique(unique_xs.begin(), unique_xs.end()), unique_xs.end());

  std::map<double, ReconstructResult> done;
  for (double x : unique_xs) {
    ReconstructResult r;
    r.x = x;
    r.t = t;
    done.emplace(x, r);
  }

  std::vector<double> active = unique_xs;
  for (int p = 0; p <= hier.max_level && !active.empty(); ++p) {
    const SpectralSamples samples = ftilde_samples(table, hier, t, p, opt.filter_cutoff);
    const long n = static_cast<long>(samples.values.size());
    const double vmax = peak(samples.values);

    std::vector<long> need;
    need.reserve(n);
    for (long j = 0; j < n; ++j) {
      if (std::abs(samples.values[j]) > opt.skip_threshold * vmax) need.push_back(j);
    }
    cache.ensure(p, active, need);

    std::vector<double> still;
    for (double x : active) {
      std::vector<Cplx> gt(n, Cplx(0.0, 0.0));
      for (long j : need) gt[j] = Cplx(cache.g(p, x, j) * samples.values[j], 0.0);
      const std::vector<Cplx> modes = dft(gt);

      double max_mode = 0.0;
      for (const Cplx& m : modes) max_mode = std::max(max_mode, std::abs(m));
      const long half = n / 2;
      const long band = static_cast<long>(0.025 * static_cast<double>(n));
      double trail = 0.0;
      for (long k = half - band; k <= half + band; ++k) trail = std::max(trail, std::abs(modes[k]));

      ReconstructResult& r = done.at(x);
      r.u_tilde = hier.width() * modes[0].real();
      r.u = kFourInvSqrtPi * table.fhat0 + std::exp(0.5 * x * x) * r.u_tilde;
      r.level_used = p;
      r.mode_ratio = max_mode > 0.0 ? trail / max_mode : 0.0;
      r.u_by_level.push_back(r.u);
      if (trail <= opt.tol * max_mode && p >= opt.force_level) {
        r.resolved = true;
      } else {
        still.push_back(x);
      }
    }
    active.swap(still);
  }

  std::vector<ReconstructResult> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(done.at(x));
  return out;
}

ReconstructResult reconstruct_u(double x, double t, const TransformTable& table,
                                const GridHierarchy& hier, BasisCache& cache, double tol) {
  ReconstructOptions opt;
  opt.tol = tol;
  const ReconstructResult r = reconstruct_many({x}, t, table, hier, cache, opt).front();
  if (!r.resolved) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "modes undecayed at level %d (trailing/max = %.3e)",
                  r.level_used, r.mode_ratio);
    throw MaxLevelExceeded(buf, r.mode_ratio);
  }
  return r;
}

double energy(const TransformTable& table, double t) {
  std::vector<double> u, val;
  u.reserve(table.lambda.size());
  val.reserve(table.lambda.size());
  for (std::size_t j = 0; j < table.lambda.size(); ++j) {
    const double lam = table.lambda[j];
    const double f = table.fhat[j];
    const double rho = table.rho_prime[j];
    if (!std::isfinite(lam) || !std::isfinite(f) || !std::isfinite(rho)) continue;
    const double decay = std::exp(-2.0 * lam * t);
    if (table.variable == GridVariable::Sigma) {
      u.push_back(std::log(lam));
      val.push_back(f * f * rho * lam * decay);
    } else {
      const double xi = xi_of_lambda(lam);
      u.push_back(xi);
      val.push_back(f * f * rho * decay * 2.0 * lam / std::sqrt(1.0 + xi * xi));
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    sum += 0.5 * (u[j + 1] - u[j]) * (val[j] + val[j + 1]);
  }
  return sum;
}

double mass(const TransformTable& table, const GridHierarchy& hier, BasisCache& cache, double t,
            const ReconstructOptions& opt, int panels, int nodes) {
  const GaussLegendre& gl = gauss_legendre(nodes);
  const double b = 6.0;  // w(6) ~ 2e-14: the truncated tail is far below 1e-8
  const double pw = b / panels;

  std::vector<double> xs_near, xs_far, wt_near, wt_far;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * pw;
    for (int k = 0; k < nodes; ++k) {
      const double x = mid + 0.5 * pw * gl.node[k];
      const double w = 0.5 * pw * gl.weight[k];
      if (x < 4.0) {
        xs_near.push_back(x);
        wt_near.push_back(w);
      } else {
        xs_far.push_back(x);
        wt_far.push_back(w);
      }
    }
  }

  ReconstructOptions far_opt = opt;
  far_opt.tol = std::max(opt.tol, 1e-9);
  const auto res_near = reconstruct_many(xs_near, t, table, hier, cache, opt);
  const auto res_far = reconstruct_many(xs_far, t, table, hier, cache, far_opt);

  double worst = 0.0;
  int worst_level = 0;
  double sum = 0.0;
  const auto accumulate = [&](const std::vector<ReconstructResult>& rs,
                              const std::vector<double>& wt) {
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (!rs[i].resolved && rs[i].mode_ratio > worst) {
        worst = rs[i].mode_ratio;
        worst_level = rs[i].level_used;
      }
      sum += wt[i] * rs[i].u * weight(rs[i].x);
    }
  };
  accumulate(res_near, wt_near);
  accumulate(res_far, wt_far);
  if (worst > 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "mass quadrature point unresolved at level %d (ratio %.3e)",
                  worst_level, worst);
    throw MaxLevelExceeded(buf, worst);
  }
  return sum;
}

}  // namespace sdens
