#include "sdens/mweyl.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "sdens/series.hpp"

namespace sdens {

namespace {

// determinant of the normalized fundamental pair in each form
double det_law(SystemForm form, double x, double lambda) {
  switch (form) {
    case SystemForm::YZ:
      return x;
    case SystemForm::SchrodingerLike:
      return 1.0;
    case SystemForm::Balanced:
      return 1.0 / std::sqrt(lambda * psi(x));
  }
  throw std::logic_error("det_law: bad form");
}

void parallel_nodes(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  const int nt = std::min(threads, n);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= n) return;
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

ChebSegment pick_segment(double lambda, const MweylConfig& cfg) {
  const double ell = cfg.ell > 0.0 ? cfg.ell : segment_length(lambda, cfg.precision);
  const int n = cfg.n_cheb > 0 ? cfg.n_cheb : default_node_count(cfg.precision);
  return make_segment_ell(lambda, ell, n);
}

// recombine the extrapolated tail coefficient with the rotation SVD factors
Cplx recombine(const RotSvd& svd, Cplx m_tilde, bool* low_branch = nullptr) {
  const Cplx mu = (svd.a + svd.b * m_tilde) / (svd.b - svd.a * m_tilde);
  const double alpha2 = svd.alpha * svd.alpha;
  if (std::abs(svd.c) <= std::abs(svd.d)) {
    if (low_branch) *low_branch = true;
    const double beta = svd.c / svd.d;
    return -beta + (1.0 + beta * beta) / (alpha2 / mu + beta);
  }
  if (low_branch) *low_branch = false;
  const double binv = svd.d / svd.c;
  return binv - (1.0 + binv * binv) / (mu / alpha2 + binv);
}

// the algebraically identical partner of recombine's chosen branch
Cplx recombine_other(const RotSvd& svd, Cplx m_tilde) {
  const Cplx mu = (svd.a + svd.b * m_tilde) / (svd.b - svd.a * m_tilde);
  const double alpha2 = svd.alpha * svd.alpha;
  if (std::abs(svd.c) <= std::abs(svd.d)) {
    const double binv = svd.d / svd.c;
    return binv - (1.0 + binv * binv) / (mu / alpha2 + binv);
  }
  const double beta = svd.c / svd.d;
  return -beta + (1.0 + beta * beta) / (alpha2 / mu + beta);
}

DensityRecord assemble(double lambda, const StarData& star, const RotSvd& svd,
                       const ChebSegment& seg, const std::vector<Cplx>& values, long steps) {
  DensityRecord rec;
  rec.lambda = lambda;
  rec.Y = star.Y;
  rec.x_star = star.x_star;
  rec.segment_length = seg.ell;
  rec.steps = steps;
  rec.m_tilde_plus = extrapolate(values);
  rec.cheb_modes = modes(values).modes;
  rec.m_plus = recombine(svd, rec.m_tilde_plus);

  // near the branch boundary both formulas must agree (diagnostic)
  const double cd = std::min(std::abs(svd.c), std::abs(svd.d)) /
                    std::max(std::abs(svd.c), std::abs(svd.d));
  if (cd > 0.9) {
    const Cplx other = recombine_other(svd, rec.m_tilde_plus);
    if (std::abs(other - rec.m_plus) > 1e-6 * std::abs(rec.m_plus)) {
      throw BranchInconsistency("branch formulas disagree near |beta| = 1");
    }
  }
  rec.rho_prime = rec.m_plus.imag() / kPi;
  return rec;
}

}  // namespace

double seed_start(double abs_lambda) {
  return std::min(0.05, 0.5 / std::sqrt(std::max(abs_lambda, 1.0)));
}

StarData find_star(double lambda, const MweylConfig& cfg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("find_star: lambda must be positive");
  const double x0 = seed_start(lambda);
  const auto seed = series_seed<double>(lambda, cfg.series_pairs);
  const Mat2<double> phi0 =
      convert(SystemForm::YZ, cfg.form, x0, lambda, Mat2<double>(seed.eval(x0)));

  MatX<double> phi = phi0;
  const auto fill = [&](double x, MatX<double>& A) {
    Mat2<double> a;
    system_matrix(cfg.form, x, lambda, a);
    A = a;
  };

  // x Psi y1': zero exactly at extrema of the regular solution
  const auto slope = [&](double x, const MatX<double>& p) {
    Vec2<double> st{p(0, 1), p(1, 1)};
    return x * convert_state(cfg.form, SystemForm::SchrodingerLike, x, lambda, st)(1);
  };

  PropagateControl<double> ctl;
  ctl.event = slope;
  ctl.on_event = [](double, const MatX<double>& p) { return p(0, 1) < 0.0; };

  const double cap = cfg.x_cap > 0.0 ? cfg.x_cap : 60.0 + 1.5 / lambda;
  auto res = propagate<double>(fill, 2, x0, cap, phi, lambda, cfg.irk, ctl);
  if (!(res.stopped && res.event_found)) {
    throw ExtremumNotFound("no negative extremum of y1 below x = " + std::to_string(cap));
  }

  StarData star;
  star.x_star = res.x;
  star.y_max = phi(0, 1);
  star.Y = std::sqrt(1.0 + star.y_max * star.y_max);
  star.Phi_star = phi;
  return star;
}

Cplx m_limit(Cplx lambda, double x_start, const Mat2<Cplx>& start, const MweylConfig& cfg,
             long* steps) {
  MatX<Cplx> phi = start;
  const Cplx w0 = wronskian(cfg.form, x_start, lambda, start);
  const auto fill = [&](double x, MatX<Cplx>& A) {
    Mat2<Cplx> a;
    system_matrix(cfg.form, x, lambda, a);
    A = a;
  };
  PropagateControl<Cplx> ctl;
  ctl.after_step = [&](double x, const MatX<Cplx>& p) {
    const Cplx w = wronskian(cfg.form, x, lambda, Mat2<Cplx>(p));
    return std::abs(w / w0 - 1.0) <= cfg.drift_threshold;
  };
  const double cap = cfg.x_cap > 0.0 ? cfg.x_cap : 2500.0;
  auto res = propagate<Cplx>(fill, 2, x_start, cap, phi, std::abs(lambda), cfg.irk, ctl);
  if (steps) *steps += res.steps;
  if (!res.stopped) {
    throw MaxStepsExceeded("Wronskian drift did not reach the stop threshold");
  }
  return -phi(0, 0) / phi(0, 1);
}

RotSvd rot_svd(const Mat2<double>& phi_star, double scale) {
  const double E = 0.5 * (phi_star(0, 0) + phi_star(1, 1));
  const double F = 0.5 * (phi_star(0, 0) - phi_star(1, 1));
  const double G = 0.5 * (phi_star(1, 0) + phi_star(0, 1));
  const double H = 0.5 * (phi_star(1, 0) - phi_star(0, 1));
  const double q = std::hypot(E, H);
  const double r = std::hypot(F, G);
  const double s1 = q + r;
  if (!(s1 > 0.0) || !(scale > 0.0)) {
    throw DegenerateMatrix("rot_svd: vanishing larger singular value or scale");
  }
  const double a1 = std::atan2(H, E);
  const double a2 = std::atan2(G, F);
  RotSvd out;
  out.a = std::cos(0.5 * (a1 + a2));
  out.b = std::sin(0.5 * (a1 + a2));
  out.c = std::cos(0.5 * (a2 - a1));
  out.d = std::sin(0.5 * (a2 - a1));
  out.alpha = std::max(1.0, s1 / scale);
  out.scale = scale;
  return out;
}

DensityRecord rho_prime(double lambda, const MweylConfig& cfg) {
  const StarData star = find_star(lambda, cfg);
  const double scale = std::sqrt(det_law(cfg.form, star.x_star, lambda));
  const RotSvd svd = rot_svd(star.Phi_star, scale);

  std::atomic<long> steps{0};
  const Mat2<Cplx> ident = Mat2<Cplx>::Identity();
  const auto sampler = [&](Cplx lam) {
    long local = 0;
    const Cplx v = m_limit(lam, star.x_star, ident, cfg, &local);
    steps += local;
    return v;
  };

  ChebSegment seg = pick_segment(lambda, cfg);
  if (cfg.autotune) {
    try {
      seg = autotune_ell(lambda, sampler, seg);
    } catch (const TuneFailed&) {
      seg = pick_segment(lambda, cfg);  // formula fallback
    }
  }

  std::vector<Cplx> values(seg.n);
  parallel_nodes(seg.n, cfg.threads, [&](int k) { values[k] = sampler(seg.node(k)); });
  return assemble(lambda, star, svd, seg, values, steps.load());
}

DensityRecord rho_prime_naive(double lambda, const MweylConfig& cfg) {
  const StarData star = find_star(lambda, cfg);  // only for the Y / x* record fields
  const double x0 = seed_start(lambda);

  std::atomic<long> steps{0};
  const auto sampler = [&](Cplx lam) {
    const auto seed = series_seed<Cplx>(lam, cfg.series_pairs);
    const Mat2<Cplx> phi0 =
        convert(SystemForm::YZ, cfg.form, x0, lam, Mat2<Cplx>(seed.eval(x0)));
    long local = 0;
    const Cplx v = m_limit(lam, x0, phi0, cfg, &local);
    steps += local;
    return v;
  };

  ChebSegment seg = pick_segment(lambda, cfg);
  std::vector<Cplx> values(seg.n);
  parallel_nodes(seg.n, cfg.threads, [&](int k) { values[k] = sampler(seg.node(k)); });

  DensityRecord rec;
  rec.lambda = lambda;
  rec.Y = star.Y;
  rec.x_star = star.x_star;
  rec.segment_length = seg.ell;
  rec.steps = steps.load();
  rec.m_plus = extrapolate(values);
  rec.m_tilde_plus = rec.m_plus;
  rec.cheb_modes = modes(values).modes;
  rec.rho_prime = rec.m_plus.imag() / kPi;
  return rec;
}

std::vector<DensityRecord> density_grid(const std::vector<double>& lambdas,
                                        const MweylConfig& cfg, bool naive) {
  std::vector<DensityRecord> out(lambdas.size());
  MweylConfig local = cfg;
  local.threads = 1;  // the grid map owns the parallelism
  parallel_nodes(static_cast<int>(lambdas.size()), cfg.threads, [&](int i) {
    out[i] = naive ? rho_prime_naive(lambdas[i], local) : rho_prime(lambdas[i], local);
  });
  return out;
}

}  // namespace sdens
