#include "sdens/transform.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "sdens/quadrature.hpp"
#include "sdens/series.hpp"
#include "sdens/special.hpp"

namespace sdens {

namespace {

// x e^{-x^2/2} f(x): the decaying factor that makes every sweep finite.
double integrand_weight(double x, const InitialCondition& f) {
  return x * std::exp(-0.5 * x * x) * f(x);
}

// deterministic parallel map over [0, n)
void parallel_indices(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(threads, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

double xi_of_lambda(double lambda) {
  const double r = std::sqrt(lambda) / 5.0;
  return 0.5 * (r - 1.0 / r);
}

double InitialCondition::operator()(double x) const {
  switch (kind) {
    case Kind::Monomial:
      return power == 0 ? 1.0 : std::pow(x, power);
    case Kind::Polynomial: {
      double acc = 0.0;
      for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
      return acc;
    }
    case Kind::Callable:
      return fn(x);
  }
  return 0.0;
}

InitialCondition InitialCondition::monomial(int p) {
  InitialCondition ic;
  ic.kind = Kind::Monomial;
  ic.power = p;
  ic.description = p == 0 ? "1" : (p == 1 ? "x" : "x^" + std::to_string(p));
  return ic;
}

InitialCondition InitialCondition::polynomial(std::vector<double> c) {
  InitialCondition ic;
  ic.kind = Kind::Polynomial;
  ic.coeffs = std::move(c);
  std::string text = "coeffs:";
  for (size_t k = 0; k < ic.coeffs.size(); ++k) {
    if (k) text += ',';
    text += std::to_string(ic.coeffs[k]);
  }
  ic.description = text;
  return ic;
}

InitialCondition InitialCondition::callable(std::function<double(double)> f, std::string text) {
  InitialCondition ic;
  ic.kind = Kind::Callable;
  ic.fn = std::move(f);
  ic.description = std::move(text);
  return ic;
}

InitialCondition InitialCondition::parse(const std::string& text) {
  if (text.rfind("poly:", 0) == 0) {
    const std::string body = text.substr(5);
    if (body == "1") return monomial(0);
    if (body == "x") return monomial(1);
    if (body.rfind("x^", 0) == 0) {
      const int p = std::stoi(body.substr(2));
      if (p < 0) throw std::invalid_argument("initial condition power must be >= 0: " + text);
      return monomial(p);
    }
    throw std::invalid_argument("unrecognized polynomial initial condition: " + text);
  }
  if (text.rfind("coeffs:", 0) == 0) {
    std::vector<double> c;
    std::string body = text.substr(7);
    size_t pos = 0;
    while (pos <= body.size()) {
      const size_t comma = body.find(',', pos);
      const std::string tok = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (tok.empty()) throw std::invalid_argument("empty coefficient in: " + text);
      c.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (c.empty()) throw std::invalid_argument("no coefficients in: " + text);
    return polynomial(std::move(c));
  }
  throw std::invalid_argument("initial condition must be poly:... or coeffs:... : " + text);
}

double fhat(double lambda, const InitialCondition& f, const TransformOptions& opt, long* steps) {
  if (lambda < 0.0) throw std::invalid_argument("fhat requires lambda >= 0");
  const double x0 = seed_start(lambda);
  const auto seed = series_seed<double>(lambda, opt.mweyl.series_pairs);

  MatX<double> state(3, 1);
  {
    const Mat2<double> phi = seed.eval(x0);
    state(0, 0) = phi(0, 1);  // regular solution y1
    state(1, 0) = phi(1, 1);  // companion z1
    // head of the integral on [0, x0], where the series is exact
    state(2, 0) = gl_integrate(
        [&](double x) { return integrand_weight(x, f) * seed.eval(x)(0, 1); }, 0.0, x0, 24);
  }

  Mat2<double> a2;
  const auto fill = [&](double x, MatX<double>& A) {
    system_matrix(SystemForm::YZ, x, lambda, a2);
    A.setZero();
    A(0, 0) = a2(0, 0);
    A(0, 1) = a2(0, 1);
    A(1, 0) = a2(1, 0);
    A(1, 1) = a2(1, 1);
    A(2, 0) = integrand_weight(x, f);
  };

  IrkOptions irk = opt.mweyl.irk;
  irk.safety *= opt.sweep_safety;
  if (opt.sweep_max_h > 0.0) irk.max_h = opt.sweep_max_h;

  int quiet = 0;
  PropagateControl<double> ctl;
  ctl.after_step = [&](double x, const MatX<double>& s) {
    const double slope = std::abs(integrand_weight(x, f) * s(0, 0));
    if (slope <= opt.stop_floor * std::max(1.0, std::abs(s(2, 0)))) {
      ++quiet;
    } else {
      quiet = 0;
    }
    return quiet < 2;  // require the bound across a full step
  };

  const auto res =
      propagate<double>(fill, 3, x0, opt.x_cap, state, std::max(lambda, 1.0), irk, ctl);
  if (steps) *steps += res.steps;
  if (!res.stopped && res.x < opt.x_cap) {
    throw MaxStepsExceeded("fhat sweep exhausted max_steps at lambda = " +
                           std::to_string(lambda));
  }
  return state(2, 0);
}

double norm_sq(const InitialCondition& f) {
  const auto g = [&](double x) {
    const double v = f(x);
    return v * v * weight(x);
  };
  double prev = gl_integrate_panels(g, 0.0, 12.0, 24, 4);
  for (int panels = 8; panels <= 256; panels *= 2) {
    const double cur = gl_integrate_panels(g, 0.0, 12.0, 24, panels);
    if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

TransformTable density_table(const std::vector<double>& lambdas, const InitialCondition& f,
                             const TransformOptions& opt) {
  const int n = static_cast<int>(lambdas.size());
  TransformTable table;
  table.lambda = lambdas;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.rho_prime.assign(n, nan);
  table.Y.assign(n, nan);
  table.fhat.assign(n, nan);
  table.yrho.assign(n, nan);
  table.steps.assign(n, 0);

  MweylConfig per_point = opt.mweyl;
  per_point.threads = 1;
  TransformOptions sweep = opt;
  sweep.mweyl = per_point;

  std::vector<std::string> errors(n);
  parallel_indices(n, opt.mweyl.threads, [&](int j) {
    try {
      const DensityRecord rec = rho_prime(lambdas[j], per_point);
      long st = rec.steps;
      const double fh = fhat(lambdas[j], f, sweep, &st);
      table.rho_prime[j] = rec.rho_prime;
      table.Y[j] = rec.Y;
      table.fhat[j] = fh;
      table.yrho[j] = rec.Y * rec.rho_prime;
      table.steps[j] = st;
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  });
  for (int j = 0; j < n; ++j) {
    if (!errors[j].empty()) table.failures.emplace_back(j, errors[j]);
  }

  table.fhat0 = fhat(0.0, f, sweep);
  return table;
}

TransformTable retransform(const TransformTable& base, const InitialCondition& f,
                           const TransformOptions& opt) {
  TransformTable table = base;
  TransformOptions sweep = opt;
  sweep.mweyl.threads = 1;
  const int n = static_cast<int>(table.lambda.size());
  std::vector<std::string> errors(n);
  parallel_indices(n, opt.mweyl.threads, [&](int j) {
    if (!std::isfinite(table.rho_prime[j])) return;  // keep recorded failure
    try {
      long st = 0;
      table.fhat[j] = fhat(table.lambda[j], f, sweep, &st);
      table.steps[j] += st;
    } catch (const std::exception& e) {
      errors[j] = e.what();
      table.fhat[j] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  for (int j = 0; j < n; ++j) {
    if (!errors[j].empty()) table.failures.emplace_back(j, errors[j]);
  }
  table.fhat0 = fhat(0.0, f, sweep);
  return table;
}

ParsevalParts parseval_residual(const InitialCondition& f, const TransformTable& table) {
  ParsevalParts parts;
  parts.norm_sq = norm_sq(f);
  parts.jump = table.fhat0 * table.fhat0 * 4.0 * kInvSqrtPi;

  // integrand against the uniform grid variable (log lambda, or xi with its
  // Jacobian), skipping failed rows
  std::vector<double> u, val;
  u.reserve(table.lambda.size());
  val.reserve(table.lambda.size());
  for (size_t j = 0; j < table.lambda.size(); ++j) {
    const double lam = table.lambda[j];
    const double fh = table.fhat[j];
    const double rp = table.rho_prime[j];
    if (!std::isfinite(fh) || !std::isfinite(rp)) continue;
    if (table.variable == GridVariable::Sigma) {
      u.push_back(std::log(lam));
      val.push_back(fh * fh * rp * lam);
    } else {
      const double xi = xi_of_lambda(lam);
      u.push_back(xi);
      val.push_back(fh * fh * rp * 2.0 * lam / std::sqrt(1.0 + xi * xi));
    }
  }
  for (size_t j = 0; j + 1 < u.size(); ++j) {
    parts.integral += 0.5 * (u[j + 1] - u[j]) * (val[j] + val[j + 1]);
  }

  // exponential tail beyond the last node, fitted to the final decaying pair
  if (u.size() >= 2) {
    const double ia = val[u.size() - 2], ib = val[u.size() - 1];
    if (ia > 0.0 && ib > 0.0 && ib < ia) {
      const double c = std::log(ia / ib) / (u[u.size() - 1] - u[u.size() - 2]);
      parts.tail = ib / c;
    }
  }

  parts.residual = parts.norm_sq - parts.jump - parts.integral - parts.tail;
  return parts;
}

}  // namespace sdens
