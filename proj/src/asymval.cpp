#include "sdens/asymval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <utility>

#include "sdens/quadrature.hpp"
#include "sdens/series.hpp"
#include "sdens/special.hpp"
#include "sdens/systems.hpp"

namespace sdens {

namespace {

// Real-axis sweeps carry no growth direction, so the stiff step-size rule can
// be relaxed by a flat factor; the cap keeps every step inside the collocation
// accuracy radius once the rule's frequency bound goes slack at large x.
// Mirrors the transform-side sweep profile.
constexpr double kSweepSafety = 8.0;
constexpr double kSweepMaxH = 0.25;

// Envelope series terms kept per order (Full, Mid, Low).  The dropped phase
// term sets each truncation's decay order; the envelope keeps one extra term
// so its own error stays subleading to the phase error at every order.
int envelope_terms(WkbOrder order) {
  switch (order) {
    case WkbOrder::Full: return 4;
    default: return 3;
  }
}

// Phase bracket terms kept per order.
int phase_terms(WkbOrder order) {
  switch (order) {
    case WkbOrder::Full: return 6;
    case WkbOrder::Mid: return 5;
    default: return 4;
  }
}

}  // namespace

double wkb_envelope(double x, double lambda, WkbOrder order) {
  const double u = 1.0 / (x * lambda);
  const double c[4] = {1.0, 1.0 / 8.0, 5.0 / 128.0, 15.0 / 1024.0};
  double p = 0.0;
  for (int k = envelope_terms(order) - 1; k >= 0; --k) p = p * u + c[k];
  return std::pow(x, 0.75) * p;
}

double wkb_phase(double x, double lambda, WkbOrder order) {
  // The phase reaches ~1e6 rad, where double assembly alone rounds to a few
  // ulp ~ 4e-10 rad and pollutes residuals at the 1e-8 level.  Only the
  // phase modulo 2 pi matters to the model, so assemble in extended
  // precision and reduce before returning.
  const long double xl = x, ll = lambda;
  const long double u = 1.0L / (xl * ll);
  const int terms = phase_terms(order);
  long double b = 0.4L * xl * xl * ll * ll - xl * ll / 6.0L - 0.0625L;
  if (terms >= 4) b += u / 64.0L;
  if (terms >= 5) b += 5.0L / 3072.0L * u * u;
  if (terms >= 6) {
    b += (7.0L / (20480.0L * ll * ll * ll) - 9.0L * ll / 160.0L) / (xl * xl * xl);
  }
  const long double ph = sqrtl(2.0L * xl * ll) / (ll * ll) * b;
  constexpr long double kTwoPi = 6.283185307179586476925286766559L;
  return static_cast<double>(ph - kTwoPi * roundl(ph / kTwoPi));
}

double wkb_y(double x, double lambda, double C, double theta, WkbOrder order) {
  return C * wkb_envelope(x, lambda, order) *
         std::cos(wkb_phase(x, lambda, order) - theta);
}

namespace {

// Sub-ulp position remainders only matter through the leading phase rate.
double split_phase(const WkbWindow& w, std::size_t i, double lambda, WkbOrder order) {
  double p = wkb_phase(w.x[i], lambda, order);
  if (i < w.x_lo.size()) {
    p += std::sqrt(2.0 * lambda) * w.x[i] * std::sqrt(w.x[i]) * w.x_lo[i];
  }
  return p;
}

}  // namespace

double wkb_window_y(const WkbWindow& w, std::size_t i, double lambda, double C,
                    double theta, WkbOrder order) {
  return C * wkb_envelope(w.x[i], lambda, order) *
         std::cos(split_phase(w, i, lambda, order) - theta);
}

namespace {

// Ordinary least squares of v against (1, t); returns (intercept, slope).
std::pair<double, double> line_fit(const std::vector<double>& t,
                                   const std::vector<double>& v) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sv = 0.0, stt = 0.0, stv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sv += v[i];
    stt += t[i] * t[i];
    stv += t[i] * v[i];
  }
  const double det = n * stt - st * st;
  if (!(std::abs(det) > 1e-12 * (n * stt + st * st + 1e-300))) {
    throw FitIllConditioned("window centers do not separate: extrapolation regression is singular");
  }
  const double slope = (n * stv - st * sv) / det;
  const double intercept = (sv - slope * st) / n;
  return {intercept, slope};
}

}  // namespace

WkbFit fit_amplitude_phase(const std::vector<WkbWindow>& windows, double lambda) {
  if (windows.size() < 6) {
    throw std::invalid_argument("fit_amplitude_phase: need at least 6 windows");
  }
  WkbFit fit;
  for (const WkbWindow& w : windows) {
    if (w.x.size() < 201 || w.x.size() != w.y.size()) {
      throw std::invalid_argument("fit_amplitude_phase: need at least 201 samples per window");
    }
    // y ~ A E cos(phase) + B E sin(phase) with A = C cos(theta), B = C sin(theta).
    double scc = 0.0, scs = 0.0, sss = 0.0, rc = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < w.x.size(); ++i) {
      const double e = wkb_envelope(w.x[i], lambda, WkbOrder::Full);
      const double p = split_phase(w, i, lambda, WkbOrder::Full);
      const double ec = e * std::cos(p);
      const double es = e * std::sin(p);
      scc += ec * ec;
      scs += ec * es;
      sss += es * es;
      rc += w.y[i] * ec;
      rs += w.y[i] * es;
    }
    const double det = scc * sss - scs * scs;
    if (!(det > 1e-10 * (scc + sss) * (scc + sss))) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "window at x = %.6g has a singular design matrix",
                    w.center);
      throw FitIllConditioned(msg);
    }
    const double a = (sss * rc - scs * rs) / det;
    const double b = (scc * rs - scs * rc) / det;
    double th = std::atan2(b, a);
    if (!fit.theta_k.empty()) {
      // keep the phase-offset sequence continuous across windows
      th -= 2.0 * kPi * std::round((th - fit.theta_k.back()) / (2.0 * kPi));
    }
    fit.centers.push_back(w.center);
    fit.C_k.push_back(std::hypot(a, b));
    fit.theta_k.push_back(th);
  }

  std::vector<double> tc(fit.centers.size()), tt(fit.centers.size());
  for (std::size_t k = 0; k < fit.centers.size(); ++k) {
    tc[k] = std::pow(fit.centers[k], -4.0);
    tt[k] = std::pow(fit.centers[k], -3.5);
  }
  std::tie(fit.C, fit.C_slope) = line_fit(tc, fit.C_k);
  std::tie(fit.theta, fit.theta_slope) = line_fit(tt, fit.theta_k);
  return fit;
}

std::vector<WkbWindow> sample_windows(double lambda, double x0, double spacing,
                                      int nwindows, int nsamples, double dx,
                                      const MweylConfig& cfg, long* steps) {
  if (nwindows < 1 || nsamples < 1) {
    throw std::invalid_argument("sample_windows: empty request");
  }
  std::vector<WkbWindow> out(static_cast<std::size_t>(nwindows));
  std::vector<double> obs;
  for (int k = 0; k < nwindows; ++k) {
    WkbWindow& w = out[static_cast<std::size_t>(k)];
    w.center = x0 + spacing * k;
    w.x.resize(static_cast<std::size_t>(nsamples));
    for (int j = 0; j < nsamples; ++j) {
      w.x[static_cast<std::size_t>(j)] = w.center + dx * (j - (nsamples - 1) / 2.0);
      obs.push_back(w.x[static_cast<std::size_t>(j)]);
    }
    w.y.resize(static_cast<std::size_t>(nsamples));
    w.x_lo.resize(static_cast<std::size_t>(nsamples));
  }
  if (!std::is_sorted(obs.begin(), obs.end())) {
    throw std::invalid_argument("sample_windows: windows overlap or run backwards");
  }

  const double xs = seed_start(lambda);
  if (obs.front() <= xs) {
    throw std::invalid_argument("sample_windows: windows must lie beyond the series seed");
  }
  const auto seed = series_seed<double>(lambda, cfg.series_pairs);
  MatX<double> phi = convert_state(SystemForm::YZ, cfg.form, xs, lambda,
                                   Vec2<double>(seed.eval(xs).col(1)));
  const auto fill = [&](double x, MatX<double>& A) {
    Mat2<double> a;
    system_matrix(cfg.form, x, lambda, a);
    A = a;
  };

  std::size_t seen = 0;
  PropagateControl<double> ctl;
  ctl.observe_at = obs;
  ctl.observe_ext = [&](double x, double x_lo, const MatX<double>& p) {
    const std::size_t k = seen / static_cast<std::size_t>(nsamples);
    const std::size_t j = seen % static_cast<std::size_t>(nsamples);
    out[k].x[j] = x;
    out[k].x_lo[j] = x_lo;
    out[k].y[j] = p(0, 0);
    ++seen;
  };

  IrkOptions irk = cfg.irk;
  irk.safety *= kSweepSafety;
  if (irk.fixed_h <= 0.0) irk.max_h = kSweepMaxH;
  // Step density follows the bound at the window's own spectral parameter:
  // for lambda < 1 the far-field bound shrinks like sqrt(lambda), and the
  // long sweeps out to x ~ 900 would otherwise pay a ~5x step surcharge.
  const auto res = propagate<double>(fill, 2, xs, obs.back() + 0.25, phi,
                                     lambda, irk, ctl);
  if (steps) *steps += res.steps;
  if (seen != obs.size()) {
    throw MaxStepsExceeded("sample_windows: sweep ended before the last window");
  }
  return out;
}

double extremum_growth_ratio(double lambda, const MweylConfig& cfg) {
  const double xs = seed_start(lambda);
  const auto seed = series_seed<double>(lambda, cfg.series_pairs);
  MatX<double> phi = convert_state(SystemForm::YZ, cfg.form, xs, lambda,
                                   Vec2<double>(seed.eval(xs).col(1)));
  const auto fill = [&](double x, MatX<double>& A) {
    Mat2<double> a;
    system_matrix(cfg.form, x, lambda, a);
    A = a;
  };

  std::vector<double> extrema;
  PropagateControl<double> ctl;
  ctl.event = [&](double x, const MatX<double>& p) {
    if (extrema.size() >= 2) return 1.0;
    Vec2<double> st{p(0, 0), p(1, 0)};
    return x * convert_state(cfg.form, SystemForm::SchrodingerLike, x, lambda, st)(1);
  };
  ctl.on_event = [&](double, const MatX<double>& p) {
    extrema.push_back(p(0, 0));
    return extrema.size() >= 2;
  };

  IrkOptions irk = cfg.irk;
  irk.safety *= kSweepSafety;
  if (irk.fixed_h <= 0.0) irk.max_h = kSweepMaxH;
  const double cap = 60.0 + 1.5 / lambda;
  propagate<double>(fill, 2, xs, cap, phi, std::max(lambda, 1.0), irk, ctl);
  if (extrema.size() < 2 || !(extrema[0] > 0.0) || !(extrema[1] < 0.0)) {
    throw ExtremumNotFound("extremum_growth_ratio: first two extrema not found below x = " +
                           std::to_string(cap));
  }
  return std::abs(extrema[1]) / extrema[0];
}

double lemma4_integrand(double x) {
  return 1.0 / std::sqrt(psi(x)) - std::sqrt(2.0) * x * std::sqrt(x);
}

double lemma4_constant() {
  // Beyond x = 20 the integrand is ~ sqrt(2/pi) x^{5/2} e^{-x^2} < 1e-100:
  // the cut-off tail is far below the 1e-10 refinement target.
  double prev = 0.0;
  for (int panels = 4; panels <= 512; panels *= 2) {
    const double cur = gl_integrate_panels(lemma4_integrand, 0.0, 20.0, 16, panels);
    if (panels > 4 && std::abs(cur - prev) <= 1e-10) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace sdens
