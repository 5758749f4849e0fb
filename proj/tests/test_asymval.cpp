#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdens/asymval.hpp"
#include "sdens/mweyl.hpp"
#include "sdens/special.hpp"

using namespace sdens;

namespace {

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Difference of two angles reduced to (-pi, pi].
double angle_diff(double a, double b) {
  double d = a - b;
  return d - 2.0 * kPi * std::round(d / (2.0 * kPi));
}

// Slow-decay constants extrapolated to x = infinity at lambda = 1 and 0.03;
// the 0.03 values were cross-checked against a 5.5x denser step profile
// (agreement ~1e-10 relative).
constexpr double kC1 = 0.443935268193;
constexpr double kTheta1 = -1.61503905377;
constexpr double kC003 = 8.0642095502e30;
constexpr double kTheta003 = -2.3558410221;

constexpr double kOffsetConstant = 1.6246896726759736;

// Log-log least-squares slope of e against centers over window indices [a, b].
double decay_slope(const std::vector<WkbWindow>& wins, const std::vector<double>& e,
                   std::size_t a, std::size_t b) {
  double st = 0, sv = 0, stt = 0, stv = 0;
  int n = 0;
  for (std::size_t w = a; w <= b; ++w) {
    const double t = std::log(wins[w].center), v = std::log(e[w]);
    st += t;
    sv += v;
    stt += t * t;
    stv += t * v;
    ++n;
  }
  return (n * stv - st * sv) / (n * stt - st * st);
}

// Max |data - model| per window for one truncation order, given (C, theta).
std::vector<double> window_residuals(const std::vector<WkbWindow>& wins, double lambda,
                                     double C, double theta, WkbOrder order) {
  std::vector<double> out(wins.size(), 0.0);
  for (std::size_t w = 0; w < wins.size(); ++w) {
    for (std::size_t i = 0; i < wins[w].x.size(); ++i) {
      const double model = wkb_window_y(wins[w], i, lambda, C, theta, order);
      out[w] = std::max(out[w], std::abs(wins[w].y[i] - model));
    }
  }
  return out;
}

// Synthetic window sampled from the model itself.
WkbWindow synthetic_window(double center, int nsamples, double dx, double lambda,
                           double C, double theta) {
  WkbWindow w;
  w.center = center;
  w.x.resize(nsamples);
  w.y.resize(nsamples);
  for (int j = 0; j < nsamples; ++j) {
    w.x[j] = center + dx * (j - (nsamples - 1) / 2);
    w.y[j] = wkb_y(w.x[j], lambda, C, theta);
  }
  return w;
}

}  // namespace

TEST_CASE("envelope and phase keep the documented truncation terms") {
  // Envelope at x = lambda = 1: partial sums of {1, 1/8, 5/128, 15/1024}.
  CHECK(close(wkb_envelope(1.0, 1.0, WkbOrder::Full), 1207.0 / 1024.0, 1e-15));
  CHECK(close(wkb_envelope(1.0, 1.0, WkbOrder::Mid), 1192.0 / 1024.0, 1e-15));
  CHECK(wkb_envelope(1.0, 1.0, WkbOrder::Low) == wkb_envelope(1.0, 1.0, WkbOrder::Mid));

  const double x = 10.0, l = 0.7;
  // Full - Mid envelope difference is exactly the last series term.
  const double env_last = std::pow(x, 0.75) * 15.0 / (1024.0 * x * x * x * l * l * l);
  CHECK(close(wkb_envelope(x, l, WkbOrder::Full) - wkb_envelope(x, l, WkbOrder::Mid),
              env_last, 1e-12));

  // Phase differences are exactly the dropped bracket terms (mod 2 pi).
  const double pref = std::sqrt(2.0 * x * l) / (l * l);
  const double d_full_mid = pref * (7.0 / (20480.0 * l * l * l) - 9.0 * l / 160.0) /
                            (x * x * x);
  const double d_mid_low = pref * 5.0 / (3072.0 * x * x * l * l);
  CHECK(std::abs(angle_diff(wkb_phase(x, l, WkbOrder::Full) - wkb_phase(x, l, WkbOrder::Mid),
                            d_full_mid)) < 1e-12);
  CHECK(std::abs(angle_diff(wkb_phase(x, l, WkbOrder::Mid) - wkb_phase(x, l, WkbOrder::Low),
                            d_mid_low)) < 1e-12);

  // Low-x value where no 2 pi reduction occurs: assemble the bracket directly.
  const double xs = 1.2, ls = 0.5;
  const double u = 1.0 / (xs * ls);
  const double bracket = 0.4 * xs * xs * ls * ls - xs * ls / 6.0 - 0.0625 +
                         u / 64.0 + 5.0 / 3072.0 * u * u +
                         (7.0 / (20480.0 * ls * ls * ls) - 9.0 * ls / 160.0) /
                             (xs * xs * xs);
  const double expect = std::sqrt(2.0 * xs * ls) / (ls * ls) * bracket;
  CHECK(std::abs(angle_diff(wkb_phase(xs, ls), expect)) < 1e-13);
}

TEST_CASE("model value composes envelope, phase, and split position") {
  const double x = 37.5, l = 1.3, C = 0.52, th = 0.9;
  for (WkbOrder o : {WkbOrder::Full, WkbOrder::Mid, WkbOrder::Low}) {
    const double expect = C * wkb_envelope(x, l, o) * std::cos(wkb_phase(x, l, o) - th);
    CHECK(close(wkb_y(x, l, C, th, o), expect, 1e-14));
  }

  // A sub-ulp position remainder enters the phase as sqrt(2 l) x^{3/2} x_lo.
  WkbWindow w;
  w.center = 100.0;
  w.x = {100.0};
  w.y = {0.0};
  w.x_lo = {1e-10};
  const double delta = std::sqrt(2.0 * 1.0) * 100.0 * std::sqrt(100.0) * 1e-10;
  const double expect =
      0.44 * wkb_envelope(100.0, 1.0) * std::cos(wkb_phase(100.0, 1.0) + delta - 0.3);
  CHECK(close(wkb_window_y(w, 0, 1.0, 0.44, 0.3), expect, 1e-13));

  // Without x_lo the model reduces to wkb_y at the sample position.
  w.x_lo.clear();
  CHECK(close(wkb_window_y(w, 0, 1.0, 0.44, 0.3), wkb_y(100.0, 1.0, 0.44, 0.3), 1e-14));
}

TEST_CASE("synthetic windows round-trip the amplitude/phase fit") {
  const double lambda = 1.0, C = 0.37, th = 0.8;
  std::vector<WkbWindow> wins;
  for (int k = 0; k < 6; ++k) {
    wins.push_back(synthetic_window(20.0 + 5.0 * k, 201, 0.01, lambda, C, th));
  }
  const WkbFit fit = fit_amplitude_phase(wins, lambda);
  CHECK(close(fit.C, C, 1e-10));
  CHECK(std::abs(angle_diff(fit.theta, th)) < 1e-10);
  REQUIRE(fit.C_k.size() == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(close(fit.C_k[k], C, 1e-10));
    CHECK(std::abs(angle_diff(fit.theta_k[k], th)) < 1e-10);
  }

  // A constant phase offset beyond pi still round-trips modulo 2 pi.
  std::vector<WkbWindow> shifted;
  for (int k = 0; k < 6; ++k) {
    shifted.push_back(synthetic_window(20.0 + 5.0 * k, 201, 0.01, lambda, C, th + 2.0 * kPi));
  }
  const WkbFit fit2 = fit_amplitude_phase(shifted, lambda);
  CHECK(std::abs(angle_diff(fit2.theta, th)) < 1e-10);
}

TEST_CASE("fit and sampling reject malformed requests") {
  const double lambda = 1.0;
  std::vector<WkbWindow> five;
  for (int k = 0; k < 5; ++k) {
    five.push_back(synthetic_window(20.0 + 5.0 * k, 201, 0.01, lambda, 0.4, 0.1));
  }
  CHECK_THROWS_AS(fit_amplitude_phase(five, lambda), std::invalid_argument);

  auto six = five;
  six.push_back(synthetic_window(45.0, 200, 0.01, lambda, 0.4, 0.1));
  CHECK_THROWS_AS(fit_amplitude_phase(six, lambda), std::invalid_argument);

  // Zero sample spacing: the window's normal matrix is singular.
  std::vector<WkbWindow> flat;
  for (int k = 0; k < 6; ++k) {
    flat.push_back(synthetic_window(20.0 + 5.0 * k, 201, 0.0, lambda, 0.4, 0.1));
  }
  CHECK_THROWS_AS(fit_amplitude_phase(flat, lambda), FitIllConditioned);

  // Coincident centers: the extrapolation regression is singular.
  std::vector<WkbWindow> stacked(6, synthetic_window(25.0, 201, 0.01, lambda, 0.4, 0.1));
  CHECK_THROWS_AS(fit_amplitude_phase(stacked, lambda), FitIllConditioned);

  CHECK_THROWS_AS(sample_windows(lambda, 20.0, 5.0, 0, 201, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(sample_windows(lambda, 20.0, 5.0, 6, 0, 0.01), std::invalid_argument);
  // First sample would sit at/below the series seed.
  CHECK_THROWS_AS(sample_windows(lambda, 0.0, 5.0, 6, 201, 0.01), std::invalid_argument);
  // Negative spacing makes the observation list unsorted.
  CHECK_THROWS_AS(sample_windows(lambda, 20.0, 5.0, 6, 201, -0.01), std::invalid_argument);
}

TEST_CASE("regular solution matches the oscillatory model at lambda = 1") {
  const double lambda = 1.0;
  long steps = 0;
  const auto wins = sample_windows(lambda, 175.0, 25.0, 6, 201, 0.01, MweylConfig{}, &steps);
  REQUIRE(wins.size() == 6);
  CHECK(steps > 0);

  const WkbFit fit = fit_amplitude_phase(wins, lambda);
  CHECK(close(fit.C, kC1, 1e-7));
  CHECK(std::abs(angle_diff(fit.theta, kTheta1)) < 1e-6);

  // Residual ladder: each truncation's error decays with its own exponent.
  const auto full = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Full);
  const auto mid = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Mid);
  const auto low = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Low);
  for (std::size_t w = 0; w < wins.size(); ++w) {
    CHECK(full[w] < mid[w]);
    CHECK(mid[w] < low[w]);
    if (w > 0) {
      CHECK(full[w] < full[w - 1]);
      CHECK(mid[w] < mid[w - 1]);
      CHECK(low[w] < low[w - 1]);
    }
  }
  // Local decay slopes over the first five windows (centers 175..275); the
  // sixth window at lambda = 1 sits in a regime where an anomalously small
  // next-order coefficient steepens the full-order slope past its band.
  const double s_full = decay_slope(wins, full, 0, 4);
  const double s_mid = decay_slope(wins, mid, 0, 4);
  const double s_low = decay_slope(wins, low, 0, 4);
  CHECK(std::abs(s_full - (-2.75)) < 0.2);
  CHECK(std::abs(s_mid - (-1.75)) < 0.2);
  CHECK(std::abs(s_low - (-0.75)) < 0.2);

  // Shifting the whole window set by +50 moves the extrapolated constants
  // by far less than the per-window drift.
  const auto wins2 = sample_windows(lambda, 225.0, 25.0, 6, 201, 0.01);
  const WkbFit fit2 = fit_amplitude_phase(wins2, lambda);
  CHECK(close(fit2.C, fit.C, 1e-4));
  CHECK(std::abs(angle_diff(fit2.theta, fit.theta)) < 1e-4);

  // Fine window around x = 200: peak amplitude and zero spacing.
  const auto fine = sample_windows(lambda, 200.0, 1.0, 1, 361, 2e-5);
  REQUIRE(fine.size() == 1);
  const auto& fw = fine[0];
  double peak = 0.0;
  for (double v : fw.y) peak = std::max(peak, std::abs(v));
  CHECK(close(peak, fit.C * wkb_envelope(200.0, lambda), 1e-2));

  std::vector<double> zeros;
  for (std::size_t i = 0; i + 1 < fw.y.size(); ++i) {
    if ((fw.y[i] < 0.0) != (fw.y[i + 1] < 0.0)) {
      const double t = fw.y[i] / (fw.y[i] - fw.y[i + 1]);
      zeros.push_back(fw.x[i] + t * (fw.x[i + 1] - fw.x[i]));
    }
  }
  REQUIRE(zeros.size() >= 8);
  const double spacing_ref = kPi / 4000.0;  // pi / (sqrt(2 lambda) 200^{3/2})
  for (std::size_t i = 0; i + 1 < zeros.size(); ++i) {
    CHECK(close(zeros[i + 1] - zeros[i], spacing_ref, 1e-2));
  }
}

TEST_CASE("small-lambda windows stay inside the model") {
  const double lambda = 0.03;
  const auto wins = sample_windows(lambda, 500.0, 80.0, 6, 201, 0.01);
  REQUIRE(wins.size() == 6);

  const WkbFit fit = fit_amplitude_phase(wins, lambda);
  CHECK(close(fit.C, kC003, 1e-6));
  CHECK(std::abs(angle_diff(fit.theta, kTheta003)) < 1e-6);

  // Deep in the slow-growth band the amplitude is astronomically large, yet
  // the full-order model still tracks the data to ~1e-5 relative.
  const auto full = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Full);
  const auto mid = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Mid);
  const auto low = window_residuals(wins, lambda, fit.C, fit.theta, WkbOrder::Low);
  for (std::size_t w = 0; w < wins.size(); ++w) {
    double ymax = 0.0;
    for (double v : wins[w].y) ymax = std::max(ymax, std::abs(v));
    CHECK(full[w] / ymax < 1e-4);
    CHECK(full[w] < mid[w]);
    CHECK(mid[w] < low[w]);
  }
}

TEST_CASE("extremum growth ratio separates the slow-growth band") {
  // Inside the band (lambda below the potential peak ~0.187) the second
  // extremum dwarfs the first; above the band the two are comparable.
  const double g_in = extremum_growth_ratio(0.1);
  const double g_deep = extremum_growth_ratio(0.03);
  const double g_out = extremum_growth_ratio(1.0);
  CHECK(g_in > 1e3);
  CHECK(g_deep > 1e3);
  CHECK(g_out < 10.0);
  CHECK(g_out > 1.0);
  CHECK(close(g_in, 1204.08, 1e-3));
  CHECK(close(g_out, 1.7921, 1e-3));
}

TEST_CASE("stretched-coordinate offset constant") {
  // Integrand value at 0 is exactly Psi(0)^{-1/2} = sqrt(3 sqrt(pi) / 2).
  CHECK(close(lemma4_integrand(0.0), std::sqrt(1.5 * kSqrtPi), 1e-14));
  CHECK(close(lemma4_integrand(0.0), 1.6305461589167827, 1e-14));
  // By x = 8 the integrand has collapsed to the exponential tail.
  CHECK(std::abs(lemma4_integrand(8.0)) < 1e-12);

  CHECK(std::abs(lemma4_constant() - kOffsetConstant) < 1e-9);
}
