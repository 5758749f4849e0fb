#!/usr/bin/env python3
"""Independent reference values for the C++ test suite.

Computes every nontrivial expected value frozen into tests/*.cpp using
mpmath (50-digit arithmetic) and scipy (independent ODE integrator).
No code is shared with the C++ implementation: Psi and friends are
evaluated from the closed erf form, derivatives by mpmath.diff, ODE
solutions by DOP853 from the regular (y, Psi y') formulation.

Run:  python3 tools/oracles/derived_values.py
"""

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

mp.mp.dps = 50

SQPI = mp.sqrt(mp.pi)


def psi(x):
    x = mp.mpf(x)
    if x == 0:
        return 2 / (3 * SQPI)
    if abs(x) < mp.mpf("0.05"):
        # short Taylor series, enough terms for 50 digits at |x| < 0.05
        return mp.nsum(
            lambda m: (2 / SQPI) * (-1) ** m / (mp.factorial(m) * (2 * m + 3)) * x ** (2 * m),
            [0, 30],
        )
    return (mp.erf(x) - (2 / SQPI) * x * mp.exp(-(x**2))) / (2 * x**3)


def psi_d(x, n):
    return mp.diff(psi, mp.mpf(x), n)


def V(x):
    x = mp.mpf(x)
    return (1 - x**2) * psi_d(x, 1) / x + (x**2 - 3) * psi(x)


def Q(x):
    x = mp.mpf(x)
    return psi_d(x, 2) / 4 - psi_d(x, 1) ** 2 / (16 * psi(x)) + V(x)


def report(name, value, digits=17):
    print(f"{name:>28s} = {mp.nstr(mp.mpf(value) if not isinstance(value, mp.mpf) else value, digits)}")


print("== special function values ==")
report("psi(0)", psi(0))
report("psi(0.25)", psi(0.25))
report("psi(0.5)", psi(0.5))
report("psi(1)", psi(1))
report("psi(2)", psi(2))
report("psi(10)", psi(10))
report("psi'(0.25)", psi_d(0.25, 1))
report("psi'(1)", psi_d(1, 1))
report("psi'(2)", psi_d(2, 1))
report("psi''(0)", psi_d(0, 2))
report("psi''(0.25)", psi_d(0.25, 2))
report("psi''(1)", psi_d(1, 2))
report("psi'''(0.25)", psi_d(0.25, 3))
report("psi'''(1)", psi_d(1, 3))
report("psi'''(2)", psi_d(2, 3))

print("== potential values ==")
report("V(0) exact -14/(5 sqrt pi)", -14 / (5 * SQPI))
report("V(0.5)", V(0.5))
report("V(1)", V(1))
report("V(3)", V(3))
report("Q(0) exact -3/sqrt(pi)", -3 / SQPI)
report("Q(0.25)", Q(0.25))
report("Q(1)", Q(1))
report("Q(3)", Q(3))
report("F(100;1) = 1 - Q(100)", 1 - Q(100))
report("Qx(1) = dQ/dx at 1", mp.diff(Q, mp.mpf(1), 1))

# max of V on (0, inf)
xm = mp.findroot(lambda x: mp.diff(V, x, 1), mp.mpf("1.8"))
report("argmax V", xm)
report("V_max", V(xm))

print("== x(s) map and Lemma constant ==")
c_lem = mp.quad(lambda x: 1 / mp.sqrt(psi(x)) - mp.sqrt(2) * x ** mp.mpf(1.5), [0, 5, 20])
report("c = int(psi^-1/2 - sqrt2 x^3/2)", c_lem)
report("integrand(0) = psi(0)^-1/2", 1 / mp.sqrt(psi(0)))

# fast float64 special functions for the scipy sections; numerics differ from
# the mpmath path (raw quotient-rule derivatives of N(x) = erf - erf' x), and
# are asserted against the 50-digit values before use
from scipy.special import erf as np_erf

TAYLOR_M = np.arange(0, 24)
TAYLOR_C = (2 / np.sqrt(np.pi)) * (-1.0) ** TAYLOR_M / (
    np.vectorize(float)(np.array([mp.factorial(int(m)) for m in TAYLOR_M])) * (2 * TAYLOR_M + 3))


def N_np(x):
    return np_erf(x) - (2 / np.sqrt(np.pi)) * x * np.exp(-x * x)


def psi_np(x):
    if abs(x) < 0.3:
        return float(np.sum(TAYLOR_C * x ** (2 * TAYLOR_M)))
    return N_np(x) / (2 * x**3)


def psi1_np(x):
    if abs(x) < 0.3:
        return float(np.sum(TAYLOR_C[1:] * 2 * TAYLOR_M[1:] * x ** (2 * TAYLOR_M[1:] - 1)))
    Np = (4 / np.sqrt(np.pi)) * x * x * np.exp(-x * x)
    return Np / (2 * x**3) - 3 * N_np(x) / (2 * x**4)


def psi2_np(x):
    if abs(x) < 0.3:
        m = TAYLOR_M[1:]
        return float(np.sum(TAYLOR_C[1:] * 2 * m * (2 * m - 1) * x ** (2 * m - 2)))
    Np = (4 / np.sqrt(np.pi)) * x * x * np.exp(-x * x)
    Npp = (4 / np.sqrt(np.pi)) * (2 * x - 2 * x**3) * np.exp(-x * x)
    return Npp / (2 * x**3) - 3 * Np / x**4 + 6 * N_np(x) / x**5


def psi3_np(x):
    if abs(x) < 0.3:
        m = TAYLOR_M[2:]
        return float(np.sum(TAYLOR_C[2:] * 2 * m * (2 * m - 1) * (2 * m - 2) * x ** (2 * m - 3)))
    Np = (4 / np.sqrt(np.pi)) * x * x * np.exp(-x * x)
    Npp = (4 / np.sqrt(np.pi)) * (2 * x - 2 * x**3) * np.exp(-x * x)
    Nppp = (4 / np.sqrt(np.pi)) * (2 - 10 * x**2 + 4 * x**4) * np.exp(-x * x)
    return (Nppp / (2 * x**3) - 9 * Npp / (2 * x**4)
            + 18 * Np / x**5 - 30 * N_np(x) / x**6)


def V_np(x):
    if abs(x) < 0.3:
        m = TAYLOR_M[1:]
        p1x = float(np.sum(TAYLOR_C[1:] * 2 * m * x ** (2 * m - 2)))
    else:
        p1x = psi1_np(x) / x
    return (1 - x * x) * p1x + (x * x - 3) * psi_np(x)


def Q_np(x):
    return psi2_np(x) / 4 - psi1_np(x) ** 2 / (16 * psi_np(x)) + V_np(x)


def Qx_np(x):
    d = 1e-5
    return (Q_np(x - 2 * d) - 8 * Q_np(x - d) + 8 * Q_np(x + d) - Q_np(x + 2 * d)) / (12 * d)


for xt in (0.05, 0.25, 1.0, 2.0, 3.0):
    assert abs(psi_np(xt) - float(psi(xt))) < 1e-14, xt
    assert abs(psi1_np(xt) - float(psi_d(xt, 1))) < 1e-13, xt
    assert abs(psi2_np(xt) - float(psi_d(xt, 2))) < 1e-12, xt
    assert abs(psi3_np(xt) - float(psi_d(xt, 3))) < 1e-11, xt
    assert abs(V_np(xt) - float(V(xt))) < 1e-13, xt
    assert abs(Q_np(xt) - float(Q(xt))) < 1e-12, xt
print("float64 special functions agree with 50-digit values")

sol_xs = solve_ivp(lambda s, u: [np.sqrt(psi_np(u[0]))], (0, 20), [0.0],
                   method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
print(f"{'x(s=5)':>28s} = {sol_xs.sol(5.0)[0]:.15g}")
print(f"{'x(s=20)':>28s} = {sol_xs.sol(20.0)[0]:.15g}")
report("asym (25/8)^(1/5)(20-c)^(2/5)", (mp.mpf(25) / 8) ** mp.mpf("0.2") * (20 - c_lem) ** mp.mpf("0.4"))

print("== ODE sweeps (scipy DOP853, regular (y, p=Psi y') form) ==")


def rhs(lam):
    def f(x, u):
        y, p = u
        return [p / psi_np(x), (V_np(x) - lam) * y]
    return f


def sweep(lam, x_end):
    sol = solve_ivp(
        rhs(lam), (0.0, x_end), [0.0, float(psi(0))],
        method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True, max_step=0.05,
    )
    return sol


def first_negative_extremum(lam, x_end):
    sol = sweep(lam, x_end)
    xs = np.linspace(1e-6, x_end, 200000)
    ys, ps = sol.sol(xs)
    sign = np.sign(ps)
    flips = np.where(np.diff(sign) != 0)[0]
    for i in flips:
        lo, hi = xs[i], xs[i + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.sign(sol.sol(mid)[1]) == np.sign(sol.sol(lo)[1]):
                lo = mid
            else:
                hi = mid
        xstar = 0.5 * (lo + hi)
        ystar = sol.sol(xstar)[0]
        if ystar < 0:
            return xstar, ystar
    raise RuntimeError("no negative extremum found")


xs1, ys1 = first_negative_extremum(1.0, 6.0)
print(f"{'x*(tau=1)':>28s} = {xs1:.15g}")
print(f"{'y_max(tau=1)':>28s} = {ys1:.15g}")
print(f"{'Y(1)':>28s} = {np.sqrt(1 + ys1 ** 2):.15g}")

xs003, ys003 = first_negative_extremum(0.03, 25.0)
print(f"{'x*(tau=0.03)':>28s} = {xs003:.15g}")
print(f"{'y_max(tau=0.03)':>28s} = {ys003:.15g}")

xs4, ys4 = first_negative_extremum(4.0, 4.0)
print(f"{'x*(tau=4)':>28s} = {xs4:.15g}")
print(f"{'y_max(tau=4)':>28s} = {ys4:.15g}")

print("== transform values (augmented quadrature oracle) ==")


def fhat(lam, f, x_end=12.0):
    def rhs3(x, u):
        y, p, F = u
        return [p / psi_np(x),
                (V_np(x) - lam) * y,
                x * np.exp(-x * x / 2) * f(x) * y]
    sol = solve_ivp(rhs3, (0.0, x_end), [0.0, float(psi(0)), 0.0],
                    method="DOP853", rtol=1e-13, atol=1e-16, max_step=0.05)
    return sol.y[2, -1]


print(f"{'fhat(1; f=x)':>28s} = {fhat(1.0, lambda x: x):.15g}")
print(f"{'fhat(2; f=x)':>28s} = {fhat(2.0, lambda x: x):.15g}")
print(f"{'fhat(1; f=x^2)':>28s} = {fhat(1.0, lambda x: x * x):.15g}")
print(f"{'fhat(0.25; f=x^2)':>28s} = {fhat(0.25, lambda x: x * x):.15g}")
report("fhat(0; f=x) exact 1/2", mp.mpf(1) / 2)
report("fhat(0; f=x^2) exact", 3 * SQPI / 8)
report("||x||^2 exact", 3 * SQPI / 8)
report("||x^2||^2 exact", 15 * SQPI / 16)
report("parseval cont. f=x", 3 * SQPI / 8 - 1 / SQPI)
report("parseval cont. f=x^2", 3 * SQPI / 8)

print("== FPP anchor rho'(1) (independent nonlinear sweep, n=2) ==")


def fpp_rho(lam, smax):
    def f(s, u):
        x, U, W = u
        return [np.sqrt(psi_np(x)), W, (Q_np(x) - lam) * U]
    sol = solve_ivp(f, (0.0, smax), [0.0, 0.0, float(psi(0)) ** 0.75],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    x, U, W = sol.y[:, -1]
    q = Q_np(x)
    qp = Qx_np(x) * np.sqrt(psi_np(x))
    P2 = np.sqrt(lam - q)
    Z2 = -0.5 * qp / (lam - q) ** 1.5
    R2 = 1 / np.sqrt(lam - q)
    return 1.0 / (np.pi * (P2 * U * U + Z2 * U * W + R2 * W * W))


smax = 0.5 * (1e8) ** (5.0 / 22.0)  # lambda = 1
print(f"{'s_max(1, 1e-8)':>28s} = {smax:.6g}")
print(f"{'rho(1) via FPP f2':>28s} = {fpp_rho(1.0, smax):.12g}")
print(f"{'rho(1) f2 at 1.25 s_max':>28s} = {fpp_rho(1.0, 1.25 * smax):.12g}")
print(f"{'rho(4) via FPP f2':>28s} = {fpp_rho(4.0, 0.5 * (1e8) ** (5.0 / 22.0) * 4 ** -0.7):.12g}")
