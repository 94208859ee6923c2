#!/usr/bin/env python3
"""Regenerate tracy_widom_f1.csv, the knot table for the GOE Tracy-Widom CDF.

The table is produced from the Painleve II representation: with q the
Hastings-McLeod solution of

    q''(x) = x q(x) + 2 q(x)^3,   q(x) ~ Ai(x)  as x -> +inf,

the GOE (beta = 1) Tracy-Widom distribution function is

    F1(s) = exp( -1/2 * int_s^inf q(t) dt ) * F2(s)^(1/2),
    F2(s) = exp( -int_s^inf (t - s) q(t)^2 dt ).

q is computed as a two-point boundary value problem on [-13, 12]: at the
right end q matches Ai, at the left end the algebraic asymptote
q(x) = sqrt(-x/2) * (1 + 1/(8 x^3) - 73/(128 x^6) + O(x^-9)).  Solving the
BVP avoids the exponential instability of shooting through the connection
region.  The integrals are accumulated with Simpson's rule on a fine grid.

An independent check evaluates F1 via the Fredholm determinant of the
kernel B_s(x, y) = Ai((x + y)/2) / 2 on L^2(s, inf) (Nystrom discretisation
with Gauss-Legendre nodes) and via published values of the TW1 mean,
variance, and selected quantiles.

Output: tracy_widom_f1.csv with header "x,F1", 1601 rows covering
x = -10.00 (0.01) 6.00, values printed with 17 significant digits.
"""

import numpy as np
from scipy.integrate import solve_bvp, cumulative_simpson
from scipy.special import airy

X_LEFT = -13.0
X_RIGHT = 12.0
TABLE_LO = -10.0
TABLE_HI = 6.0
TABLE_STEP = 0.01


def left_asymptote(x):
    # Hastings-McLeod expansion for x -> -inf.
    return np.sqrt(-x / 2.0) * (1.0 + 1.0 / (8.0 * x**3) - 73.0 / (128.0 * x**6))


def solve_painleve_ii():
    def rhs(x, y):
        return np.vstack((y[1], x * y[0] + 2.0 * y[0] ** 3))

    def bc(ya, yb):
        ai_right = airy(X_RIGHT)[0]
        return np.array([ya[0] - left_asymptote(X_LEFT), yb[0] - ai_right])

    x0 = np.linspace(X_LEFT, X_RIGHT, 2001)
    # Initial guess: glue the two asymptotic regimes.
    q0 = np.where(x0 < 0.0, np.sqrt(np.maximum(-x0, 1e-12) / 2.0), airy(x0)[0])
    y0 = np.vstack((q0, np.gradient(q0, x0)))
    sol = solve_bvp(rhs, bc, x0, y0, tol=1e-12, max_nodes=2_000_000, verbose=0)
    if not sol.success:
        raise RuntimeError(f"Painleve II BVP failed: {sol.message}")
    return sol


def distribution_on_grid(sol, grid):
    """Return (log F1, log F2) on an ascending grid via cumulative Simpson."""
    q = sol.sol(grid)[0]
    q2 = q * q
    tq2 = grid * q2

    # I_f(x) = int_x^X_RIGHT f dt  =  total - int_{X_LEFT}^x f dt.
    def upper(f):
        c = cumulative_simpson(f, x=grid, initial=0.0)
        return c[-1] - c

    int_q = upper(q)
    int_q2 = upper(q2)
    int_tq2 = upper(tq2)

    # Tail corrections for (X_RIGHT, inf).  q ~ Ai there, so
    # int q  ~ int Ai,  int q^2 ~ Ai(R)*Ai'(R)-type expressions; both are
    # below 1e-13 at X_RIGHT = 12 and only matter for the log at full
    # precision.  int_R^inf Ai = Ai(R)/|zeta'| asymptotics are avoided by
    # Gauss-Legendre on a mapped interval.
    xs, ws = np.polynomial.legendre.leggauss(60)
    a, b = X_RIGHT, X_RIGHT + 12.0
    t = 0.5 * (b - a) * xs + 0.5 * (b + a)
    w = 0.5 * (b - a) * ws
    ai = airy(t)[0]
    tail_q = float(np.sum(w * ai))
    tail_q2 = float(np.sum(w * ai * ai))
    tail_tq2 = float(np.sum(w * t * ai * ai))

    int_q += tail_q
    int_q2 += tail_q2
    int_tq2 += tail_tq2

    log_f2 = -(int_tq2 - grid * int_q2)
    log_f1 = -0.5 * int_q + 0.5 * log_f2
    return log_f1, log_f2


def fredholm_f1(s_values, upper=13.0, m=400):
    """F1 via det(I - B_s) with B_s(x,y) = Ai((x+y)/2)/2 on (s, upper)."""
    xs, ws = np.polynomial.legendre.leggauss(m)
    out = []
    for s in s_values:
        t = 0.5 * (upper - s) * xs + 0.5 * (upper + s)
        w = 0.5 * (upper - s) * ws
        k = 0.5 * airy(0.5 * (t[:, None] + t[None, :]))[0]
        a = np.eye(m) - np.sqrt(w)[:, None] * k * np.sqrt(w)[None, :]
        sign, logdet = np.linalg.slogdet(a)
        out.append(sign * np.exp(logdet))
    return np.array(out)


def main():
    sol = solve_painleve_ii()

    n_fine = int(round((X_RIGHT - X_LEFT) / 0.001)) + 1
    grid = np.linspace(X_LEFT, X_RIGHT, n_fine)
    log_f1, _ = distribution_on_grid(sol, grid)

    n_table = int(round((TABLE_HI - TABLE_LO) / TABLE_STEP)) + 1
    lo_idx = int(round((TABLE_LO - X_LEFT) / 0.001))
    idx = lo_idx + 10 * np.arange(n_table)
    table_x = np.array([TABLE_LO + TABLE_STEP * k for k in range(n_table)])
    assert np.allclose(grid[idx], table_x, atol=1e-9)
    table_f1 = np.exp(log_f1[idx])

    # --- validation ----------------------------------------------------
    f1 = np.exp(log_f1)
    # Moments by integrating the CDF (tails beyond the fine grid are
    # below 1e-12 on both sides).
    pos = grid >= 0.0
    neg = grid <= 0.0
    mean = np.trapezoid(1.0 - f1[pos], grid[pos]) - np.trapezoid(f1[neg], grid[neg])
    # E[X^2] = 2 * ( int_0^inf x (1-F) dx - int_-inf^0 x F dx )
    ex2 = 2.0 * (
        np.trapezoid(grid[pos] * (1.0 - f1[pos]), grid[pos])
        - np.trapezoid(grid[neg] * f1[neg], grid[neg])
    )
    var = ex2 - mean * mean
    mean_ref = -1.2065335745820
    var_ref = 1.607781034581
    print(f"mean  {mean:.12f}  (ref {mean_ref})  diff {mean - mean_ref:.2e}")
    print(f"var   {var:.12f}  (ref {var_ref})  diff {var - var_ref:.2e}")

    checks = np.array([-3.0, -2.0, -1.27, -1.0, 0.0, 0.98, 2.0, 4.0])
    f1_pain = np.exp(np.interp(checks, grid, log_f1))
    f1_fred = fredholm_f1(checks)
    for x, a, b in zip(checks, f1_pain, f1_fred):
        print(f"F1({x:6.2f})  painleve {a:.15e}  fredholm {b:.15e}  diff {a - b:.2e}")

    q95 = np.interp(0.95, table_f1, table_x)  # CDF monotone increasing
    print(f"F1(0.98) = {np.exp(np.interp(0.98, grid, log_f1)):.12f}")
    print(f"0.95 quantile ~ {q95:.6f}")

    assert abs(mean - mean_ref) < 2e-6
    assert abs(var - var_ref) < 2e-5
    assert np.max(np.abs(f1_pain - f1_fred)) < 1e-9
    assert np.all(np.diff(table_f1) > 0.0)

    with open("tracy_widom_f1.csv", "w") as fh:
        fh.write("x,F1\n")
        for x, v in zip(table_x, table_f1):
            fh.write(f"{x:.2f},{v:.17g}\n")
    print(f"wrote tracy_widom_f1.csv ({n_table} rows)")


if __name__ == "__main__":
    main()
