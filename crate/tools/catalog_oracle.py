"""Symbolic oracle for the closed-form facts stored in the model catalog.

Run with `python3 tools/catalog_oracle.py`; every identity printed as `ok`
is relied upon by `crates/core/src/metric/catalog.rs`.
"""
import sympy as sp


def ricci(g, coords):
    n = len(coords)
    ginv = sp.simplify(g.inv())
    gamma = [[[sp.simplify(sum(ginv[i, l] * (sp.diff(g[l, k], coords[j]) + sp.diff(g[j, l], coords[k])
                                               - sp.diff(g[j, k], coords[l])) for l in range(n)) / 2)
               for k in range(n)] for j in range(n)] for i in range(n)]
    ric = sp.zeros(n, n)
    for j in range(n):
        for k in range(n):
            ric[j, k] = sp.simplify(
                sum(sp.diff(gamma[i][j][k], coords[i]) for i in range(n))
                - sum(sp.diff(gamma[i][i][k], coords[j]) for i in range(n))
                + sum(gamma[i][i][p] * gamma[p][j][k] for i in range(n) for p in range(n))
                - sum(gamma[i][j][p] * gamma[p][i][k] for i in range(n) for p in range(n)))
    return gamma, ric


def check(label, expr):
    print(("ok   " if sp.simplify(expr) == 0 else "FAIL ") + label)


t, x, y, z, u, v = sp.symbols("t x y z u v", real=True)
a = sp.Function("a")(t)
coords = [t, x, y, z]
g = sp.diag(-1, a**2, a**2, a**2)
gamma, ric = ricci(g, coords)
n = 4
check("grw Ric_tt = -(n-1) a''/a", ric[0, 0] + (n - 1) * sp.diff(a, t, 2) / a)
check("grw Ric_xx = a a'' + (n-2) a'^2", ric[1, 1] - (a * sp.diff(a, t, 2) + (n - 2) * sp.diff(a, t) ** 2))
check("grw Gamma^t_xx = a a'", gamma[0][1][1] - a * sp.diff(a, t))
check("grw Gamma^x_tx = a'/a", gamma[1][0][1] - sp.diff(a, t) / a)

ts = sp.symbols("t_s", positive=True)
eds = (ts - t) ** sp.Rational(2, 3)
check("eds Ric_tt = (2/3)(t_s-t)^-2",
      (-(n - 1) * sp.diff(eds, t, 2) / eds) - sp.Rational(2, 3) / (ts - t) ** 2)
check("eds H = -(2/3)(n-1)/(t_s-t)", (n - 1) * sp.diff(eds, t) / eds + sp.Rational(2, 3) * (n - 1) / (ts - t))

A = sp.Function("A")(u)
B = sp.Function("B")(u)
gpp = sp.Matrix([[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, A**2, 0], [0, 0, 0, B**2]])
_, ricpp = ricci(gpp, [u, v, x, y])
check("rosen Ric_uu = -(A''/A + B''/B)", ricpp[0, 0] + sp.diff(A, u, 2) / A + sp.diff(B, u, 2) / B)
check("rosen other Ricci components vanish",
      sum(abs(ricpp[i, j]) for i in range(4) for j in range(4) if (i, j) != (0, 0)))
print("sinh(1)/sinh(2) =", sp.N(sp.sinh(1) / sp.sinh(2), 20))
print("int_0^0.5 (1-t)^2 dt =", sp.N(sp.integrate((1 - t) ** 2, (t, 0, sp.Rational(1, 2))), 20))

# Two-slope GRW: delta parts of Ric from the distributional second derivative.
m1, m2 = sp.symbols("m1 m2", positive=True)
a2 = 1 - m1 * t + (m1 - m2) * t * sp.Heaviside(t)
phi = sp.exp(-t**2) * (1 + t)  # generic test function
add = sp.diff(a2, t, 2)
# <a'', phi> over R picks up only the singular part at t = 0
pairing = sp.integrate(sp.expand(add * phi), (t, -sp.oo, sp.oo))
check("two-slope <a'', phi> = (m1 - m2) phi(0)", pairing - (m1 - m2) * phi.subs(t, 0))
a0 = a2.subs(t, 0)
check("two-slope delta Ric_tt = (n-1)(m2-m1)", -(n - 1) * (m1 - m2) / a0 - (n - 1) * (m2 - m1))
check("two-slope delta Ric_xx = -a(0)(m2-m1)", a0 * (m1 - m2) + (m2 - m1))
s2 = sp.symbols("s2", nonnegative=True)  # |X_s|^2 for unit timelike X at t = 0
check("two-slope contracted delta = (m2-m1)[(n-1)+(n-2)|X_s|^2]",
      (n - 1) * (m2 - m1) * (1 + s2) - (m2 - m1) * s2 - (m2 - m1) * ((n - 1) + (n - 2) * s2))
H0 = (n - 1) * sp.diff(1 - m1 * t, t) / (1 - m1 * t)
check("two-slope H(t0) = -(n-1) m1/(1 - m1 t0) for t0 < 0", H0 + (n - 1) * m1 / (1 - m1 * t))

# Rosen impulsive wave L = 1 + A u_+, M = 1 - A u_+: delta parts of Ric_uu cancel.
Aamp = sp.symbols("A", positive=True)
L = 1 + Aamp * u * sp.Heaviside(u)
M = 1 - Aamp * u * sp.Heaviside(u)
pair_L = sp.integrate(sp.expand(sp.diff(L, u, 2) * sp.exp(-u**2)), (u, -sp.oo, sp.oo))
pair_M = sp.integrate(sp.expand(sp.diff(M, u, 2) * sp.exp(-u**2)), (u, -sp.oo, sp.oo))
check("rosen delta part of Ric_uu = -(A - A) delta = 0", -(pair_L + pair_M))

# EDS in general dimension (used for n != 4).
nn = sp.symbols("n", positive=True)
check("eds general-n Ric_tt = (n-1)(2/9)(t_s-t)^-2",
      -(nn - 1) * sp.diff(eds, t, 2) / eds - (nn - 1) * sp.Rational(2, 9) / (ts - t) ** 2)
check("eds general-n Ric_xx = (4n-10)/9 (t_s-t)^(-2/3)",
      eds * sp.diff(eds, t, 2) + (nn - 2) * sp.diff(eds, t) ** 2 - (4 * nn - 10) / 9 * (ts - t) ** sp.Rational(-2, 3))
