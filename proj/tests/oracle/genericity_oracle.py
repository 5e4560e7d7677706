"""Symbolic reference values for the genericity operators.

Prints D2, D3, P2, D4 for h = 1 + x^2 at fixed points, and checks the
forward construction h = exp(i psi(x)), s = -2 psi sin(psi) used by the
recover_p test. Values are frozen into tests/test_fields.cpp.
"""
import numpy as np
import sympy as sp

x, y = sp.symbols("x y", real=True)
I = sp.I


def dz(f):
    return (sp.diff(f, x) - I * sp.diff(f, y)) / 2


def dzb(f):
    return (sp.diff(f, x) + I * sp.diff(f, y)) / 2


def ops(h, hb):
    D2 = (dz(dz(hb)) - dzb(dzb(h))) / (2 * hb)
    D3 = (dzb(D2) - 2 * h * dz(hb) - dz(h * hb)) / h
    D3b = sp.conjugate(D3)
    lb, lh = dz(hb) / hb, dzb(h) / h
    P2 = dzb(lb) - dz(lh)
    D4 = dzb(D3b) - dz(D3) - lb * D3 + lh * D3b
    return D2, D3, P2, D4


h = 1 + x**2
names = ("D2", "D3", "P2", "D4")
exprs = ops(h, h)
for pt in [(0.3, 0.2), (0.5, 0.5), (0.8, 0.1)]:
    vals = [complex(sp.N(e.subs({x: pt[0], y: pt[1]}), 20)) for e in exprs]
    print(pt, ", ".join(f"{n}=({v.real:.17g}, {v.imag:.17g})" for n, v in zip(names, vals)))

# h = exp(i psi(x)): D4 + P2 s vanishes with s = -2 psi sin psi exactly when
# psi'' = 8 psi + psi'^2 tan psi. Higher derivatives are eliminated through the
# ODE, leaving a function of (psi, psi') that is sampled at random points.
psi = sp.Function("psi", real=True)(x)
D2, D3, P2, D4 = ops(sp.exp(I * psi), sp.exp(-I * psi))
s = -2 * psi * sp.sin(psi)
u0, u1 = sp.symbols("u0 u1", real=True)
rhs = 8 * psi + sp.diff(psi, x) ** 2 * sp.tan(psi)
derivs = {2: rhs}
derivs[3] = sp.diff(rhs, x).subs(sp.diff(psi, x, 2), rhs)
derivs[4] = sp.diff(derivs[3], x).subs(sp.diff(psi, x, 2), rhs)


def reduce(e):
    for k in (4, 3, 2):
        e = e.subs(sp.diff(psi, x, k), derivs[k])
    return e.subs(sp.diff(psi, x), u1).subs(psi, u0)


res = reduce(D4 + P2 * s)
p2 = reduce(P2)
import random

random.seed(1)
worst = 0.0
for _ in range(5):
    pt = {u0: random.uniform(0.1, 0.5), u1: random.uniform(-1, 1)}
    worst = max(worst, abs(complex(sp.N(res.subs(pt), 30))))
    print("P2 at", pt, "=", complex(sp.N(p2.subs(pt), 20)))
print("max |D4 + P2 s| over samples:", worst)

# Reference solution used to validate the test's own ODE integrator.
from scipy.integrate import solve_ivp

sol = solve_ivp(lambda _, v: [v[1], 8 * v[0] + v[1] ** 2 * np.tan(v[0])], (0, 0.4), [0.3, 0.0],
                rtol=1e-13, atol=1e-15, method="DOP853")
print("psi(0.4) with psi(0) = 0.3, psi'(0) = 0:", f"{sol.y[0, -1]:.17g}", f"{sol.y[1, -1]:.17g}")
