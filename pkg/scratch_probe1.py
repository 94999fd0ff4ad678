"""Probe 1: basic sanity + weighted-estimate ratio (Thm-3.7 shadow) + truncation Cauchy."""
import numpy as np
from schrodlab.mesh import build_interval, integrate
from schrodlab.model import PotentialSpec, sample_potential, truncate, truncate_rhs
from schrodlab.operator import assemble, direct_solve

# --- basic sanity
m = build_interval(0, 1, 1000)
print("sum vol:", m.cell_volume * m.n_cells)
g = m.sample(lambda x: np.sin(np.pi * x))
print("int sin(pi x):", integrate(m, g), "expected", 2 / np.pi)

V0 = m.constant(0.0)
op = assemble(m, V0)
u = direct_solve(op, m.sample(lambda x: np.pi**2 * np.sin(np.pi * x)))
print("poisson max err:", np.max(np.abs(u.values - np.sin(np.pi * m.cell_centers))))

# --- weighted estimate ratio for alpha in {0, 1/2, 1}, U = 0, f >= 0
rng = np.random.default_rng(0)
spec = PotentialSpec(C=2.0, r=2.0)
V = sample_potential(spec, m)
opV = assemble(m, V)
worst = {0.0: 0.0, 0.5: 0.0, 1.0: 0.0}
for trial in range(20):
    f = m.function(rng.uniform(0, 1, m.n_cells))
    u = direct_solve(opV, f)
    for alpha in (0.0, 0.5, 1.0):
        w = m.delta**alpha
        lhs = integrate(m, V.values * np.abs(u.values) * w)
        rhs = integrate(m, np.abs(f.values) * w)
        worst[alpha] = max(worst[alpha], lhs / rhs)
print("worst ratios (want <= 1 + eps):", worst)

# --- truncation Cauchy at r=2 (expected to MISS the 1e-6 gate) and r=1 (expected to hit it)
for r in (2.0, 1.0, 1.2):
    m2 = build_interval(0, 1, 2000)
    spec = PotentialSpec(C=2.0, r=r)
    f = m2.constant(1.0)
    sols = []
    for j in (1e2, 1e3, 1e4, 1e5):
        Vj = sample_potential(truncate(spec, j), m2)
        fj = truncate_rhs(f, j)
        sols.append(direct_solve(assemble(m2, Vj), fj).values)
    diffs = [np.max(np.abs(sols[k + 1] - sols[k])) for k in range(3)]
    umax = np.max(np.abs(sols[-1]))
    print(f"r={r}: sup-diffs={['%.3e' % d for d in diffs]}, final/umax={diffs[-1]/umax:.3e}, umax={umax:.4f}")
