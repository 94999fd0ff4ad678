"""Probe 2: power-iteration principal eigenpair, tail fidelity, flatness + WKB fits."""
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from schrodlab.mesh import build_interval
from schrodlab.model import PotentialSpec, sample_potential
from schrodlab.operator import assemble


def principal(op, tol=1e-12, maxiter=5000):
    n = op.mesh.n_cells
    M = (sp.identity(n, format="csc") + op.matrix.tocsc())
    lu = spla.splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options=dict(SymmetricMode=True))
    v = np.ones(n)
    vol = op.mesh.cell_volume
    lam = None
    for it in range(maxiter):
        v = lu.solve(v)
        v /= np.sqrt(np.sum(v * v) * vol)
        if it % 5 == 4:
            Av = op.matrix @ v
            lam = float(np.sum(Av * v) * vol)
            res = np.linalg.norm(Av - lam * v) * np.sqrt(vol)
            if res <= tol * (1 + abs(lam)):
                return lam, v, it, res
    return lam, v, maxiter, res


# --- V = 0: lambda_1 = pi^2
m = build_interval(0, 1, 1000)
op0 = assemble(m, m.constant(0.0))
lam, v, its, res = principal(op0)
print(f"V=0: lam={lam:.8f} (pi^2={np.pi**2:.8f}), rel err={abs(lam-np.pi**2)/np.pi**2:.2e}, iters={its}, min v={v.min():.2e}")

# --- flatness: C=2 and C=6, r=2, N=4000
for C in (2.0, 6.0):
    m4 = build_interval(0, 1, 4000)
    V = sample_potential(PotentialSpec(C=C, r=2.0), m4)
    opV = assemble(m4, V)
    lam, v, its, res = principal(opV)
    h = m4.spacing[0]
    lo, hi = 5 * h, 20 * h
    mask = (m4.delta >= lo) & (m4.delta <= hi)
    x = np.log(m4.delta[mask]); y = np.log(np.abs(v[mask]))
    A = np.vstack([x, np.ones_like(x)]).T
    slope, intercept = np.linalg.lstsq(A, y, rcond=None)[0]
    p_oracle = (1 + np.sqrt(1 + 4 * C)) / 2
    print(f"C={C}: lam={lam:.4f}, iters={its}, min v={v.min():.3e}, fitted p={slope:.4f}, oracle={p_oracle}, window cells={mask.sum()}")

# --- WKB regime: r=4, C=2, N=4000. Tail values should span down to ~1e-31 cleanly.
m4 = build_interval(0, 1, 4000)
C = 2.0
V = sample_potential(PotentialSpec(C=C, r=4.0), m4)
opV = assemble(m4, V)
lam, v, its, res = principal(opV, maxiter=20000)
print(f"r=4: lam={lam:.4f}, iters={its}, min v={v.min():.3e}, res={res:.1e}")
mask = (m4.delta >= 0.02) & (m4.delta <= 0.1)
d = m4.delta[mask]; vals = np.abs(v[mask])
print("tail range in window:", vals.min(), vals.max())
r = 4.0
xreg = -d ** (-(r - 2) / 2.0) / (r - 2)
yreg = np.log(vals) - (r / 4.0) * np.log(d)
A = np.vstack([xreg, np.ones_like(xreg)]).T
(khat, logkbar), res_fit = np.linalg.lstsq(A, yreg, rcond=None)[0], None
pred = A @ np.array([khat, logkbar])
ss_res = np.sum((yreg - pred) ** 2); ss_tot = np.sum((yreg - yreg.mean()) ** 2)
r2 = 1 - ss_res / ss_tot
print(f"khat={khat:.4f} (paper-convention; 2*sqrt(C)={2*np.sqrt(C):.4f}), khat/2={khat/2:.4f} vs sqrt(C)={np.sqrt(C):.4f}, R2={r2:.6f}")

# --- how deep can tails go? check smallest positive component overall
print("global min component:", v.min(), "at delta:", m4.delta[np.argmin(v)])
