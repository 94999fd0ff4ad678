"""Probe 4: confinement redesign, nonsymmetric spectrum, lorentz oracle, 2D eigs."""
import time
import numpy as np
from schrodlab.mesh import Domain, build_interval, build_rectangle, integrate
from schrodlab.model import FlowSpec, PotentialSpec, extend_potential, sample_flow, sample_potential, truncate
from schrodlab.operator import assemble
from schrodlab.spectral import eigen_spectrum, principal_eigenpair
from schrodlab.evolve import confinement_report, schrodinger_cn, schrodinger_galerkin, galerkin_coefficients
from schrodlab.rearrange import lorentz_norm, lp_norm

# ---- confinement leak sweep with jump data
omega = Domain.interval(0.0, 1.0)
box = build_interval(-0.5, 1.5, 1000)
x = box.cell_centers
jump = np.where((x > 0) & (x < 1), np.exp(-((x - 0.5) / 0.25) ** 2), 0.0)
psi0_jump = box.function(jump.astype(complex))
print("jump value at boundary:", np.exp(-(0.5 / 0.25) ** 2))
outs = {}
for C in (10.0, 100.0, 1000.0):
    Vq = extend_potential(truncate(PotentialSpec(C=C, r=2.0), 1e8), omega, 0.0, box)
    opb = assemble(box, Vq)
    traj = schrodinger_cn(opb, psi0_jump, T=1.0, K=500, record_every=100)
    rep = confinement_report(traj, omega)
    outs[C] = rep.outside_mass[-1]
    print(f"  C={C}: outside(t): {['%.3e' % v for v in rep.outside_mass]}")
print("  monotone:", outs[10.0] > outs[100.0] > outs[1000.0])

# ---- decay fits with flat data, C=100
C = 100.0
p_ind = (1 + np.sqrt(1 + 4 * C)) / 2
print("indicial exponent for C=100:", p_ind)
box2 = build_interval(-0.5, 1.5, 2000)
x2 = box2.cell_centers
flat = np.where((x2 > 0) & (x2 < 1), np.sin(np.pi * np.clip(x2, 0, 1)) ** 12, 0.0)
psi0_flat = box2.function(flat.astype(complex))
Vq = extend_potential(truncate(PotentialSpec(C=C, r=2.0), 1e8), omega, 0.0, box2)
opb = assemble(box2, Vq)
traj = schrodinger_cn(opb, psi0_flat, T=1.0, K=500, record_every=50)
for window in [(0.05, 0.2), (0.06, 0.24)]:
    rep = confinement_report(traj, omega, fit_times=(0.1, 1.0), window=window)
    print(f"  window {window}: fits:", {t: round(f.exponent, 3) for t, f in rep.decay_fits.items()})
# look at raw values in window at t=1
from schrodlab.model import omega_mask
inside = omega_mask(omega, box2)
k = int(np.argmin(np.abs(traj.times - 1.0)))
dd = omega.boundary_distance(box2.cell_centers[inside])
vv = np.abs(traj.states[k][inside])
sel = (dd >= 0.05) & (dd <= 0.2)
print("  |psi| range in window at t=1:", vv[sel].min(), vv[sel].max())

# ---- nonsymmetric eigen spectrum
m2 = build_rectangle(1, 1, 32, 32)
U2 = sample_flow(FlowSpec(kind="stream", stream=lambda x, y: 0.5 * np.sin(np.pi * x) * np.sin(np.pi * y)), m2)
op2 = assemble(m2, m2.constant(0.0), U2)
t0 = time.time()
eig = eigen_spectrum(op2, 5)
print("nonsym eigenvalues:", np.round(eig.eigenvalues, 4), "residuals:", np.max(eig.residuals),
      "complex pairs:", eig.complex_pairs, f"({time.time()-t0:.1f}s)")
print("  vs symmetric (2+5)pi^2-ish:", np.round(np.pi**2 * np.array([2, 5, 5, 8, 10]), 3))
print("  u1 min:", eig.eigenfunctions[0].values.min())

# ---- 2D symmetric eigs at 128^2 timing
t0 = time.time()
m128 = build_rectangle(1, 1, 128, 128)
op128 = assemble(m128, m128.constant(0.0))
lam1, psi1 = principal_eigenpair(op128)
t1 = time.time()
print(f"2D principal at 128^2: lam={lam1:.6f} vs 2pi^2={2*np.pi**2:.6f}, rel={abs(lam1-2*np.pi**2)/(2*np.pi**2):.2e} ({t1-t0:.1f}s)")
eig5 = eigen_spectrum(op128, 5)
print(f"2D eigsh 5 modes: {np.round(eig5.eigenvalues,3)} ({time.time()-t1:.1f}s)")

# ---- lorentz vs mpmath oracle for q=1.5
import mpmath as mp
rng = np.random.default_rng(3)
m = build_interval(0, 1, 50)
u = m.function(np.abs(rng.standard_normal(m.n_cells)) + 0.1)
from schrodlab.rearrange import decreasing_rearrangement
r = decreasing_rearrangement(u)
p = q = 1.5
total = mp.mpf(0)
cum = r.cumulative
for k in range(len(r.u_star)):
    s0, s1 = map(mp.mpf, (r.breaks[k], r.breaks[k + 1]))
    a = mp.mpf(r.u_star[k])
    b = mp.mpf(cum[k]) - a * mp.mpf(r.breaks[k])
    total += mp.quad(lambda t: (t ** (1 / mp.mpf(p)) * (a + b / t)) ** q / t, [s0, s1])
oracle = float(total ** (1 / mp.mpf(q)))
mine = lorentz_norm(u, p, q)
print(f"lorentz (1.5,1.5): mine={mine!r}, mpmath oracle={oracle!r}, rel diff={abs(mine-oracle)/oracle:.2e}")
lp = lp_norm(u, 1.5)
print(f"  L^1.5={lp:.6f}; embedding holds: {lp <= mine <= 3*lp}")
