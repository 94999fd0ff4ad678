"""Probe 5: leak sweep tuning, nonsym eigs retry, lorentz oracle, 2D principal."""
import time
import numpy as np
from schrodlab.mesh import Domain, build_interval, build_rectangle
from schrodlab.model import FlowSpec, PotentialSpec, extend_potential, sample_flow, truncate
from schrodlab.operator import assemble
from schrodlab.spectral import eigen_spectrum, principal_eigenpair
from schrodlab.evolve import confinement_report, schrodinger_cn
from schrodlab.rearrange import lorentz_norm, lp_norm, decreasing_rearrangement

omega = Domain.interval(0.0, 1.0)

def leak_sweep(nbox, K, sigma, label):
    box = build_interval(-0.5, 1.5, nbox)
    x = box.cell_centers
    jump = np.where((x > 0) & (x < 1), np.exp(-((x - 0.5) / sigma) ** 2), 0.0)
    psi0 = box.function(jump.astype(complex))
    outs = {}
    for C in (10.0, 100.0, 1000.0):
        Vq = extend_potential(truncate(PotentialSpec(C=C, r=2.0), 1e8), omega, 0.0, box)
        opb = assemble(box, Vq)
        traj = schrodinger_cn(opb, psi0, T=1.0, K=K, record_every=K // 5)
        rep = confinement_report(traj, omega)
        outs[C] = rep.outside_mass[-1]
    mono = outs[10.0] > outs[100.0] > outs[1000.0]
    gaps = (outs[10.0] / outs[100.0], outs[100.0] / outs[1000.0])
    print(f"  {label}: {['%.3e' % outs[c] for c in (10.,100.,1000.)]} mono={mono} gaps={gaps[0]:.1f},{gaps[1]:.1f}")
    return outs

print("== leak sweeps ==")
leak_sweep(1000, 500, 0.25, "N=1000 K=500 sig=.25")
leak_sweep(1000, 2000, 0.25, "N=1000 K=2000 sig=.25")
leak_sweep(500, 1000, 0.25, "N=500 K=1000 sig=.25")
leak_sweep(1000, 1000, 0.35, "N=1000 K=1000 sig=.35")

print("== nonsym eigs retry ==")
m2 = build_rectangle(1, 1, 32, 32)
U2 = sample_flow(FlowSpec(kind="stream", stream=lambda x, y: 0.5 * np.sin(np.pi * x) * np.sin(np.pi * y)), m2)
op2 = assemble(m2, m2.constant(0.0), U2)
t0 = time.time()
eig = eigen_spectrum(op2, 5)
print("  vals:", np.round(eig.eigenvalues, 4), "max res:", eig.residuals.max(),
      "complex:", np.round(eig.complex_pairs, 4), f"({time.time()-t0:.1f}s)")
print("  u1 min:", eig.eigenfunctions[0].values.min())

print("== 2D principal 128^2 ==")
t0 = time.time()
m128 = build_rectangle(1, 1, 128, 128)
op128 = assemble(m128, m128.constant(0.0))
lam1, psi1 = principal_eigenpair(op128)
t1 = time.time()
print(f"  lam={lam1:.6f} vs 2pi^2={2*np.pi**2:.6f}, rel={abs(lam1-2*np.pi**2)/(2*np.pi**2):.2e} ({t1-t0:.1f}s)")
eig5 = eigen_spectrum(op128, 5)
print(f"  eigsh 5: {np.round(eig5.eigenvalues,3)} vs {np.round(np.pi**2*np.array([2,5,5,8,10]),3)} ({time.time()-t1:.1f}s)")

print("== lorentz oracle q=1.5 ==")
import mpmath as mp
rng = np.random.default_rng(3)
m = build_interval(0, 1, 50)
u = m.function(np.abs(rng.standard_normal(m.n_cells)) + 0.1)
r = decreasing_rearrangement(u)
p = q = 1.5
total = mp.mpf(0)
cum = r.cumulative
for k in range(len(r.u_star)):
    s0, s1 = map(mp.mpf, (r.breaks[k], r.breaks[k + 1]))
    a = mp.mpf(r.u_star[k]); b = mp.mpf(cum[k]) - a * mp.mpf(r.breaks[k])
    total += mp.quad(lambda t: (t ** (1 / mp.mpf(p)) * (a + b / t)) ** q / t, [s0, s1])
oracle = float(total ** (1 / mp.mpf(q)))
mine = lorentz_norm(u, p, q)
print(f"  mine={mine!r} oracle={oracle!r} rel={abs(mine-oracle)/oracle:.2e}")
lp = lp_norm(u, 1.5)
print(f"  L^1.5={lp:.6f}; embedding: {lp <= mine <= 3*lp}")

# integer q oracle too
mine2 = lorentz_norm(u, 2.0, 2.0)
total = mp.mpf(0)
for k in range(len(r.u_star)):
    s0, s1 = map(mp.mpf, (r.breaks[k], r.breaks[k + 1]))
    a = mp.mpf(r.u_star[k]); b = mp.mpf(cum[k]) - a * mp.mpf(r.breaks[k])
    total += mp.quad(lambda t: (t ** mp.mpf(0.5) * (a + b / t)) ** 2 / t, [s0, s1])
oracle2 = float(total ** mp.mpf(0.5))
print(f"  (2,2): mine={mine2!r} oracle={oracle2!r} rel={abs(mine2-oracle2)/oracle2:.2e}")
