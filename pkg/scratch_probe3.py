"""Probe 3: accretivity / Kato / Lp / parabolic / CN checks at spec tolerances."""
import numpy as np
from schrodlab.mesh import build_interval, build_rectangle, integrate, Domain
from schrodlab.model import (FlowSpec, PotentialSpec, sample_flow, sample_potential,
                             extend_potential, truncate)
from schrodlab.operator import assemble, direct_solve, resolvent_solve, apply_adjoint
from schrodlab.spectral import principal_eigenpair, eigen_spectrum
from schrodlab.stationary import kato_margin, maximum_principle_check
from schrodlab.evolve import (auxiliary_positivity, resolvent_contraction_margin,
                              parabolic_evolve, contraction_margin, schrodinger_cn,
                              galerkin_coefficients, schrodinger_galerkin,
                              confinement_report)
from schrodlab.rearrange import lp_norm

rng = np.random.default_rng(7)

# ---- accretivity margins, 1D and 2D, with and without flow
print("== accretivity (eq-47 shadow) ==")
for label, mesh, flowspec in [
    ("1D", build_interval(0, 1, 800), FlowSpec()),
    ("2D U=0", build_rectangle(1, 1, 48, 48), FlowSpec()),
    ("2D stream", build_rectangle(1, 1, 48, 48),
     FlowSpec(kind="stream", stream=lambda x, y: 0.3 * np.sin(np.pi * x) * np.sin(np.pi * y))),
]:
    U = sample_flow(flowspec, mesh)
    V = sample_potential(PotentialSpec(C=2.0, r=2.0), mesh)
    op = assemble(mesh, V, U)
    op_free = assemble(mesh, mesh.constant(0.0), U)
    lam1, psi1 = principal_eigenpair(op_free, adjoint=True)
    worst = np.inf
    for lam in (0.1, 1.0, 10.0):
        for alpha in (0.0, 0.5, 1.0):
            for _ in range(5):
                f = mesh.function(rng.standard_normal(mesh.n_cells))
                m = resolvent_contraction_margin(op, psi1, f, lam, alpha)
                scale = integrate(mesh, np.abs(f.values) * psi1.values**alpha)
                worst = min(worst, m / scale)
    print(f"  {label}: worst margin/scale = {worst:.3e} (want >= -1e-8)")
    # J_eps
    ubar = mesh.function(np.abs(rng.standard_normal(mesh.n_cells)))
    for eps in (1e-1, 1e-2, 1e-3):
        for alpha in (0.5, 1.0):
            J = auxiliary_positivity(op_free, psi1, ubar, alpha, eps)
            print(f"    J_eps(eps={eps}, alpha={alpha}) = {J:.3e}")

# ---- Kato margins
print("== kato ==")
m1 = build_interval(0, 1, 500)
V = sample_potential(PotentialSpec(C=2.0, r=2.0), m1)
op = assemble(m1, V)
worst = np.inf
for _ in range(20):
    f = m1.function(rng.standard_normal(m1.n_cells))
    u = direct_solve(op, f)
    phi = m1.function(np.abs(rng.standard_normal(m1.n_cells)))
    marg = kato_margin(u, phi, V, None, f)
    scale = abs(integrate(m1, np.abs(u.values) * np.abs(apply_adjoint(op, phi).values))) + \
        abs(integrate(m1, phi.values * np.abs(f.values - V.values * u.values))) + 1e-300
    worst = min(worst, marg / scale)
print(f"  U=0 mixed-sign: worst margin/scale = {worst:.3e}")

m2 = build_rectangle(1, 1, 40, 40)
U2 = sample_flow(FlowSpec(kind="stream", stream=lambda x, y: 0.4 * np.sin(np.pi * x) * np.sin(np.pi * y)), m2)
V2 = sample_potential(PotentialSpec(C=1.0, r=2.0), m2)
op2 = assemble(m2, V2, U2)
worst = np.inf
worst_mixed = np.inf
for _ in range(10):
    f = m2.function(np.abs(rng.standard_normal(m2.n_cells)))  # one-signed
    u = direct_solve(op2, f)
    phi = m2.function(np.abs(rng.standard_normal(m2.n_cells)))
    marg = kato_margin(u, phi, V2, U2, f)
    scale = abs(integrate(m2, phi.values * np.abs(f.values - V2.values * u.values))) + 1e-300
    worst = min(worst, marg / scale)
    fm = m2.function(rng.standard_normal(m2.n_cells))  # mixed sign + flow
    um = direct_solve(op2, fm)
    margm = kato_margin(um, phi, V2, U2, fm)
    scalem = abs(integrate(m2, phi.values * np.abs(fm.values - V2.values * um.values))) + 1e-300
    worst_mixed = min(worst_mixed, margm / scalem)
print(f"  U!=0 one-signed: worst margin/scale = {worst:.3e}")
print(f"  U!=0 mixed-sign: worst margin/scale = {worst_mixed:.3e}  (diagnostic)")

# ---- max principle with flow
rep = None
for _ in range(5):
    f = m2.function(-np.abs(rng.standard_normal(m2.n_cells)))
    rep = maximum_principle_check(m2, V2, U2, f)
    print(f"  maxprinciple with flow: max u = {rep.max_u:.2e} (pass={rep.passed})")

# ---- Lp contraction at lam=1 (u + Au = f)
print("== Lp contraction ==")
m = build_interval(0, 1, 800)
V = sample_potential(PotentialSpec(C=2.0, r=2.0), m)
op = assemble(m, V)
worst = np.inf
for p in (2.0, 4.0, np.inf):
    for alpha in (0.0, 0.5, 1.0):
        for _ in range(10):
            f = m.function(rng.standard_normal(m.n_cells))
            u = resolvent_solve(op, 1.0, f)
            nf = lp_norm(m.function(f.values), p, m.delta, alpha)
            nu = lp_norm(u, p, m.delta, alpha)
            worst = min(worst, (nf - nu) / max(nf, 1e-300))
print(f"  worst (||f||-||u||)/||f|| = {worst:.3e} (want >= -1e-8)")

# ---- parabolic contraction + heat decay
print("== parabolic ==")
op0 = assemble(m, m.constant(0.0))
u0 = m.sample(lambda x: np.sin(np.pi * x))
traj = parabolic_evolve(op0, u0, None, T=0.1, K=1000)
final = traj.states[-1]
exact = np.exp(-np.pi**2 * 0.1) * np.sin(np.pi * m.cell_centers)
print(f"  heat decay sup err: {np.max(np.abs(final - exact)) / np.max(np.abs(exact)):.3e} (want <= 2e-2)")

lam1, psi1 = principal_eigenpair(op0, adjoint=True)
worstm = np.inf
for _ in range(5):
    a = m.function(rng.standard_normal(m.n_cells))
    b = m.function(rng.standard_normal(m.n_cells))
    fa = m.function(rng.standard_normal(m.n_cells))
    fb = m.function(rng.standard_normal(m.n_cells))
    t1 = parabolic_evolve(assemble(m, V), a, fa, T=0.5, K=50)
    t2 = parabolic_evolve(assemble(m, V), b, fb, T=0.5, K=50)
    for alpha in (0.0, 0.5, 1.0):
        marg = contraction_margin(t1, t2, alpha, psi1)
        scale = integrate(m, np.abs(a.values - b.values) * psi1.values**alpha) + 1e-300
        worstm = min(worstm, np.min(marg) / scale)
print(f"  worst per-step margin/scale = {worstm:.3e} (want >= -1e-8)")

# ---- CN: unitarity, time reversal, galerkin cross-check, confinement monotonicity
print("== CN ==")
omega = Domain.interval(0.0, 1.0)
box = build_interval(-0.5, 1.5, 2000)
psi0_vals = np.where((box.cell_centers > 0) & (box.cell_centers < 1),
                     np.sin(np.pi * np.clip(box.cell_centers, 0, 1)) ** 2, 0.0)
psi0 = box.function(psi0_vals.astype(complex))
outs = {}
for C in (10.0, 100.0, 1000.0):
    Vq = extend_potential(truncate(PotentialSpec(C=C, r=2.0), 1e6), omega, 0.0, box)
    opb = assemble(box, Vq)
    traj = schrodinger_cn(opb, psi0, T=1.0, K=500, record_every=50)
    drift = np.max(np.abs(traj.mass - traj.mass[0])) / traj.mass[0]
    rep = confinement_report(traj, omega, fit_times=(0.1, 1.0), window=(0.1, 0.24))
    outs[C] = rep.outside_mass[-1]
    fits = {t: f.exponent for t, f in rep.decay_fits.items()}
    print(f"  C={C}: mass drift={drift:.2e}, outside(t=1)={rep.outside_mass[-1]:.3e}, fits={fits}")
print("  monotone in C:", outs[10.0] > outs[100.0] > outs[1000.0])

# time reversal
Vq = extend_potential(truncate(PotentialSpec(C=100.0, r=2.0), 1e6), omega, 0.0, box)
opb = assemble(box, Vq)
fwd = schrodinger_cn(opb, psi0, T=0.5, K=250, record_every=250)
back = schrodinger_cn(opb, box.function(fwd.states[-1]), T=-0.5, K=250, record_every=250)
err = np.sqrt(integrate(box, np.abs(back.states[-1] - psi0.values) ** 2))
print(f"  time-reversal L2 err: {err:.2e} (want <= 1e-8)")

# galerkin vs CN on the omega mesh with truncated V
momega = build_interval(0, 1, 200)
Vt = sample_potential(truncate(PotentialSpec(C=2.0, r=2.0), 200.0), momega)
opo = assemble(momega, Vt)
eig = eigen_spectrum(opo, 30)
psi0o = momega.sample(lambda x: np.exp(-((x - 0.4) / 0.12) ** 2)).values.astype(complex)
psi0o = momega.function(psi0o)
coeffs, tailfrac = galerkin_coefficients(psi0o, eig)
print(f"  galerkin tail fraction with 30 modes: {tailfrac:.2e}")
times = np.array([0.0, 0.25, 0.5])
gal = schrodinger_galerkin(coeffs, eig, times)
errs = []
for mm, KK in ((10, 200), (20, 400), (30, 800)):
    eig_m = eigen_spectrum(opo, mm)
    c_m, _ = galerkin_coefficients(psi0o, eig_m)
    g = schrodinger_galerkin(c_m, eig_m, times)
    cn = schrodinger_cn(opo, psi0o, T=0.5, K=KK, record_every=KK)
    errs.append(np.sqrt(integrate(momega, np.abs(g.states[-1] - cn.states[-1]) ** 2)))
print("  galerkin-vs-CN refinement errors:", ["%.3e" % e for e in errs])
