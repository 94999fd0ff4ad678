"""Time evolution and contraction checks.

Real parabolic problems are stepped by implicit Euler, which inherits the
weighted L^1 nonexpansiveness of the resolvent step by step.  The complex
evolution runs twice: an exact spectral (Galerkin) phase evolution on the
eigenbasis, and a Crank-Nicolson finite-difference path on an enclosing
box that can leak mass across the finite barrier; confinement is measured
from the leak, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import Domain, GridFunction, Mesh, integrate
from .model import omega_coordinates, omega_mask
from .operator import DiscreteOperator, SolverError, resolvent_solve
from .spectral import DecayFit, EigenSystem, fit_power_decay

__all__ = [
    "ParabolicTrajectory",
    "WaveTrajectory",
    "ConfinementReport",
    "parabolic_evolve",
    "contraction_margin",
    "resolvent_contraction_margin",
    "auxiliary_positivity",
    "galerkin_coefficients",
    "schrodinger_galerkin",
    "schrodinger_cn",
    "confinement_report",
]


@dataclass
class ParabolicTrajectory:
    """Implicit-Euler trajectory: states[k] approximates u(times[k])."""

    mesh: Mesh
    times: np.ndarray
    states: list
    sources: list

    def weighted_history(self, weight: np.ndarray, alpha: float) -> np.ndarray:
        w = weight**alpha
        return np.array([integrate(self.mesh, np.abs(s) * w) for s in self.states])


@dataclass
class WaveTrajectory:
    """Complex states with conserved-mass bookkeeping.

    ``mass`` is the quadrature L^2 mass per recorded time; ``coeff_moduli``
    is only set for spectral evolutions (one row per time, constant by
    construction); ``outside_mass`` is only set for box runs.
    """

    mesh: Mesh
    times: np.ndarray
    states: list
    mass: np.ndarray
    coeff_moduli: Optional[np.ndarray] = None
    outside_mass: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ConfinementReport:
    times: np.ndarray
    outside_mass: np.ndarray
    initial_outside_mass: float
    decay_fits: dict
    threshold: float
    max_outside_mass: float
    passed: bool


def _sample_source(f, t: float, mesh: Mesh) -> np.ndarray:
    if f is None:
        return np.zeros(mesh.n_cells)
    if callable(f):
        out = f(t)
        return out.values if isinstance(out, GridFunction) else np.asarray(out)
    return f.values if isinstance(f, GridFunction) else np.asarray(f)


def parabolic_evolve(op: DiscreteOperator, u0: GridFunction, f, T: float,
                     K: int) -> ParabolicTrajectory:
    """K implicit-Euler steps of u' + A u = f on [0, T].

    The source is sampled at the end of each step (fully implicit), which
    preserves the per-step contraction inequality exactly.  A failed solve
    truncates the trajectory and reports the step index.
    """
    if K < 1 or T <= 0:
        raise ValueError("need K >= 1 and T > 0")
    mesh = op.mesh
    dt = T / K
    times = np.linspace(0.0, T, K + 1)
    states = [np.asarray(u0.values, dtype=float).copy()]
    sources = [np.zeros(mesh.n_cells)]
    for k in range(K):
        fk = _sample_source(f, times[k + 1], mesh)
        rhs = states[-1] + dt * fk
        try:
            u = resolvent_solve(op, dt, rhs)
        except SolverError as exc:
            raise SolverError(f"parabolic step {k + 1} failed: {exc}",
                              residual=exc.residual) from exc
        states.append(u.values)
        sources.append(fk)
    return ParabolicTrajectory(mesh=mesh, times=times, states=states, sources=sources)


def contraction_margin(traj: ParabolicTrajectory, traj_hat: ParabolicTrajectory,
                       alpha: float, psi1: GridFunction) -> np.ndarray:
    """Per-step slack of the order contraction with the psi1^alpha weight.

    Right side: positive part of the initial gap plus the time integral of
    the positive part of the source gap; left side: positive part of the
    state gap.  Margins should only dip below zero by roundoff.
    """
    if traj.mesh is not traj_hat.mesh and traj.mesh.shape != traj_hat.mesh.shape:
        raise ValueError("trajectories live on different meshes")
    if len(traj.times) != len(traj_hat.times) or not np.allclose(traj.times, traj_hat.times):
        raise ValueError("trajectories use different time grids")
    mesh = traj.mesh
    w = psi1.values**alpha
    dt = np.diff(traj.times)
    lhs0 = integrate(mesh, np.maximum(traj.states[0] - traj_hat.states[0], 0.0) * w)
    margins = np.empty(len(dt))
    rhs = lhs0
    for k in range(len(dt)):
        gap_f = np.maximum(traj.sources[k + 1] - traj_hat.sources[k + 1], 0.0)
        rhs += dt[k] * integrate(mesh, gap_f * w)
        lhs = integrate(mesh, np.maximum(traj.states[k + 1] - traj_hat.states[k + 1], 0.0) * w)
        margins[k] = rhs - lhs
    return margins


def resolvent_contraction_margin(op: DiscreteOperator, psi1: GridFunction,
                                 f: GridFunction, lam: float, alpha: float) -> float:
    """Slack of the resolvent nonexpansiveness in the psi1^alpha weighted L^1 norm."""
    u = resolvent_solve(op, lam, f)
    w = psi1.values**alpha
    return float(
        integrate(op.mesh, np.abs(f.values) * w) - integrate(op.mesh, np.abs(u.values) * w)
    )


def auxiliary_positivity(op: DiscreteOperator, psi1: GridFunction, u_bar: GridFunction,
                         alpha: float, eps: float) -> float:
    """The smoothed-weight functional int u [-Lap - U.grad] ((psi1+eps)^a - eps^a).

    Nonnegative for nonnegative u by the eigen-identity plus concavity of
    the power; evaluated with the discrete adjoint so convection enters
    with the correct sign.
    """
    if np.any(u_bar.values < 0):
        raise ValueError("auxiliary positivity check needs a nonnegative field")
    if eps <= 0:
        raise ValueError("smoothing level must be positive")
    psi_eps = (psi1.values + eps) ** alpha - eps**alpha
    lstar = op.diffusion @ psi_eps - op.convection @ psi_eps
    return float(integrate(op.mesh, u_bar.values * lstar))


def galerkin_coefficients(psi0: GridFunction, eig: EigenSystem):
    """Expansion coefficients of psi0 on the eigenbasis, with the
    truncated-mass fraction left outside the first m_max modes."""
    mesh = psi0.mesh
    vol = mesh.cell_volume
    basis = np.column_stack([u.values for u in eig.eigenfunctions])
    gram = basis.T @ basis * vol
    if np.max(np.abs(gram - np.eye(eig.m_max))) > 1e-8:
        raise ValueError("eigenbasis is not orthonormal; was it computed with convection?")
    coeffs = basis.T @ psi0.values * vol
    total = integrate(mesh, np.abs(psi0.values) ** 2)
    captured = float(np.sum(np.abs(coeffs) ** 2))
    fraction = 0.0 if total == 0 else max(0.0, 1.0 - captured / total)
    return coeffs, fraction


def schrodinger_galerkin(coeffs: np.ndarray, eig: EigenSystem, times) -> WaveTrajectory:
    """Exact phase evolution psi(t) = sum a_m exp(-i lam_m t) u_m."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (eig.m_max,):
        raise ValueError("coefficient count does not match the eigensystem")
    times = np.asarray(times, dtype=float)
    mesh = eig.eigenfunctions[0].mesh
    basis = np.column_stack([u.values for u in eig.eigenfunctions])
    states = []
    mass = np.empty(len(times))
    moduli = np.empty((len(times), eig.m_max))
    for k, t in enumerate(times):
        phases = np.exp(-1j * eig.eigenvalues * t)
        a_t = coeffs * phases
        psi = basis @ a_t
        states.append(psi)
        mass[k] = integrate(mesh, np.abs(psi) ** 2)
        moduli[k] = np.abs(a_t)
    return WaveTrajectory(mesh=mesh, times=times, states=states, mass=mass,
                          coeff_moduli=moduli)


def schrodinger_cn(op: DiscreteOperator, psi0: GridFunction, T: float, K: int,
                   record_every: int = 1) -> WaveTrajectory:
    """Crank-Nicolson evolution of i psi_t = A psi.

    One complex factorization is reused for all steps.  The scheme is the
    Cayley transform of the (symmetric) operator, so the quadrature mass is
    conserved to solver accuracy; running it with T < 0 applies the exact
    inverse, which is how the time-reversal check is performed.
    """
    if K < 1 or T == 0:
        raise ValueError("need K >= 1 and T != 0")
    mesh = op.mesh
    dt = T / K
    n = mesh.n_cells
    eye = sp.identity(n, format="csc")
    forward = (eye + 0.5j * dt * op.matrix).tocsc()
    backward = (eye - 0.5j * dt * op.matrix).tocsr()
    lu = spla.splu(forward)
    psi = np.asarray(psi0.values, dtype=complex).copy()
    times = [0.0]
    states = [psi.copy()]
    mass = [integrate(mesh, np.abs(psi) ** 2)]
    for k in range(K):
        psi = lu.solve(backward @ psi)
        if (k + 1) % record_every == 0 or k == K - 1:
            times.append((k + 1) * dt)
            states.append(psi.copy())
            mass.append(integrate(mesh, np.abs(psi) ** 2))
    return WaveTrajectory(mesh=mesh, times=np.asarray(times), states=states,
                          mass=np.asarray(mass))


def outside_mass_series(traj: WaveTrajectory, omega: Domain, origin=None) -> np.ndarray:
    inside = omega_mask(omega, traj.mesh, origin)
    vol = traj.mesh.cell_volume
    return np.array([np.sum(np.abs(s[~inside]) ** 2) * vol for s in traj.states])


def confinement_report(traj: WaveTrajectory, omega: Domain, fit_times=(),
                       window: Optional[tuple] = None, threshold: float = 1e-3,
                       origin=None) -> ConfinementReport:
    """Outside-mass time series plus near-boundary decay fits inside omega.

    The pass verdict requires the outside mass to stay below the threshold
    for the whole run.  Spectral trajectories live on the omega mesh and
    report identically zero outside mass.
    """
    mesh = traj.mesh
    if mesh.domain == omega:
        outside = np.zeros(len(traj.states))
        inside = np.ones(mesh.n_cells, dtype=bool)
    else:
        inside = omega_mask(omega, mesh, origin)
        outside = outside_mass_series(traj, omega, origin)
    fits = {}
    if window is not None and fit_times:
        pts = omega_coordinates(omega, mesh, origin)
        delta_omega = omega.boundary_distance(pts[inside])
        for t in fit_times:
            k = int(np.argmin(np.abs(traj.times - t)))
            vals = np.abs(traj.states[k][inside])
            fits[float(traj.times[k])] = fit_power_decay(delta_omega, vals, window)
    max_out = float(np.max(outside)) if len(outside) else 0.0
    return ConfinementReport(
        times=traj.times,
        outside_mass=outside,
        initial_outside_mass=float(outside[0]) if len(outside) else 0.0,
        decay_fits=fits,
        threshold=threshold,
        max_outside_mass=max_out,
        passed=max_out <= threshold,
    )
