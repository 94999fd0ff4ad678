"""Stationary solves: truncated approximation sequences, weighted-estimate
reports, cutoff test functions, duality residuals and sign principles.

The truncation scheme solves with V capped at increasing levels j and a
sign-preserving cap on the data, recording the boundary-weighted estimate
ratios and the sup-distance between successive iterates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mesh import GridFunction, GridVector, Mesh, integrate
from .model import FlowSpec, PotentialSpec, sample_flow, sample_potential, truncate, truncate_rhs
from .operator import DiscreteOperator, SolverError, apply_adjoint, assemble, direct_solve
from .rearrange import gradient, lorentz_norm

__all__ = [
    "ApproximationRun",
    "TestFunction",
    "EstimateReport",
    "MaxPrincipleReport",
    "solve_truncated_sequence",
    "verify_estimates",
    "make_cutoff_test",
    "weak_residual",
    "kato_margin",
    "maximum_principle_check",
]

_ALPHAS = (0.0, 0.5, 1.0)


@dataclass
class ApproximationRun:
    """Solutions and diagnostics of a truncation schedule."""

    j_schedule: list
    iterates: list = field(default_factory=list)
    estimate_lhs: dict = field(default_factory=lambda: {a: [] for a in _ALPHAS})
    estimate_rhs: dict = field(default_factory=lambda: {a: [] for a in _ALPHAS})
    solution_norms: list = field(default_factory=list)
    sup_diffs: list = field(default_factory=list)
    converged: bool = False
    converged_at: Optional[float] = None
    error: Optional[str] = None

    def estimate_ratios(self, alpha: float) -> np.ndarray:
        lhs = np.asarray(self.estimate_lhs[alpha])
        rhs = np.asarray(self.estimate_rhs[alpha])
        return lhs / np.where(rhs == 0.0, np.inf, rhs)


@dataclass(frozen=True)
class TestFunction:
    """A C^2-style test function, optionally multiplied by the interior cutoff
    that vanishes for delta <= 2/j and equals one for delta >= 3/j."""

    values: GridFunction
    base: GridFunction
    cutoff_level: Optional[float] = None


@dataclass(frozen=True)
class EstimateReport:
    alphas: tuple
    lhs: dict
    rhs: dict
    ratios: dict
    u_lorentz: float
    grad_lorentz: float
    ceiling: Optional[float]
    violations: list


@dataclass(frozen=True)
class MaxPrincipleReport:
    max_u: float
    f_max_abs: float
    passed: bool


def _dual_exponent(mesh: Mesh) -> float:
    return np.inf if mesh.dim == 1 else mesh.dim / (mesh.dim - 1)


def solution_lorentz_norm(u: GridFunction) -> float:
    """Natural solution-space norm: max norm in 1D, (2, inf) Lorentz in 2D."""
    p = _dual_exponent(u.mesh)
    if np.isinf(p):
        return float(np.max(np.abs(u.values)))
    return lorentz_norm(u, p, np.inf)


def solve_truncated_sequence(mesh: Mesh, V: PotentialSpec, U: FlowSpec,
                             f: GridFunction, j_schedule,
                             conv_tol: float = 1e-8) -> ApproximationRun:
    """Solve the capped problems along the schedule and record diagnostics.

    Numerical convergence is declared once a successive sup-difference falls
    below conv_tol times the sup of the data.  Solver failures leave the run
    partially populated with the error recorded.
    """
    schedule = [float(j) for j in j_schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("truncation schedule must be nonempty and strictly increasing")
    run = ApproximationRun(j_schedule=schedule)
    flow = sample_flow(U, mesh)
    f_scale = float(np.max(np.abs(f.values)))
    for j in schedule:
        Vj = sample_potential(truncate(V, j), mesh)
        fj = truncate_rhs(f, j)
        try:
            op = assemble(mesh, Vj, flow)
            uj = direct_solve(op, fj)
        except SolverError as exc:
            run.error = f"solver failed at j={j}: {exc}"
            raise SolverError(run.error, residual=exc.residual) from exc
        run.iterates.append(uj)
        for alpha in _ALPHAS:
            w = mesh.delta**alpha
            run.estimate_lhs[alpha].append(float(integrate(mesh, Vj.values * np.abs(uj.values) * w)))
            run.estimate_rhs[alpha].append(float(integrate(mesh, np.abs(fj.values) * w)))
        run.solution_norms.append(solution_lorentz_norm(uj))
        if len(run.iterates) >= 2:
            diff = float(np.max(np.abs(run.iterates[-1].values - run.iterates[-2].values)))
            run.sup_diffs.append(diff)
            if not run.converged and diff < conv_tol * f_scale:
                run.converged = True
                run.converged_at = j
    return run


def verify_estimates(u: GridFunction, V: GridFunction, f: GridFunction,
                     alpha: float, U_norm_proxy: float = 0.0,
                     ceiling: Optional[float] = None) -> EstimateReport:
    """Measure the boundary-weighted estimate ratios for alpha in {0, alpha, 1}.

    Pure measurement: left side int V |u| delta^a, right side int |f| delta^a,
    plus the solution and gradient Lorentz norms.  Ratios above the ceiling
    (when given) are flagged, not raised.
    """
    mesh = u.mesh
    alphas = tuple(sorted({0.0, float(alpha), 1.0}))
    lhs, rhs, ratios, violations = {}, {}, {}, []
    for a in alphas:
        w = mesh.delta**a
        lhs[a] = float(integrate(mesh, V.values * np.abs(u.values) * w))
        rhs[a] = float(integrate(mesh, np.abs(f.values) * w))
        ratios[a] = lhs[a] / rhs[a] if rhs[a] > 0 else (0.0 if lhs[a] == 0 else np.inf)
        if ceiling is not None and ratios[a] > ceiling * (1.0 + U_norm_proxy):
            violations.append(a)
    grad = gradient(u).magnitude()
    p = _dual_exponent(mesh)
    grad_norm = float(np.max(grad.values)) if np.isinf(p) else lorentz_norm(grad, p, np.inf)
    return EstimateReport(
        alphas=alphas, lhs=lhs, rhs=rhs, ratios=ratios,
        u_lorentz=solution_lorentz_norm(u), grad_lorentz=grad_norm,
        ceiling=ceiling, violations=violations,
    )


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """Quintic ramp: 0 for t <= 0, 1 for t >= 1, C^2 monotone in between."""
    s = np.clip(t, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def cutoff_profile(mesh: Mesh, j: float) -> np.ndarray:
    """The interior cutoff h_j: 0 where delta <= 2/j, 1 where delta >= 3/j."""
    eps = 1.0 / j
    return _smoothstep((mesh.delta - 2.0 * eps) / eps)


def make_cutoff_test(phi: GridFunction, j: float, mesh: Mesh) -> TestFunction:
    """Multiply phi by the interior cutoff at level j.

    The transition band 2/j < delta < 3/j must hold at least 3 cells so the
    band is resolved; the product vanishes identically near the boundary.
    """
    if j <= 0:
        raise ValueError(f"cutoff level must be positive, got {j}")
    band = np.count_nonzero((mesh.delta > 2.0 / j) & (mesh.delta < 3.0 / j))
    if band < 3:
        raise ValueError(
            f"cutoff band (2/j, 3/j) holds {band} cells at j={j}; refine or lower j"
        )
    hj = cutoff_profile(mesh, j)
    return TestFunction(values=GridFunction(mesh, hj * phi.values), base=phi, cutoff_level=j)


def weak_residual(u: GridFunction, f: GridFunction, V: GridFunction,
                  U: GridVector | None, phi) -> float:
    """|int u (L* phi + V phi) - int f phi| for a test function phi.

    For the discrete solution this reduces to the transpose identity and
    vanishes to solver accuracy, for any discrete test function.
    """
    test = phi.values if isinstance(phi, TestFunction) else phi
    mesh = u.mesh
    op = assemble(mesh, V, U)
    lstar = apply_adjoint(op, test, include_potential=True)
    lhs = integrate(mesh, u.values * lstar.values)
    rhs = integrate(mesh, f.values * test.values)
    return float(abs(lhs - rhs))


def kato_margin(u_bar: GridFunction, phi: GridFunction, V: GridFunction,
                U: GridVector | None, f: GridFunction) -> float:
    """Slack of the sign inequality int |u| L* phi <= int phi sign(u) L u.

    L u is recovered cellwise from the solved equation as f - V u; phi must
    be nonnegative.  Nonnegative output (up to roundoff) is the discrete
    shadow of the uniqueness mechanism.
    """
    if np.any(phi.values < -1e-14 * max(1.0, float(np.max(np.abs(phi.values))))):
        raise ValueError("test function must be nonnegative")
    mesh = u_bar.mesh
    op = assemble(mesh, V, U)
    lstar_phi = apply_adjoint(op, phi, include_potential=False)
    lu = f.values - V.values * u_bar.values
    lhs = integrate(mesh, np.abs(u_bar.values) * lstar_phi.values)
    rhs = integrate(mesh, phi.values * np.sign(u_bar.values) * lu)
    return float(rhs - lhs)


def maximum_principle_check(mesh: Mesh, V: GridFunction, U: GridVector | None,
                            f: GridFunction) -> MaxPrincipleReport:
    """Solve with nonpositive data and report the largest cell value."""
    if np.any(f.values > 0):
        raise ValueError("maximum principle check needs f <= 0 cellwise")
    op = assemble(mesh, V, U)
    u = direct_solve(op, f)
    f_scale = float(np.max(np.abs(f.values)))
    max_u = float(np.max(u.values))
    return MaxPrincipleReport(max_u=max_u, f_max_abs=f_scale,
                              passed=max_u <= 1e-12 * max(f_scale, 1e-300))
