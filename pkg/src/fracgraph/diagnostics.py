"""Quantitative checks along computed trajectories.

Verifies, with explicit tolerances, the structural facts of the flow:
mass conservation, the maximum principle, the energy identity

    q/(q+1) int u(T)^(q+1) dmu + int_0^T int |grad^s u|^p dmu dt
        = q/(q+1) int u_0^(q+1) dmu,

the dissipation bound

    int_0^T int (u^((q-1)/2) du/dt)^2 dmu dt <= 1/(pq) int |grad^s u_0|^p dmu,

and the decay of the Dirichlet energy toward the constant steady state.
Time derivatives are reconstructed by re-applying the right-hand side at the
stored states (never by differencing the trajectory), and time integrals use
the composite trapezoid rule on the uniform output grid.  The dissipation
integral is truncated at the horizon, which only weakens its left-hand side
because the integrand is nonnegative.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NonPositiveState
from .flow import FlowConfig, Trajectory, rhs_direct, steady_state
from .graph import Graph, _check_length, integrate
from .operators import FractionalKernel, dirichlet_p_energy

__all__ = [
    "DiagnosticsReport",
    "mass",
    "energy_identity_residual",
    "dissipation_check",
    "max_principle_check",
    "gradient_decay",
    "time_derivative_sup",
    "build_report",
]


@dataclass(frozen=True)
class DiagnosticsReport:
    energy_identity_residual: float
    dissipation_lhs: float
    dissipation_rhs: float
    dissipation_satisfied: bool
    mass_drift: float
    bound_violation: float
    final_gradient_energy: float
    initial_gradient_energy: float
    steady_state_error: float
    final_time_derivative_sup: float

    def to_json(self, **extra) -> str:
        payload = asdict(self)
        payload.update(extra)
        return json.dumps(payload, indent=2)


def mass(graph: Graph, u: np.ndarray, q: float) -> float:
    """int u^q dmu; conserved along the flow."""
    u = _check_length(graph, u, "u")
    if np.min(u) <= 0.0 and not float(q).is_integer():
        raise NonPositiveState(f"min u = {np.min(u)} with non-integer q = {q}")
    return integrate(graph, u**q)


def _trapezoid(times: np.ndarray, samples: np.ndarray) -> float:
    return float(np.trapezoid(samples, times))


def energy_identity_residual(
    traj: Trajectory, kernel: FractionalKernel, p: float, q: float
) -> float:
    """Scaled residual |LHS - RHS| / (|RHS| + 1) of the energy identity."""
    graph = kernel.graph
    energies = np.array([dirichlet_p_energy(kernel, u, p) for u in traj.values])
    lhs = q / (q + 1.0) * integrate(graph, traj.final ** (q + 1.0)) + _trapezoid(
        traj.times, energies
    )
    rhs = q / (q + 1.0) * integrate(graph, traj.u0 ** (q + 1.0))
    return abs(lhs - rhs) / (abs(rhs) + 1.0)


def dissipation_check(
    traj: Trajectory,
    kernel: FractionalKernel,
    p: float,
    q: float,
    eps_reg: float = 1e-12,
    slack: float = 1e-6,
):
    """Truncated dissipation integral against its initial-energy bound.

    Returns (lhs, rhs, satisfied) with satisfied = lhs <= rhs + slack*(rhs+1).
    """
    graph = kernel.graph
    samples = np.empty(len(traj.times))
    for k, u in enumerate(traj.values):
        dudt = rhs_direct(kernel, u, p, q, eps_reg)
        samples[k] = integrate(graph, u ** (q - 1.0) * dudt**2)
    lhs = _trapezoid(traj.times, samples)
    rhs = dirichlet_p_energy(kernel, traj.u0, p) / (p * q)
    return lhs, rhs, lhs <= rhs + slack * (rhs + 1.0)


def max_principle_check(traj: Trajectory, u0: np.ndarray | None = None) -> float:
    """Largest excursion outside [min u0, max u0] over the whole grid (0 if none)."""
    if u0 is None:
        u0 = traj.u0
    lo, hi = float(np.min(u0)), float(np.max(u0))
    return max(float(np.max(traj.values)) - hi, lo - float(np.min(traj.values)), 0.0)


def gradient_decay(traj: Trajectory, kernel: FractionalKernel, p: float) -> np.ndarray:
    """Dirichlet p-energy at every output time."""
    return np.array([dirichlet_p_energy(kernel, u, p) for u in traj.values])


def time_derivative_sup(
    traj: Trajectory, kernel: FractionalKernel, p: float, q: float, eps_reg: float = 1e-12
) -> float:
    """max_x |du/dt(x, T)| reconstructed from the right-hand side at the final state."""
    return float(np.max(np.abs(rhs_direct(kernel, traj.final, p, q, eps_reg))))


def build_report(
    traj: Trajectory, kernel: FractionalKernel, config: FlowConfig
) -> DiagnosticsReport:
    """Run every check on a finished trajectory."""
    p, q = config.p, config.q
    graph = kernel.graph
    mass0 = mass(graph, traj.u0, q)
    drift = max(abs(mass(graph, u, q) - mass0) for u in traj.values)
    # widen the slack by the trapezoid error budget of the output grid
    dt = float(traj.times[1] - traj.times[0])
    lhs, rhs, ok = dissipation_check(
        traj, kernel, p, q, config.eps_reg, slack=1e-6 + 10.0 * dt**2
    )
    energies = gradient_decay(traj, kernel, p)
    c = steady_state(graph, traj.u0, q)
    return DiagnosticsReport(
        energy_identity_residual=energy_identity_residual(traj, kernel, p, q),
        dissipation_lhs=lhs,
        dissipation_rhs=rhs,
        dissipation_satisfied=bool(ok),
        mass_drift=float(drift),
        bound_violation=max_principle_check(traj),
        final_gradient_energy=float(energies[-1]),
        initial_gradient_energy=float(energies[0]),
        steady_state_error=float(np.max(np.abs(traj.final - c))),
        final_time_derivative_sup=time_derivative_sup(traj, kernel, p, q, config.eps_reg),
    )
