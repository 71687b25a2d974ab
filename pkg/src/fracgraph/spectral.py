"""Eigendecomposition of -Delta in the mu-inner product and the fractional kernel.

The kernel W_s couples every pair of distinct vertices.  It has two equivalent
representations, both implemented here:

* spectral:    W_s(x,y) = -mu(x) mu(y) sum_i lambda_i^s phi_i(x) phi_i(y)
* semigroup:   W_s(x,y) = s/Gamma(1-s) * mu(x) mu(y)
                          * int_0^inf h(t,x,y) t^(-1-s) dt

where h is the heat kernel of -Delta.  The semigroup route is evaluated by an
independent log-substituted Simpson quadrature and serves as an oracle for the
spectral route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    ExponentOutOfRange,
    NegativeTime,
    NoConvergence,
    PositivityViolation,
    QuadratureNotConverged,
)
from .graph import Graph, _check_length

__all__ = [
    "SpectralDecomposition",
    "decompose",
    "heat_kernel",
    "heat_kernel_matrix",
    "spectral_weight_matrix",
    "kernel_weights",
    "kernel_weights_oracle",
    "fractional_power_quadrature",
    "gamma",
    "fractional_laplacian_spectral",
]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of -Delta, mu-orthonormal, eigenvalues ascending.

    ``phi[i]`` is the i-th eigenfunction; lambda_0 is exactly 0 and phi[0] is
    the positive constant 1/sqrt(vol V).
    """

    graph: Graph
    eigenvalues: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.phi.setflags(write=False)

    @property
    def n(self) -> int:
        return self.graph.n


def decompose(graph: Graph, zero_tol: float = 1e-10) -> SpectralDecomposition:
    """Diagonalize -Delta via its symmetric conjugate in l2.

    The conjugate S = M^(1/2) A M^(-1/2) (M = diag(mu)) is symmetric, so a
    dense symmetric eigensolver applies; eigenfunctions are back-transformed
    by phi_i = psi_i / sqrt(mu).  The smallest eigenvalue is snapped to an
    exact 0 so that 0^s evaluates to 0 in the kernel construction.
    """
    graph.require_valid()
    rmu = np.sqrt(graph.mu)
    s_mat = -graph.weights / np.outer(rmu, rmu)
    np.fill_diagonal(s_mat, graph.degrees / graph.mu)
    try:
        vals, psi = np.linalg.eigh(s_mat)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc

    lam_max = float(vals[-1]) if vals[-1] > 0 else 1.0
    if abs(vals[0]) >= zero_tol * lam_max:
        raise NoConvergence(
            f"smallest eigenvalue {vals[0]:.3e} is not numerically zero"
        )
    vals = vals.copy()
    vals[0] = 0.0

    phi = (psi / rmu[:, None]).T
    # deterministic sign: largest-magnitude entry of each eigenfunction positive
    for i in range(len(vals)):
        k = int(np.argmax(np.abs(phi[i])))
        if phi[i, k] < 0:
            phi[i] = -phi[i]
    return SpectralDecomposition(graph=graph, eigenvalues=vals, phi=np.ascontiguousarray(phi))


def heat_kernel_matrix(dec: SpectralDecomposition, t: float) -> np.ndarray:
    """Heat kernel h(t,x,y) = sum_i exp(-lambda_i t) phi_i(x) phi_i(y), as a matrix."""
    if t < 0:
        raise NegativeTime(f"t = {t}")
    decay = np.exp(-dec.eigenvalues * t)
    return dec.phi.T @ (decay[:, None] * dec.phi)


def heat_kernel(dec: SpectralDecomposition, t: float, x: int, y: int) -> float:
    """Heat kernel at a single vertex pair."""
    if t < 0:
        raise NegativeTime(f"t = {t}")
    decay = np.exp(-dec.eigenvalues * t)
    return float(np.sum(decay * dec.phi[:, x] * dec.phi[:, y]))


def spectral_weight_matrix(dec: SpectralDecomposition, s: float) -> np.ndarray:
    """Raw spectral kernel -mu(x)mu(y) sum_i lambda_i^s phi_i(x)phi_i(y), zero diagonal.

    No range check on s; s = 1 recovers the edge weights w exactly.
    """
    powers = np.where(dec.eigenvalues > 0, dec.eigenvalues, 1.0) ** s
    powers[dec.eigenvalues <= 0] = 0.0
    mu = dec.graph.mu
    w = -np.outer(mu, mu) * (dec.phi.T @ (powers[:, None] * dec.phi))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    return w


def kernel_weights(dec: SpectralDecomposition, s: float) -> np.ndarray:
    """Fractional kernel W_s for s in (0,1); strictly positive off the diagonal.

    Raises PositivityViolation if any off-diagonal entry is negative beyond
    -1e-12 times the largest entry, which would indicate eigensolver failure.
    """
    if not 0.0 < s < 1.0:
        raise ExponentOutOfRange(f"s = {s}, need 0 < s < 1")
    w = spectral_weight_matrix(dec, s)
    off = w[~np.eye(dec.n, dtype=bool)]
    scale = float(np.max(np.abs(off))) if off.size else 0.0
    if off.size and float(np.min(off)) < -1e-12 * scale:
        raise PositivityViolation(
            f"min off-diagonal entry {np.min(off):.3e} at s={s}"
        )
    return w


def gamma(z: float) -> float:
    """Gamma function on (0, 2)."""
    if not 0.0 < z < 2.0:
        raise DomainError(f"z = {z}, need 0 < z < 2")
    return math.gamma(z)


def fractional_power_quadrature(
    lam: float,
    s: float,
    tau_min: float = -40.0,
    tau_max: float = 40.0,
    panels: int = 8192,
    check_tol: float = 1e-9,
) -> float:
    """Evaluate s/Gamma(1-s) * int_0^inf (1 - exp(-lam t)) t^(-1-s) dt by quadrature.

    Equals lam^s analytically; computed here without calling the power
    function, so it can serve as an independent oracle.  The substitution
    t = exp(tau) is integrated by composite Simpson; the truncated head and
    tail are added in closed form (series expansion below t0 = exp(tau_min),
    pure power integral above t1 = exp(tau_max) where exp(-lam t) has
    underflowed).
    """
    if not 0.0 < s < 1.0:
        raise ExponentOutOfRange(f"s = {s}, need 0 < s < 1")
    if lam == 0.0:
        return 0.0
    if lam < 0.0:
        raise DomainError(f"lam = {lam}, need lam >= 0")

    def simpson(n_panels: int) -> float:
        tau = np.linspace(tau_min, tau_max, n_panels + 1)
        f = -np.expm1(-lam * np.exp(tau)) * np.exp(-s * tau)
        h = (tau_max - tau_min) / n_panels
        weights = np.ones(n_panels + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        return float(h / 3.0 * np.dot(weights, f))

    core = simpson(panels)
    if abs(core - simpson(panels // 2)) > check_tol * (abs(core) + 1.0):
        raise QuadratureNotConverged(f"lam={lam}, s={s}")

    t0 = math.exp(tau_min)
    head = (
        lam * t0 ** (1.0 - s) / (1.0 - s)
        - lam**2 * t0 ** (2.0 - s) / (2.0 * (2.0 - s))
        + lam**3 * t0 ** (3.0 - s) / (6.0 * (3.0 - s))
    )
    t1 = math.exp(tau_max)
    tail = t1 ** (-s) / s

    return s / gamma(1.0 - s) * (core + head + tail)


def kernel_weights_oracle(
    dec: SpectralDecomposition,
    s: float,
    tau_min: float = -40.0,
    tau_max: float = 40.0,
    panels: int = 8192,
) -> np.ndarray:
    """Fractional kernel via the heat-semigroup integral; oracle for kernel_weights.

    For x != y the completeness relation sum_i phi_i(x)phi_i(y) = 0 lets the
    integrand be written as sum_i (exp(-lambda_i t) - 1) phi_i(x) phi_i(y),
    which is O(t) near 0; integrating term by term on shared quadrature nodes
    reduces the matrix to scalar quadratures, one per eigenvalue.
    """
    if not 0.0 < s < 1.0:
        raise ExponentOutOfRange(f"s = {s}, need 0 < s < 1")
    powers = np.array(
        [
            fractional_power_quadrature(lam, s, tau_min, tau_max, panels)
            for lam in dec.eigenvalues
        ]
    )
    mu = dec.graph.mu
    w = -np.outer(mu, mu) * (dec.phi.T @ (powers[:, None] * dec.phi))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    return w


def fractional_laplacian_spectral(
    dec: SpectralDecomposition, s: float, u: np.ndarray
) -> np.ndarray:
    """(-Delta)^s u via the spectral sum sum_i lambda_i^s <u, phi_i>_mu phi_i."""
    if not 0.0 < s < 1.0:
        raise ExponentOutOfRange(f"s = {s}, need 0 < s < 1")
    u = _check_length(dec.graph, u, "u")
    coeffs = dec.phi @ (u * dec.graph.mu)
    powers = np.where(dec.eigenvalues > 0, dec.eigenvalues, 1.0) ** s
    powers[dec.eigenvalues <= 0] = 0.0
    return (powers * coeffs) @ dec.phi
