"""Grid-based fractional calculus on uniform time grids.

The workhorse is product integration: the weakly singular kernel
tau^(alpha-1) is integrated exactly against piecewise-linear data, which is
what makes the Riemann-Liouville integral and the P_alpha convolutions
downstream second-order accurate despite the kernel singularity at tau = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .specfun import gamma_fn

__all__ = [
    "TimeGrid",
    "GridFunction",
    "LaplaceEstimate",
    "singular_convolution",
    "rl_integral",
    "rl_derivative",
    "caputo_derivative",
    "numeric_laplace",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] with nodes t_i = i*T/n_steps."""

    T: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.T <= 0.0:
            raise ValueError(f"TimeGrid.T must be > 0, got {self.T}")
        if self.n_steps < 1:
            raise ValueError(f"TimeGrid.n_steps must be >= 1, got {self.n_steps}")

    @property
    def h(self) -> float:
        return self.T / self.n_steps

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.linspace(0.0, self.T, self.n_steps + 1)
        nodes.flags.writeable = False
        return nodes

    def halved(self) -> "TimeGrid":
        """Same horizon, doubled resolution (for mesh-halving studies)."""
        return TimeGrid(self.T, 2 * self.n_steps)

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        idx = round(t / self.h)
        if not 0 <= idx <= self.n_steps or abs(idx * self.h - t) > tol * max(1.0, self.T):
            raise ValueError(f"t={t} is not a node of {self}")
        return idx


@dataclass(frozen=True)
class GridFunction:
    """Values on the nodes of a TimeGrid; scalar (n+1,) or field (n+1, m)."""

    grid: TimeGrid
    values: np.ndarray
    flags: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape[0] != self.grid.n_steps + 1:
            raise ValueError(
                f"GridFunction needs one value per node: got shape {values.shape} "
                f"for {self.grid.n_steps + 1} nodes"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, grid: TimeGrid, fn) -> "GridFunction":
        return cls(grid, np.array([fn(t) for t in grid.nodes], dtype=float))

    @property
    def is_field(self) -> bool:
        return self.values.ndim > 1


def _product_weights(alpha: float, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Left/right panel weights U_m, V_m of int_{tau_m}^{tau_{m+1}} tau^(alpha-1)
    * (linear interpolant) dtau on the uniform grid."""
    tau = grid.nodes
    h = grid.h
    m0 = np.diff(tau ** alpha) / alpha
    m1 = np.diff(tau ** (alpha + 1.0)) / (alpha + 1.0)
    left = (tau[1:] * m0 - m1) / h
    right = (m1 - tau[:-1] * m0) / h
    return left, right


def _convolve_columns(a: np.ndarray, k: np.ndarray, n_out: int) -> np.ndarray:
    """(a * k)[0:n_out] along axis 0, k possibly 2-d."""
    if k.ndim == 1:
        return np.convolve(a, k)[:n_out]
    out = np.empty((n_out, k.shape[1]))
    for j in range(k.shape[1]):
        out[:, j] = np.convolve(a, k[:, j])[:n_out]
    return out


def singular_convolution(
    alpha: float, smooth: np.ndarray, k: np.ndarray, grid: TimeGrid
) -> np.ndarray:
    """c(t_i) = int_0^{t_i} tau^(alpha-1) * w(tau) * k(t_i - tau) dtau.

    `smooth` holds w on the grid nodes (w(tau_j), shape (n+1,) or (n+1, m));
    `k` holds k on the grid nodes with matching trailing shape.  The product
    w(tau) k(t-tau) is treated as piecewise linear in tau and integrated
    against the exact moments of tau^(alpha-1).
    """
    if alpha <= 0.0:
        raise ValueError(f"singular_convolution requires alpha > 0, got {alpha}")
    smooth = np.asarray(smooth, dtype=float)
    k = np.asarray(k, dtype=float)
    n = grid.n_steps
    if smooth.shape[0] != n + 1 or k.shape[0] != n + 1:
        raise ValueError("smooth and k must be sampled on the full grid")
    if smooth.ndim > 1 and k.ndim > 1 and smooth.shape[1] != k.shape[1]:
        raise ValueError(f"column mismatch: smooth {smooth.shape} vs k {k.shape}")
    left, right = _product_weights(alpha, grid)
    if smooth.ndim == 1 and k.ndim == 1:
        return _sc_1d(left * smooth[:-1], right * smooth[1:], k, n)
    smooth2 = smooth if smooth.ndim > 1 else np.broadcast_to(smooth[:, None], k.shape)
    k2 = k if k.ndim > 1 else np.broadcast_to(k[:, None], smooth.shape)
    out = np.zeros(k2.shape)
    for j in range(k2.shape[1]):
        sj = smooth2[:, j]
        out[:, j] = _sc_1d(left * sj[:-1], right * sj[1:], k2[:, j], n)
    return out


def _sc_1d(a: np.ndarray, b: np.ndarray, k: np.ndarray, n: int) -> np.ndarray:
    # c_i = sum_{m<=i-1} a_m k_{i-m} + sum_{m<=i-1} b_m k_{i-1-m}
    conv_a = np.convolve(a, k)[: n + 1]
    # drop the m = i term a_i k_0 that full convolution includes
    conv_a[: n] -= a * k[0]
    conv_b = np.convolve(b, k)[: n]
    c = conv_a
    c[1:] += conv_b
    c[0] = 0.0
    return c


def rl_integral(alpha: float, u: GridFunction) -> GridFunction:
    """Riemann-Liouville integral J^alpha u by product trapezoidal rule."""
    if alpha <= 0.0:
        raise ValueError(f"rl_integral requires alpha > 0, got {alpha}")
    ones = np.ones(u.grid.n_steps + 1)
    vals = singular_convolution(alpha, ones, u.values, u.grid) / gamma_fn(alpha)
    return GridFunction(u.grid, vals)


def rl_derivative(alpha: float, u: GridFunction) -> GridFunction:
    """Riemann-Liouville derivative D^alpha u = d^2/dt^2 J^(2-alpha) u,
    alpha in (1,2].

    Interior nodes use the centered second difference; the two end nodes use
    one-sided differences and are flagged in the result's `flags` mask.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"rl_derivative requires alpha in (1,2], got {alpha}")
    if u.grid.n_steps < 4:
        raise ValueError("rl_derivative needs n_steps >= 4")
    v = u.values if alpha == 2.0 else rl_integral(2.0 - alpha, u).values
    h2 = u.grid.h ** 2
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    d2[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    flags = np.zeros(u.grid.n_steps + 1, dtype=bool)
    flags[0] = flags[-1] = True
    return GridFunction(u.grid, d2, flags=flags)


def caputo_derivative(alpha: float, u: GridFunction, u0, du0) -> GridFunction:
    """Caputo derivative: D^alpha applied to u(t) - u(0) - u'(0) t.

    du0 is caller-supplied data (never differenced from the grid); u0 must
    match the node-0 samples.
    """
    u0 = np.asarray(u0, dtype=float)
    du0 = np.asarray(du0, dtype=float)
    if not np.allclose(u.values[0], u0, rtol=1e-12, atol=1e-12):
        raise ValueError("caputo_derivative: u0 does not match u at t=0")
    t = u.grid.nodes
    if u.is_field:
        corrected = u.values - u0[None, :] - t[:, None] * du0[None, :]
    else:
        corrected = u.values - u0 - t * du0
    return rl_derivative(alpha, GridFunction(u.grid, corrected))


@dataclass(frozen=True)
class LaplaceEstimate:
    """Finite-horizon Laplace value plus the analytic tail bound."""

    value: float | np.ndarray
    truncation_bound: float


def numeric_laplace(
    u: GridFunction, s: float, bound_M: float, bound_omega: float
) -> LaplaceEstimate:
    """Trapezoidal int_0^T e^(-s t) u(t) dt with the exponential-boundedness
    tail estimate bound_M * e^(-(s-omega)T) / (s-omega)."""
    if bound_omega < 0.0:
        raise ValueError("bound_omega must be >= 0")
    if s <= bound_omega:
        raise ValueError(
            f"numeric_laplace requires s > bound_omega ({s} <= {bound_omega}): "
            "the integral is not dominated"
        )
    t = u.grid.nodes
    weight = np.exp(-s * t)
    integrand = weight[:, None] * u.values if u.is_field else weight * u.values
    value = np.trapezoid(integrand, t, axis=0)
    tail = bound_M * np.exp(-(s - bound_omega) * u.grid.T) / (s - bound_omega)
    return LaplaceEstimate(value if u.is_field else float(value), float(tail))
