"""Mild-solution machinery for the semilinear fractional Volterra problem

    CD^alpha u(t) = A u(t) + int_0^t h(t,s,u(s)) ds + f(t),
    u(0) = x, u'(0) = y,

solved through the fixed-point form

    u(t) = C_a(t)x + S_a(t)y + int_0^t P_a(t-s) [ int_0^s h(s,r,u(r)) dr + f(s) ] ds

by damped Picard iteration.  The nonlinearity acts on nodal samples
(pointwise composition), so each sweep does modal -> nodal -> h -> modal
round trips; the weakly singular P_a convolution uses product integration
with exact kernel moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .families import FamilyKind, family_symbol_table, _smooth_symbol_table
from .fracalc import GridFunction, TimeGrid, rl_integral, singular_convolution
from .specfun import gamma_fn
from .spectral import SpectralField, SpectralOperator, collocation_points

__all__ = [
    "NonConvergenceError",
    "NonlinearityDescriptor",
    "ForcingTerm",
    "ManufacturedSolution",
    "ProblemSpec",
    "SolveResult",
    "linear_mild_solution",
    "picard_solve",
    "volterra_form_residual",
    "make_manufactured",
]

_GL_X, _GL_W = leggauss(8)


class NonConvergenceError(RuntimeError):
    """Picard hit max_iter: the desk-scale contraction assumption failed (the
    underlying theory guarantees existence on a small horizon only, not
    convergence of this iteration).  Carries the partial result."""

    def __init__(self, iterations: int, residual: float, result: "SolveResult | None" = None):
        super().__init__(
            f"Picard iteration did not converge after {iterations} iterations "
            f"(last update norm ~{residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual
        self.result = result


class NonlinearityDescriptor:
    """h(t, s, w): nodal-space nonlinearity with its first-variable derivative.

    Built-ins supply h1 = dh/dt analytically: pointwise maps (sin, cubic,
    polynomial) optionally scaled by a separable kernel p(t) q(s), a linear
    memory kernel, or fully custom callables.
    """

    def __init__(self, kind, h_fn, h1_fn, time_factor=None, base_fn=None):
        self.kind = kind
        self._h = h_fn
        self._h1 = h1_fn
        # h(t,s,w) = time_factor(t) * base_fn(s,w) when separable
        self._time_factor = time_factor
        self._base = base_fn

    @classmethod
    def zero(cls) -> "NonlinearityDescriptor":
        return cls(
            "zero",
            lambda t, s, w: np.zeros_like(w),
            lambda t, s, w: np.zeros_like(w),
            time_factor=lambda t: 0.0,
            base_fn=lambda s, w: np.zeros_like(w),
        )

    @classmethod
    def pointwise(
        cls,
        name: str,
        scale: float = 1.0,
        coeffs=None,
        kernel_t=None,
        kernel_t_derivative=None,
    ) -> "NonlinearityDescriptor":
        """rho applied to nodal values: name in {"sin", "cubic", "poly"};
        optional time kernel p(t) (with its analytic derivative) multiplies
        the whole term."""
        if name == "sin":
            rho = lambda v: scale * np.sin(v)
        elif name == "cubic":
            rho = lambda v: scale * v ** 3
        elif name == "poly":
            if coeffs is None:
                raise ValueError("pointwise 'poly' needs coeffs")
            c = np.asarray(coeffs, dtype=float)
            rho = lambda v: scale * np.polynomial.polynomial.polyval(v, c)
        else:
            raise ValueError(f"unknown pointwise nonlinearity {name!r}")
        if kernel_t is None:
            p = lambda t: 1.0
            dp = lambda t: 0.0
        else:
            if kernel_t_derivative is None:
                raise ValueError("a time kernel needs its analytic derivative")
            p, dp = kernel_t, kernel_t_derivative
        return cls(
            f"pointwise:{name}",
            lambda t, s, w: p(t) * rho(w),
            lambda t, s, w: dp(t) * rho(w),
            time_factor=p,
            base_fn=lambda s, w: rho(w),
        )

    @classmethod
    def linear_memory(cls, kernel, kernel_t_derivative) -> "NonlinearityDescriptor":
        """h(t,s,w) = k(t,s) w with analytic dk/dt."""
        return cls(
            "linear_memory",
            lambda t, s, w: kernel(t, s) * w,
            lambda t, s, w: kernel_t_derivative(t, s) * w,
        )

    @classmethod
    def custom(cls, h_fn, h1_fn) -> "NonlinearityDescriptor":
        return cls("custom", h_fn, h1_fn)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def separable(self) -> bool:
        return self._base is not None

    def apply(self, t: float, s: float, w: np.ndarray) -> np.ndarray:
        return np.asarray(self._h(t, s, w), dtype=float)

    def apply_dt(self, t: float, s: float, w: np.ndarray) -> np.ndarray:
        return np.asarray(self._h1(t, s, w), dtype=float)

    def base(self, s: float, w: np.ndarray) -> np.ndarray:
        return np.asarray(self._base(s, w), dtype=float)

    def time_factor(self, t: float) -> float:
        return float(self._time_factor(t))


class ForcingTerm:
    """Inhomogeneity f: [0,T] -> X with its analytic time derivative."""

    def __init__(self, n_modes: int, value_fn, derivative_fn):
        self.n_modes = n_modes
        self._value = value_fn
        self._derivative = derivative_fn

    @classmethod
    def zero(cls, n_modes: int) -> "ForcingTerm":
        z = np.zeros(n_modes)
        return cls(n_modes, lambda t: z, lambda t: z)

    @classmethod
    def from_profiles(cls, n_modes: int, profiles) -> "ForcingTerm":
        """profiles: iterable of (poly_coeffs, shape) pairs, f(t) =
        sum_k p_k(t) * shape_k with p_k a plain polynomial (low -> high)."""
        items = [(np.asarray(c, dtype=float), np.asarray(s, dtype=float)) for c, s in profiles]
        for _, shape in items:
            if shape.size != n_modes:
                raise ValueError("profile shape does not match n_modes")

        def value(t: float) -> np.ndarray:
            out = np.zeros(n_modes)
            for c, shape in items:
                out += np.polynomial.polynomial.polyval(t, c) * shape
            return out

        def derivative(t: float) -> np.ndarray:
            out = np.zeros(n_modes)
            for c, shape in items:
                dc = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
                out += np.polynomial.polynomial.polyval(t, dc) * shape
            return out

        return cls(n_modes, value, derivative)

    def value(self, t: float) -> np.ndarray:
        return np.asarray(self._value(t), dtype=float)

    def derivative(self, t: float) -> np.ndarray:
        return np.asarray(self._derivative(t), dtype=float)

    def table(self, grid: TimeGrid) -> np.ndarray:
        return np.array([self.value(t) for t in grid.nodes])


@dataclass
class ProblemSpec:
    """Full problem description for the mild-solution solver."""

    alpha: float
    operator: SpectralOperator
    x: SpectralField
    y: SpectralField
    f: ForcingTerm
    h: NonlinearityDescriptor
    beta: float = 0.5
    m_collocation: int | None = None

    def __post_init__(self) -> None:
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1,2], got {self.alpha}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0,1), got {self.beta}")
        n = self.operator.n_modes
        if self.x.n_modes != n or self.y.n_modes != n or self.f.n_modes != n:
            raise ValueError("x, y, f must all have the operator's mode count")
        if self.m_collocation is None:
            self.m_collocation = 2 * n
        if self.m_collocation < n:
            raise ValueError("m_collocation must be >= n_modes")


@dataclass
class SolveResult:
    """Trajectory plus convergence and residual diagnostics."""

    grid: TimeGrid
    beta: float
    trajectory: np.ndarray  # (n_steps+1, n_modes)
    iterations: int
    converged: bool
    fixed_point_residual: float
    volterra_residual: float
    fp_residual_per_node: np.ndarray
    volterra_residual_per_node: np.ndarray
    beta_excursion_per_node: np.ndarray = field(default=None)  # type: ignore[assignment]

    def field_at(self, t_index: int) -> SpectralField:
        return SpectralField(self.trajectory[t_index])


def _beta_weights(n_modes: int, beta: float) -> np.ndarray:
    return np.arange(1, n_modes + 1, dtype=float) ** (2.0 * beta)


def _beta_norm_per_node(values: np.ndarray, beta: float) -> np.ndarray:
    return np.linalg.norm(values * _beta_weights(values.shape[1], beta), axis=1)


class _MildWorkspace:
    """Grid-bound tables shared across Picard sweeps."""

    def __init__(self, spec: ProblemSpec, grid: TimeGrid):
        self.spec = spec
        self.grid = grid
        lams = spec.operator.eigenvalues
        nodes = grid.nodes
        self.cosine = np.column_stack(
            [family_symbol_table(spec.alpha, FamilyKind.COSINE, lam, nodes) for lam in lams]
        )
        self.sine = np.column_stack(
            [family_symbol_table(spec.alpha, FamilyKind.SINE, lam, nodes) for lam in lams]
        )
        self.rl_smooth = np.column_stack(
            [_smooth_symbol_table(spec.alpha, lam, nodes) for lam in lams]
        )
        self.f_table = spec.f.table(grid)
        m = spec.m_collocation
        n = spec.operator.n_modes
        x_pts = collocation_points(m)
        self.synth = math.sqrt(2.0 / math.pi) * np.sin(
            np.outer(np.arange(1, n + 1), x_pts)
        )  # (N, M)
        self.analyze = (np.pi / (m + 1)) * self.synth.T  # (M, N)
        self.phi = (
            self.cosine * spec.x.coeffs
            + self.sine * spec.y.coeffs
            + self.p_convolution(self.f_table)
        )

    def p_convolution(self, k_table: np.ndarray) -> np.ndarray:
        """int_0^t P_a(t-s) k(s) ds per mode: tau^(a-1) weight times the
        smooth symbol factor, by product integration."""
        return singular_convolution(self.spec.alpha, self.rl_smooth, k_table, self.grid)

    def nodal_trajectory(self, traj: np.ndarray) -> np.ndarray:
        return traj @ self.synth  # (n+1, M)

    def to_spectral(self, nodal: np.ndarray) -> np.ndarray:
        return nodal @ self.analyze

    def inner_memory_integral(self, traj: np.ndarray) -> np.ndarray:
        """G(s) = int_0^s h(s,r,u(r)) dr on the grid, nodal trapezoid,
        returned in spectral coefficients (n+1, N)."""
        spec = self.spec
        nodes = self.grid.nodes
        h_desc = spec.h
        if h_desc.is_zero:
            return np.zeros_like(traj)
        nodal = self.nodal_trajectory(traj)
        n = self.grid.n_steps
        hstep = self.grid.h
        if h_desc.separable:
            base = np.array([h_desc.base(nodes[j], nodal[j]) for j in range(n + 1)])
            cumulative = np.zeros_like(base)
            cumulative[1:] = np.cumsum(0.5 * hstep * (base[1:] + base[:-1]), axis=0)
            factors = np.array([h_desc.time_factor(t) for t in nodes])
            g_nodal = factors[:, None] * cumulative
        else:
            g_nodal = np.zeros_like(nodal)
            for i in range(1, n + 1):
                rows = np.array(
                    [h_desc.apply(nodes[i], nodes[j], nodal[j]) for j in range(i + 1)]
                )
                g_nodal[i] = np.trapezoid(rows, dx=hstep, axis=0)
        return self.to_spectral(g_nodal)

    def q_map(self, traj: np.ndarray) -> np.ndarray:
        if self.spec.h.is_zero:
            return self.phi
        return self.phi + self.p_convolution(self.inner_memory_integral(traj))


def linear_mild_solution(spec: ProblemSpec, grid: TimeGrid) -> SolveResult:
    """Lemma-3.5 linear solution phi(t) = C x + S y + P * f (requires h = 0)."""
    if not spec.h.is_zero:
        raise ValueError("linear_mild_solution requires a zero nonlinearity")
    ws = _MildWorkspace(spec, grid)
    return _finalize(spec, grid, ws, ws.phi, iterations=1, converged=True)


def picard_solve(
    spec: ProblemSpec,
    grid: TimeGrid,
    tol: float = 1e-8,
    max_iter: int = 200,
    damping: float = 1.0,
) -> SolveResult:
    """Damped Picard iteration on Q: u^0 = phi, u^(k+1) = (1-theta) u^k + theta Q u^k.

    Stops when the beta-norm of the update falls below tol; theta is halved
    whenever the update norm grows (floor 1/16).  Raises NonConvergenceError
    (carrying the partial result) at max_iter.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0,1]")
    ws = _MildWorkspace(spec, grid)
    u = ws.phi.copy()
    theta = damping
    prev_delta = math.inf
    for iteration in range(1, max_iter + 1):
        q = ws.q_map(u)
        if spec.h.is_zero:
            u_new = q
        else:
            u_new = (1.0 - theta) * u + theta * q
        delta = float(_beta_norm_per_node(u_new - u, spec.beta).max())
        if delta > prev_delta:
            theta = max(theta / 2.0, 1.0 / 16.0)
        prev_delta = delta
        u = u_new
        if delta <= tol:
            return _finalize(spec, grid, ws, u, iterations=iteration, converged=True)
    result = _finalize(spec, grid, ws, u, iterations=max_iter, converged=False)
    raise NonConvergenceError(max_iter, prev_delta, result)


def _finalize(
    spec: ProblemSpec,
    grid: TimeGrid,
    ws: _MildWorkspace,
    traj: np.ndarray,
    iterations: int,
    converged: bool,
) -> SolveResult:
    fp_per_node = _beta_norm_per_node(traj - ws.q_map(traj), spec.beta)
    vol_per_node = _volterra_defect(spec, traj, grid, ws)
    excursion = _beta_norm_per_node(traj - spec.x.coeffs[None, :], spec.beta)
    return SolveResult(
        grid=grid,
        beta=spec.beta,
        trajectory=traj,
        iterations=iterations,
        converged=converged,
        fixed_point_residual=float(fp_per_node.max()),
        volterra_residual=float(vol_per_node.max()),
        fp_residual_per_node=fp_per_node,
        volterra_residual_per_node=vol_per_node,
        beta_excursion_per_node=excursion,
    )


def _volterra_defect(
    spec: ProblemSpec, traj: np.ndarray, grid: TimeGrid, ws: _MildWorkspace | None = None
) -> np.ndarray:
    """Per-node defect of the integrated form u = x + t y + J^alpha(Au + G + f)."""
    if ws is None:
        ws = _MildWorkspace(spec, grid)
    rhs = (
        spec.operator.eigenvalues[None, :] * traj
        + ws.inner_memory_integral(traj)
        + ws.f_table
    )
    j_rhs = rl_integral(spec.alpha, GridFunction(grid, rhs)).values
    defect = (
        traj
        - spec.x.coeffs[None, :]
        - grid.nodes[:, None] * spec.y.coeffs[None, :]
        - j_rhs
    )
    return np.linalg.norm(defect, axis=1)


def volterra_form_residual(spec: ProblemSpec, trajectory: np.ndarray, grid: TimeGrid) -> float:
    """Max-norm defect of the integrated (Volterra) form of the equation;
    independent of the mild-solution kernel, so it cross-checks the solver."""
    traj = np.asarray(trajectory, dtype=float)
    if traj.shape != (grid.n_steps + 1, spec.operator.n_modes):
        raise ValueError(f"trajectory shape {traj.shape} does not match grid/operator")
    return float(_volterra_defect(spec, traj, grid).max())


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _MonomialAtom:
    power: float
    shape: np.ndarray

    def value(self, t: float) -> np.ndarray:
        return t ** self.power * self.shape if self.power else self.shape.copy()

    def derivative(self, t: float) -> np.ndarray:
        if self.power == 0.0:
            return np.zeros_like(self.shape)
        return self.power * t ** (self.power - 1.0) * self.shape

    def caputo(self, alpha: float, t: float) -> np.ndarray:
        if self.power in (0.0, 1.0):
            return np.zeros_like(self.shape)
        c = gamma_fn(self.power + 1.0) / gamma_fn(self.power + 1.0 - alpha)
        return c * t ** (self.power - alpha) * self.shape

    def caputo_derivative(self, alpha: float, t: float) -> np.ndarray:
        if self.power in (0.0, 1.0):
            return np.zeros_like(self.shape)
        c = gamma_fn(self.power + 1.0) / gamma_fn(self.power + 1.0 - alpha)
        e = self.power - alpha
        return c * e * t ** (e - 1.0) * self.shape


@dataclass(frozen=True)
class _SymbolAtom:
    kind: FamilyKind
    mode: int
    scale: float
    n_modes: int

    def _symbol(self, alpha: float, t: float) -> float:
        lam = -float(self.mode ** 2)
        return float(family_symbol_table(alpha, self.kind, lam, np.array([t]))[0])

    def value_with(self, alpha: float, t: float) -> np.ndarray:
        out = np.zeros(self.n_modes)
        out[self.mode - 1] = self.scale * self._symbol(alpha, t)
        return out

    def caputo_with(self, alpha: float, t: float) -> np.ndarray:
        # CD^a of the family symbol is lambda * symbol
        return -float(self.mode ** 2) * self.value_with(alpha, t)

    def derivative_at_zero(self) -> np.ndarray:
        out = np.zeros(self.n_modes)
        if self.kind == FamilyKind.SINE:
            out[self.mode - 1] = self.scale
        return out


class ManufacturedSolution:
    """Closed-form modal trajectory built from atoms with analytically known
    Caputo derivatives: monomials t^m (m = 0, 1 or m >= 2) and cosine/sine
    family symbols."""

    def __init__(self, n_modes: int):
        self.n_modes = n_modes
        self._monomials: list[_MonomialAtom] = []
        self._symbols: list[_SymbolAtom] = []

    def add_monomial(self, power: float, shape) -> "ManufacturedSolution":
        power = float(power)
        if power not in (0.0, 1.0) and power < 2.0:
            raise ValueError(
                "monomial powers must be 0, 1 or >= 2 for an analytic Caputo derivative"
            )
        shape = np.asarray(shape, dtype=float)
        if shape.size != self.n_modes:
            raise ValueError("shape does not match n_modes")
        self._monomials.append(_MonomialAtom(power, shape))
        return self

    def add_family_symbol(
        self, kind: FamilyKind, mode: int, scale: float = 1.0
    ) -> "ManufacturedSolution":
        if kind not in (FamilyKind.COSINE, FamilyKind.SINE):
            raise ValueError("only cosine/sine symbol atoms are supported")
        if not 1 <= mode <= self.n_modes:
            raise ValueError(f"mode {mode} outside 1..{self.n_modes}")
        self._symbols.append(_SymbolAtom(kind, mode, scale, self.n_modes))
        return self

    def value(self, alpha: float, t: float) -> np.ndarray:
        out = np.zeros(self.n_modes)
        for atom in self._monomials:
            out += atom.value(t)
        for atom in self._symbols:
            out += atom.value_with(alpha, t)
        return out

    def caputo(self, alpha: float, t: float) -> np.ndarray:
        out = np.zeros(self.n_modes)
        for atom in self._monomials:
            out += atom.caputo(alpha, t)
        for atom in self._symbols:
            out += atom.caputo_with(alpha, t)
        return out

    def initial_data(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros(self.n_modes)
        y = np.zeros(self.n_modes)
        for atom in self._monomials:
            if atom.power == 0.0:
                x += atom.shape
            elif atom.power == 1.0:
                y += atom.shape
        for atom in self._symbols:
            if atom.kind == FamilyKind.COSINE:
                x[atom.mode - 1] += atom.scale
            y += atom.derivative_at_zero()
        return x, y

    def table(self, alpha: float, grid: TimeGrid) -> np.ndarray:
        return np.array([self.value(alpha, t) for t in grid.nodes])


def make_manufactured(
    alpha: float,
    operator: SpectralOperator,
    u_star: ManufacturedSolution,
    h: NonlinearityDescriptor,
    m_collocation: int | None = None,
    beta: float = 0.5,
    quad_panels: int = 6,
) -> ProblemSpec:
    """Build the ProblemSpec whose exact solution is u_star:
    f := CD^alpha u* - A u* - int_0^t h(t,s,u*(s)) ds, the memory integral by
    Gauss-Legendre panels on the closed-form u*."""
    if u_star.n_modes != operator.n_modes:
        raise ValueError("u_star mode count does not match the operator")
    m = m_collocation or 2 * operator.n_modes
    n = operator.n_modes
    synth = math.sqrt(2.0 / math.pi) * np.sin(
        np.outer(np.arange(1, n + 1), collocation_points(m))
    )
    analyze = (np.pi / (m + 1)) * synth.T
    lams = operator.eigenvalues

    def memory_term(t: float) -> np.ndarray:
        if h.is_zero or t == 0.0:
            return np.zeros(n)
        edges = np.linspace(0.0, t, quad_panels + 1)
        total = np.zeros(m)
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            for xg, wg in zip(_GL_X, _GL_W):
                s = mid + half * xg
                w_nodal = u_star.value(alpha, s) @ synth
                total += half * wg * h.apply(t, s, w_nodal)
        return total @ analyze

    def memory_term_dt(t: float) -> np.ndarray:
        if h.is_zero:
            return np.zeros(n)
        w_nodal = u_star.value(alpha, t) @ synth
        boundary = h.apply(t, t, w_nodal) @ analyze
        if t == 0.0:
            return boundary
        edges = np.linspace(0.0, t, quad_panels + 1)
        total = np.zeros(m)
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            for xg, wg in zip(_GL_X, _GL_W):
                s = mid + half * xg
                ws_nodal = u_star.value(alpha, s) @ synth
                total += half * wg * h.apply_dt(t, s, ws_nodal)
        return boundary + total @ analyze

    def f_value(t: float) -> np.ndarray:
        return u_star.caputo(alpha, t) - lams * u_star.value(alpha, t) - memory_term(t)

    def f_derivative(t: float) -> np.ndarray:
        # symbol atoms drop out of f entirely (CD^a atom = A atom = lam*atom),
        # so only the monomials and the memory boundary/Leibniz terms remain
        out = np.zeros(n)
        for atom in u_star._monomials:
            if atom.power in (0.0, 1.0):
                out -= lams * atom.derivative(t)
                continue
            if t == 0.0 and atom.power < alpha + 1.0:
                raise ValueError(
                    "manufactured f' is singular at t=0 for monomial power "
                    f"{atom.power} with alpha={alpha}"
                )
            out += atom.caputo_derivative(alpha, t) - lams * atom.derivative(t)
        return out - memory_term_dt(t)

    x0, y0 = u_star.initial_data()
    forcing = ForcingTerm(n, f_value, f_derivative)
    return ProblemSpec(
        alpha=alpha,
        operator=operator,
        x=SpectralField(x0),
        y=SpectralField(y0),
        f=forcing,
        h=h,
        beta=beta,
        m_collocation=m,
    )
