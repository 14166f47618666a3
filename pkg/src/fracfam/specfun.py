"""Scalar special functions: Gamma, the power kernel g_a, the two-parameter
Mittag-Leffler function, the Wright function phi_gamma and the subordination
density t^-g * phi_g(s t^-g).

Everything here is real-valued.  The precision-critical region is the negative
real axis (spectral symbols take lambda*t^alpha <= 0); positive arguments are
supported up to an overflow cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PoleError",
    "MLParams",
    "WrightParams",
    "gamma_fn",
    "recip_gamma",
    "g_kernel",
    "mittag_leffler",
    "mittag_leffler_neg",
    "wright_phi",
    "subordination_density",
    "wright_tail_cutoff",
]


class PoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


# Lanczos approximation, g = 7, 9 coefficients.  Good to ~1e-14 relative for
# x >= 0.5; reflection extends to the rest of the real line.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma_fn(x: float) -> float:
    """Euler Gamma via Lanczos + reflection; exact at positive integers.

    Raises PoleError at non-positive integers.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma pole at non-positive integer x={x}")
    if x == math.floor(x) and x <= 171.0:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def recip_gamma(x: float) -> float:
    """1/Gamma(x), defined as exactly 0 at the poles x = 0, -1, -2, ..."""
    if _is_nonpositive_integer(x):
        return 0.0
    if x >= 0.5:
        return 1.0 / gamma_fn(x)
    # 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi, zero exactly when sin does vanish
    s = math.sin(math.pi * x)
    if s == 0.0:
        return 0.0
    return gamma_fn(1.0 - x) * s / math.pi


def g_kernel(alpha: float, t: float) -> float:
    """Power kernel g_a(t) = t^(a-1)/Gamma(a) for a > 0.

    t = 0 is allowed only for a >= 1 (g_1 = 1, g_a(0) = 0 for a > 1); the
    delta-distribution case a = 0 is rejected.
    """
    if alpha <= 0.0:
        raise ValueError(f"g_kernel requires alpha > 0, got {alpha}")
    if t < 0.0:
        raise ValueError(f"g_kernel requires t >= 0, got {t}")
    if t == 0.0:
        if alpha < 1.0:
            raise ValueError("g_kernel is singular at t=0 for alpha < 1")
        return 1.0 if alpha == 1.0 else 0.0
    return t ** (alpha - 1.0) / gamma_fn(alpha)


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, beta) of E_{alpha,beta}; alpha in (0,2], beta > 0."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"MLParams.alpha must lie in (0,2], got {self.alpha}")
        if self.beta <= 0.0:
            raise ValueError(f"MLParams.beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class WrightParams:
    """Wright index gamma in (0,1)."""

    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"WrightParams.gamma must lie in (0,1), got {self.gamma}")


# ---------------------------------------------------------------------------
# Mittag-Leffler
#
# E_{a,b}(z) = sum_k z^k / Gamma(ak + b).
#
# |z| <= _TAYLOR_CUT: compensated Taylor summation (no harmful cancellation).
#
# z < -_TAYLOR_CUT: Laplace-inversion contour.  For a >= _RAY_ALPHA_SWITCH the
# Hankel contour is collapsed onto the negative axis: the conjugate pole pair
# w = x^(1/a) e^(+-i pi/a) contributes (2/a) Re[w^(1-b) e^w] and the branch cut
# a smooth integral.  For a < _RAY_ALPHA_SWITCH the poles approach the cut, so
# the contour is bent to rays at angle theta in (pi/2, pi/a), which excludes
# the poles entirely.  In both cases the leading r -> 0 part of the integrand
# is subtracted analytically; its integral is 1/(x*Gamma(b-a)), the first term
# of the algebraic asymptotic expansion.
# ---------------------------------------------------------------------------

_TAYLOR_CUT = 5.0
_RAY_ALPHA_SWITCH = 1.4
_CUT_RADIUS = 50.0
_SERIES_MAX_TERMS = 2000


def _tanh_sinh_nodes(step: float = 1.0 / 80.0, span: float = 4.2):
    k = np.arange(-int(span / step), int(span / step) + 1)
    u = k * step
    x = np.tanh(0.5 * np.pi * np.sinh(u))
    w = step * 0.5 * np.pi * np.cosh(u) / np.cosh(0.5 * np.pi * np.sinh(u)) ** 2
    keep = 1.0 - np.abs(x) > 1e-17
    return x[keep], w[keep]


_TS_X, _TS_W = _tanh_sinh_nodes()


def _ml_series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """Compensated Taylor sum, vectorized over z; |z| small enough that the
    peak term stays near unit scale."""
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    comp = np.zeros_like(z)
    small = np.zeros(z.shape, dtype=int)
    with np.errstate(divide="ignore"):
        lz = np.where(z != 0.0, np.log(np.abs(z)), -np.inf)
    odd_negative = z < 0.0
    for k in range(_SERIES_MAX_TERMS):
        if k == 0:
            term = np.full_like(z, 1.0 / gamma_fn(beta))
        else:
            mag = np.exp(k * lz - math.lgamma(alpha * k + beta))
            term = np.where(odd_negative & (k % 2 == 1), -mag, mag)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        done = np.abs(term) < 1e-17 * np.maximum(np.abs(total), 1e-300)
        small = np.where(done, small + 1, 0)
        if k > 3 and np.all(small >= 3):
            break
    return total


def _ml_contour_cut(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Residue pair + branch-cut integral; alpha in [_RAY_ALPHA_SWITCH, 2]."""
    x = np.asarray(x, dtype=float)
    w = x ** (1.0 / alpha) * np.exp(1j * np.pi / alpha)
    residues = (2.0 / alpha) * np.real(w ** (1.0 - beta) * np.exp(w))
    r = (0.5 * _CUT_RADIUS) * (_TS_X + 1.0)
    wq = (0.5 * _CUT_RADIUS) * _TS_W
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (alpha + 1.0 - beta))
    c = math.cos(math.pi * alpha)
    ra = r ** alpha
    # integrand minus its r->0 limit s2/x (removed algebraically):
    # cut = (1/pi) sum_j E_j (A_j x - B_j) / (x den_j(x)) with per-node
    # envelope E, A = ra (s1 - 2 c s2), B = s2 ra^2
    env = wq * np.exp(-r) * r ** (alpha - beta) / np.pi
    a_node = env * ra * (s1 - 2.0 * c * s2)
    b_node = env * s2 * ra * ra
    ra2 = ra * ra
    two_c_ra = 2.0 * c * ra
    xc = x[:, None]
    den = ra2 + two_c_ra * xc + xc * xc
    cut = np.sum((a_node * xc - b_node) / (xc * den), axis=1)
    return residues + cut + recip_gamma(beta - alpha) / x


def _ml_contour_rays(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Angled-ray contour excluding the poles; alpha < _RAY_ALPHA_SWITCH."""
    x = np.asarray(x, dtype=float)
    theta = 0.5 * (0.5 * np.pi + min(np.pi, np.pi / alpha))
    rcut = 60.0 / (-math.cos(theta))
    r = (0.5 * rcut) * (_TS_X + 1.0)
    wq = (0.5 * rcut) * _TS_W
    zeta = r * np.exp(1j * theta)
    za = zeta ** alpha
    # vals_i = Im sum_j g_j / (x_i (za_j + x_i)) in real arithmetic
    g = -(wq / np.pi) * np.exp(zeta) * zeta ** (2.0 * alpha - beta) * np.exp(1j * theta)
    a_node, b_node = np.real(za), np.imag(za)
    gr_b = np.real(g) * b_node
    gi = np.imag(g)
    b_sq = b_node * b_node
    xc = x[:, None]
    shifted = a_node + xc
    vals = np.sum((gi * shifted - gr_b) / ((shifted * shifted + b_sq) * xc), axis=1)
    return vals + recip_gamma(beta - alpha) / x


def _positive_cap(alpha: float) -> float:
    # exp(z^(1/alpha)) must stay below double overflow
    return 670.0 ** alpha


def mittag_leffler_neg(alpha: float, beta: float, x) -> np.ndarray:
    """E_{alpha,beta}(-x) for an array of x >= 0 (vectorized table builder)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0):
        raise ValueError("mittag_leffler_neg expects x >= 0")
    out = np.empty_like(x)
    small = x <= _TAYLOR_CUT
    if np.any(small):
        out[small] = _ml_series(alpha, beta, -x[small])
    big = ~small
    if np.any(big):
        xb = x[big]
        vals = np.empty_like(xb)
        # chunk to keep the (n, quad-nodes) temporaries cache-sized
        for lo in range(0, xb.size, 1024):
            chunk = xb[lo : lo + 1024]
            if alpha >= _RAY_ALPHA_SWITCH:
                vals[lo : lo + 1024] = _ml_contour_cut(alpha, beta, chunk)
            else:
                vals[lo : lo + 1024] = _ml_contour_rays(alpha, beta, chunk)
        out[big] = vals
    return out


def mittag_leffler(params: MLParams, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z), real z.

    Relative accuracy ~1e-10 or better on z in [-1e4, _TAYLOR_CUT]; positive z
    beyond an overflow cap raises OverflowError.
    """
    a, b = params.alpha, params.beta
    z = float(z)
    if z > 0.0:
        if z > _positive_cap(a):
            raise OverflowError(
                f"mittag_leffler: z={z} exceeds the positive cap {_positive_cap(a):.3g}"
            )
        return float(_ml_series(a, b, np.array([z]))[0])
    return float(mittag_leffler_neg(a, b, np.array([-z]))[0])


# ---------------------------------------------------------------------------
# Wright function
#
# phi_g(z) = sum_n (-z)^n / (n! Gamma(-g n + 1 - g)),  0 < g < 1,  z >= 0.
#
# The series alternates with a peak term ~exp(B z^(1/(1-g))) while the value
# decays like exp(-B z^(1/(1-g))); float64 is used while the predicted digit
# loss stays small, otherwise the same series is summed by mpmath at a dps
# sized from the lgamma term scan.  1/Gamma at a pole contributes exactly 0.
# ---------------------------------------------------------------------------

_WRIGHT_FLOAT_DIGITS = 5.0
_WRIGHT_STOP = 1e-16


def _wright_decay_rate(gamma: float) -> float:
    """B in phi_g(z) ~ exp(-B z^(1/(1-g)))."""
    return (1.0 - gamma) * gamma ** (gamma / (1.0 - gamma))


def wright_tail_cutoff(gamma: float, tol: float) -> float:
    """z beyond which the stretched-exponential envelope falls below tol."""
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0,1)")
    b = _wright_decay_rate(gamma)
    return (math.log(1.0 / tol) / b) ** (1.0 - gamma)


def _wright_log_term(gamma: float, z: float, n: int) -> tuple[float, float]:
    """(log|term_n|, sign) of the phi_g series at z > 0; sign 0 at Gamma poles."""
    w = 1.0 - gamma * (n + 1)
    if _is_nonpositive_integer(w):
        return -math.inf, 0.0
    if w >= 0.5:
        lg = -math.lgamma(w)
        sgn = 1.0
    else:
        s = math.sin(math.pi * w)
        if s == 0.0:
            return -math.inf, 0.0
        lg = math.lgamma(1.0 - w) + math.log(abs(s)) - math.log(math.pi)
        sgn = 1.0 if s > 0.0 else -1.0
    if n % 2 == 1:
        sgn = -sgn
    return n * math.log(z) - math.lgamma(n + 1.0) + lg, sgn


def _wright_term_peak(gamma: float, z: float) -> float:
    if z <= 1.0:
        return 0.0
    peak = 0.0
    n = 0
    while True:
        lt, sgn = _wright_log_term(gamma, z, n)
        if sgn != 0.0:
            peak = max(peak, lt)
            if n > 8 and lt < peak - 60.0:
                break
        n += 1
        if n > 200000:
            break
    return peak


def _wright_float64(gamma: float, z: float) -> float:
    if z == 0.0:
        return recip_gamma(1.0 - gamma)
    total = 0.0
    comp = 0.0
    small = 0
    n = 0
    while True:
        lt, sgn = _wright_log_term(gamma, z, n)
        term = sgn * math.exp(lt) if sgn != 0.0 else 0.0
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < _WRIGHT_STOP * max(abs(total), 1e-300):
            small += 1
            if small >= 3 and n > 3:
                return total
        else:
            small = 0
        n += 1
        if n > 200000:
            raise RuntimeError("wright series did not converge")


def _wright_mp(gamma: float, z: float, digits: int) -> float:
    import mpmath as mp

    with mp.workdps(digits):
        gm, zm = mp.mpf(gamma), mp.mpf(z)
        total = mp.mpf(0)
        peak = mp.mpf(0)
        floor = mp.mpf(10) ** (-digits)
        small = 0
        n = 0
        while True:
            w = 1 - gm * (n + 1)
            if mp.isint(w) and w <= 0:
                term = mp.mpf(0)
            else:
                term = (-zm) ** n / (mp.factorial(n) * mp.gamma(w))
            total += term
            peak = max(peak, abs(term))
            if n > 3 and abs(term) < floor * max(peak, floor):
                small += 1
                if small >= 3:
                    return float(total)
            else:
                small = 0
            n += 1
            if n > 500000:
                raise RuntimeError("wright series did not converge")


@lru_cache(maxsize=1 << 18)
def _wright_phi_cached(g: float, z: float) -> float:
    if z <= 1.0:
        return _wright_float64(g, z)
    peak = _wright_term_peak(g, z)
    value_log = 1.15 * (-_wright_decay_rate(g) * z ** (1.0 / (1.0 - g))) - 5.0
    digits_lost = (peak - min(0.0, value_log)) / math.log(10.0)
    if digits_lost <= _WRIGHT_FLOAT_DIGITS:
        return _wright_float64(g, z)
    return _wright_mp(g, z, max(25, int(digits_lost) + 20))


def wright_phi(params: WrightParams, z: float) -> float:
    """Wright function phi_gamma(z) for z >= 0."""
    z = float(z)
    if z < 0.0:
        raise ValueError(f"wright_phi requires z >= 0, got {z}")
    return _wright_phi_cached(params.gamma, z)


def subordination_density(gamma: float, t: float, s: float) -> float:
    """Density t^-gamma * phi_gamma(s t^-gamma) of the cosine-family
    subordination at time t > 0; nonnegative, unit mass in s."""
    params = WrightParams(gamma)
    if t <= 0.0:
        raise ValueError(f"subordination_density requires t > 0, got {t}")
    if s < 0.0:
        raise ValueError(f"subordination_density requires s >= 0, got {s}")
    scale = t ** (-gamma)
    return scale * wright_phi(params, s * scale)
