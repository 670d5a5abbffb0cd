"""Smooth cutoff functions and their space-time scaling.

The cutoff class consists of smooth monotone steps f with f = 0 left of
epsilon/2, f = 1 right of epsilon, f' supported strictly inside
(epsilon/2, epsilon), and sqrt(f') smooth.  The canonical member is built
from the bump g(u) = exp(-1/((u - eps/2)(eps - u))): its normalized
integral is the step, and sqrt of the normalized bump is again a smooth
compactly supported function.

For small epsilon the bump underflows (its peak is exp(-16/eps^2)), so
all evaluations are done on the rescaled bump exp(16/eps^2) * g, whose
peak is exactly 1; the scale factor cancels in every normalized
quantity.  Integrals use a fixed composite Gauss-Legendre rule, and the
normalization is the same rule over the full support, which makes
f(eps) = 1 exact rather than accurate-to-quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError
from .lattice import Site, TorusLattice, torus_distance
from .report import CheckReport

_PANELS = 16
_NODES_PER_PANEL = 64
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_NODES_PER_PANEL)


class CutoffFunction:
    """The canonical smooth step of the cutoff class at a given epsilon."""

    def __init__(self, epsilon: float):
        if epsilon <= 0:
            raise ParameterError(f"epsilon must be positive, got {epsilon}")
        self.epsilon = float(epsilon)
        self._a = self.epsilon / 2.0
        self._b = self.epsilon
        self._scale = 16.0 / self.epsilon**2
        self._norm = float(self._integral(np.array([self._b]))[0])

    def _bump(self, u: np.ndarray) -> np.ndarray:
        """exp(scale) * g(u); peak value 1 at the midpoint of the support."""
        out = np.zeros_like(u, dtype=np.float64)
        inside = (u > self._a) & (u < self._b)
        ui = u[inside]
        out[inside] = np.exp(self._scale - 1.0 / ((ui - self._a) * (self._b - ui)))
        return out

    def _integral(self, hi: np.ndarray) -> np.ndarray:
        """Composite Gauss-Legendre integral of the rescaled bump on (a, hi)."""
        hi = np.asarray(hi, dtype=np.float64)
        width = (hi - self._a) / _PANELS
        total = np.zeros_like(hi)
        for p in range(_PANELS):
            lo = self._a + p * width
            half = 0.5 * width
            mid = lo + half
            pts = mid[..., None] + half[..., None] * _GL_NODES
            total += half * (self._bump(pts) @ _GL_WEIGHTS)
        return total

    def f(self, u):
        """The step itself, in [0, 1]."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = np.zeros_like(u_arr)
        out[u_arr >= self._b] = 1.0
        mid = (u_arr > self._a) & (u_arr < self._b)
        if mid.any():
            out[mid] = self._integral(u_arr[mid]) / self._norm
        return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out

    def fprime(self, u):
        """f', the normalized bump."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = self._bump(u_arr) / self._norm
        return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out

    def sqrt_fprime(self, u):
        """sqrt(f'), smooth and compactly supported by construction."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = np.zeros_like(u_arr)
        inside = (u_arr > self._a) & (u_arr < self._b)
        ui = u_arr[inside]
        out[inside] = np.exp(
            0.5 * (self._scale - 1.0 / ((ui - self._a) * (self._b - ui)))
        ) / np.sqrt(self._norm)
        return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out


def make_standard_cutoff(epsilon: float) -> CutoffFunction:
    return CutoffFunction(epsilon)


@dataclass(frozen=True)
class VelocityParams:
    """Velocity and scale parameters derived from (v, kappa, R, r)."""

    v: float
    kappa: float
    v_tilde: float
    epsilon: float
    R: float
    r: float
    s: float


def velocity_params(v: float, kappa: float, R: float, r: float) -> VelocityParams:
    """Derive (v_tilde, epsilon, s) and certify the regime preconditions."""
    if kappa < 0:
        raise ParameterError(f"kappa must be >= 0, got {kappa}")
    if v <= 2 * kappa:
        raise RegimeError(f"v > 2*kappa required: v={v}, 2*kappa={2 * kappa}")
    if r < 0:
        raise RegimeError(f"r >= 0 required: r={r}")
    if R <= r:
        raise RegimeError(f"R > r required: R={R}, r={r}")
    if R - r <= max(v, 1.0):
        raise RegimeError(
            f"R - r > max(v, 1) required: R-r={R - r}, max(v,1)={max(v, 1.0)}"
        )
    v_tilde = 0.5 * (kappa + v)
    return VelocityParams(
        v=float(v),
        kappa=float(kappa),
        v_tilde=v_tilde,
        epsilon=v - v_tilde,
        R=float(R),
        r=float(r),
        s=(R - r) / v,
    )


@dataclass(frozen=True)
class ScaledCutoff:
    """A cutoff composed with the moving space-time argument (R - v_tilde t - |x|)/s."""

    base: CutoffFunction
    params: VelocityParams
    lat: TorusLattice | None = None

    def argument(self, t: float, absx) -> np.ndarray:
        p = self.params
        return (p.R - p.v_tilde * t - np.asarray(absx, dtype=np.float64)) / p.s


def _resolve_absx(sc: ScaledCutoff, x) -> float:
    if isinstance(x, tuple):
        if sc.lat is None:
            raise ParameterError("scaled cutoff has no lattice to resolve a site")
        return torus_distance(x, sc.lat.origin, sc.lat)
    return float(x)


def eval_scaled(sc: ScaledCutoff, t: float, x) -> float:
    """chi_ts(x); ``x`` may be a site or a radius."""
    if t < 0:
        raise ParameterError(f"time must be >= 0, got {t}")
    return float(sc.base.f(sc.argument(t, _resolve_absx(sc, x))))


def eval_scaled_prime(sc: ScaledCutoff, t: float, x) -> float:
    """(chi')_ts(x)."""
    if t < 0:
        raise ParameterError(f"time must be >= 0, got {t}")
    return float(sc.base.fprime(sc.argument(t, _resolve_absx(sc, x))))


def scaled_weights(sc: ScaledCutoff, t: float, kind: str = "chi") -> np.ndarray:
    """Scaled-cutoff values on every lattice site, by linear site index."""
    if sc.lat is None:
        raise ParameterError("scaled cutoff has no lattice attached")
    if t < 0:
        raise ParameterError(f"time must be >= 0, got {t}")
    args = sc.argument(t, sc.lat.distances_from_origin)
    if kind == "chi":
        return np.asarray(sc.base.f(args))
    if kind == "chi_prime":
        return np.asarray(sc.base.fprime(args))
    if kind == "sqrt_prime":
        return np.asarray(sc.base.sqrt_fprime(args))
    raise ParameterError(f"unknown weight kind {kind!r}")


def _fd_max(fn, lo: float, hi: float, n: int, order: int) -> float:
    """Max absolute forward-difference quotient of the given order on a uniform grid."""
    u = np.linspace(lo, hi, n)
    h = u[1] - u[0]
    vals = np.asarray(fn(u))
    d = vals
    for _ in range(order):
        d = np.diff(d)
    return float(np.max(np.abs(d)) / h**order)


def verify_class_membership(f, grid_n: int = 10_000) -> CheckReport:
    """Certify the cutoff-class clauses on a uniform grid over [0, 2*epsilon].

    Clause list: nonnegativity, values in [0, 1], the two plateaus, a
    nonnegative derivative supported inside (eps/2, eps), monotonicity,
    the indicator sandwich 1_{u>=eps} <= f <= 1_{u>=eps/2}, and a
    smoothness proxy: difference quotients of sqrt(f') up to order 4 must
    stay bounded under grid refinement (ratio at most 2^(k-1) * 1.5 for
    order k; a jump discontinuity scales like 2^k and fails).
    """
    if grid_n < 100:
        raise ParameterError(f"grid_n must be >= 100, got {grid_n}")
    eps = f.epsilon
    u = np.linspace(0.0, 2.0 * eps, grid_n)
    vals = np.asarray(f.f(u))
    deriv = np.asarray(f.fprime(u))

    left = u <= eps / 2.0
    right = u >= eps
    outside = left | right
    margins = {
        "f_nonneg": float(vals.min()),
        "f_below_one": float(1.0 - vals.max()),
        "zero_plateau": float(-np.abs(vals[left]).max()),
        "one_plateau": float(vals[right].min() - 1.0),
        "fprime_nonneg": float(deriv.min()),
        "fprime_support": float(-np.abs(deriv[outside]).max()),
        "monotone": float(np.diff(vals).min()),
        "sandwich_lower": float((vals - (u >= eps)).min()),
        "sandwich_upper": float(((u >= eps / 2.0) - vals).min()),
    }
    smooth_ok = True
    ratios = {}
    for order in range(1, 5):
        coarse = _fd_max(f.sqrt_fprime, 0.0, 2.0 * eps, grid_n, order)
        fine = _fd_max(f.sqrt_fprime, 0.0, 2.0 * eps, 2 * grid_n, order)
        ratio = fine / coarse if coarse > 0 else 1.0
        ratios[f"fd{order}_refinement_ratio"] = ratio
        if ratio > 1.5 * 2 ** (order - 1):
            smooth_ok = False
    worst = min(margins.values())
    passed = worst >= -1e-12 and smooth_ok
    return CheckReport(
        name="cutoff_class_membership",
        passed=passed,
        hard=True,
        margin=worst,
        params={"epsilon": eps, "grid_n": grid_n},
        diagnostics={**margins, **ratios, "smooth_ok": smooth_ok},
        rows=[{"t": "", "lhs": k, "rhs": "", "margin": v} for k, v in margins.items()],
    )


def combine_cutoffs(f1, f2, grid_n: int = 2001):
    """A class member dominating f1 + f2, with the sampled constant.

    Returns (f3, C) with f3 the canonical cutoff at the shared epsilon and
    C the maximal grid value of (f1 + f2)/f3 on the support (0/0 read as
    0), so that f1 + f2 <= C * f3 holds at every grid point.
    """
    if abs(f1.epsilon - f2.epsilon) > 1e-12:
        raise ParameterError(
            f"cutoffs live on different scales: {f1.epsilon} vs {f2.epsilon}"
        )
    f3 = make_standard_cutoff(f1.epsilon)
    u = np.linspace(0.0, 2.0 * f1.epsilon, grid_n)
    num = np.asarray(f1.f(u)) + np.asarray(f2.f(u))
    den = np.asarray(f3.f(u))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    return f3, float(ratio.max())
