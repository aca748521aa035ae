"""Scalar Mittag-Leffler, generalized Mittag-Leffler and M-Wright functions.

Every series is summed with reciprocal-gamma weights, so terms sitting on a
pole of the gamma function vanish instead of producing ``nan``.  Plain Taylor
summation is cancellative for large negative arguments; in that regime the
functions switch to non-oscillatory integral representations (real negative
axis only) or refuse with :class:`NonConvergent`.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import BetaOutOfRange, NonConvergent, QuadratureFailure, RangeWarning

_EPS = np.finfo(float).eps
# accepted rounding estimate for a Taylor sum, relative to max(1, |sum|)
_ROUNDOFF_LIMIT = 1e-11
# cancellation ratio sum|t_n| / |sum| above which the negative axis uses the integral form
_CANCEL_RATIO = 64.0
_MW_ROUNDOFF = 1e-15
_MW_NODES = 512
_MW_MAX_X = 10.0
_MW_MAX_BETA = 0.9


@dataclass(frozen=True)
class MLParams:
    """Order ``beta`` of the Mittag-Leffler family plus numerical tolerances."""

    beta: float
    series_tol: float = 1e-14
    max_terms: int = 512
    quad_points: int = 2000

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")
        if self.quad_points < 20:
            raise ValueError("quad_points must be at least 20")


def gamma_reciprocal(z):
    """1/Gamma(z); exactly zero at the poles 0, -1, -2, ..."""
    return special.rgamma(z)


def _taylor(params: MLParams, z: complex, gamma: float):
    """Sum z^n / Gamma(beta n + gamma); returns (sum, sum of |terms|).

    Powers and the running sum are carried in extended precision where the
    platform has it, leaving the float64 coefficients as the main error source.
    """
    beta = params.beta
    zz = np.clongdouble(z)
    total = np.clongdouble(0)
    power = np.clongdouble(1)
    abs_total = 0.0
    small = 0
    for n in range(params.max_terms):
        term = power * np.longdouble(special.rgamma(beta * n + gamma))
        total += term
        size = float(abs(term))
        abs_total += size
        if size < params.series_tol:
            small += 1
            if small >= 3:
                return complex(total), abs_total
        else:
            small = 0
        power *= zz
        if not math.isfinite(float(abs(power))) or abs(power) > 1e300:
            break
    raise NonConvergent(
        f"series for E_{{{beta},{gamma}}}({z}) did not reach {params.series_tol} "
        f"within {params.max_terms} terms"
    )


def _ml_negative_axis(beta: float, x: float) -> float:
    """E_beta(-x) for 0 < beta < 1, x >= 0, via its completely monotone spectral form."""
    if x == 0.0:
        return 1.0
    c = math.cos(beta * math.pi)
    p = 1.0 / beta

    def f(u):
        return math.exp(-((x * u) ** p)) / (u * u + 2.0 * u * c + 1.0)

    opts = dict(epsabs=1e-16, epsrel=1e-13, limit=400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        a, _ = integrate.quad(f, 0.0, 1.0, **opts)
        b, _ = integrate.quad(f, 1.0, np.inf, **opts)
    return math.sin(beta * math.pi) / (beta * math.pi) * (a + b)


def _as_output(z, value: complex):
    if isinstance(z, (complex, np.complexfloating)):
        return complex(value)
    return float(value.real)


def _ml_value(params: MLParams, z: complex) -> complex:
    beta = params.beta
    if z == 0:
        return 1 + 0j
    on_negative_axis = z.imag == 0.0 and z.real < 0.0
    try:
        total, abs_total = _taylor(params, z, 1.0)
    except NonConvergent:
        if on_negative_axis and beta < 1.0:
            return complex(_ml_negative_axis(beta, -z.real))
        raise
    if on_negative_axis and abs_total > _CANCEL_RATIO * abs(total):
        if beta < 1.0:
            return complex(_ml_negative_axis(beta, -z.real))
        # E_1(-x) = 1 / E_1(x); the positive-axis series has no cancellation
        pos, _ = _taylor(params, complex(-z.real), 1.0)
        return 1.0 / pos
    if _EPS * abs_total > _ROUNDOFF_LIMIT * max(1.0, abs(total)):
        raise NonConvergent(
            f"E_{beta}({z}) outside the validated range: cancellation "
            f"{abs_total:.3g} vs result {abs(total):.3g}"
        )
    return total


def mittag_leffler(params: MLParams, z):
    """E_beta(z) = sum z^n / Gamma(beta n + 1).

    Real input gives a float, complex input a complex number.
    """
    return _as_output(z, _ml_value(params, complex(z)))


def mittag_leffler_general(params: MLParams, gamma: float, z):
    """E_{beta,gamma}(z) = sum z^n / Gamma(beta n + gamma), by Taylor summation only."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    zc = complex(z)
    if gamma == 1.0:
        return _as_output(z, _ml_value(params, zc))
    if zc == 0:
        return _as_output(z, complex(special.rgamma(gamma)))
    total, abs_total = _taylor(params, zc, gamma)
    if _EPS * abs_total > _ROUNDOFF_LIMIT * max(1.0, abs(total)):
        raise NonConvergent(
            f"E_{{{params.beta},{gamma}}}({zc}) outside the validated range"
        )
    return _as_output(z, total)


def ml_derivative(params: MLParams, z):
    """d/dz E_beta(z) = E_{beta,beta}(z) / beta."""
    return mittag_leffler_general(params, params.beta, z) / params.beta


def _mw_series(beta: float, x: np.ndarray, max_terms: int, tol: float):
    total = np.zeros_like(x)
    abs_total = np.zeros_like(x)
    power = np.ones_like(x)
    small = np.zeros(x.shape, dtype=int)
    done = np.zeros(x.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(max_terms):
            term = power * special.rgamma(-beta * n + 1.0 - beta)
            term = np.where(done, 0.0, term)
            total += term
            abs_total += np.abs(term)
            small = np.where(np.abs(term) < tol, small + 1, 0)
            done |= small >= 3
            if done.all():
                break
            power = power * (-x) / (n + 1)
    ok = done & np.isfinite(total) & (_EPS * abs_total <= _MW_ROUNDOFF)
    return total, ok


def _mw_integral(beta: float, x: np.ndarray) -> np.ndarray:
    """M_beta(x) from the positive integral over (0, pi) of the Zolotarev kernel."""
    nodes, weights = _legendre(_MW_NODES)
    phi = 0.5 * math.pi * (nodes + 1.0)
    w = 0.5 * math.pi * weights
    a = 1.0 / (1.0 - beta)
    log_k = (beta * a) * np.log(np.sin(beta * phi)) + np.log(np.sin((1.0 - beta) * phi)) \
        - a * np.log(np.sin(phi))
    kern = np.exp(log_k)
    out = np.zeros_like(x)
    pos = x > 0
    xs = x[pos]
    c = xs[:, None] ** a
    log_terms = np.log(w)[None, :] + log_k[None, :] - kern[None, :] * c
    m = log_terms.max(axis=1)
    s = m + np.log(np.exp(log_terms - m[:, None]).sum(axis=1))
    out[pos] = np.exp(s + beta * a * np.log(xs) - math.log(math.pi * (1.0 - beta)))
    return out


@lru_cache(maxsize=None)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def m_wright_array(params: MLParams, x) -> np.ndarray:
    """Vectorized :func:`m_wright` over an array of nonnegative points."""
    beta = params.beta
    if not beta < 1.0:
        raise BetaOutOfRange("M-Wright density is a point mass at 1 for beta = 1")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("M-Wright function is evaluated for x >= 0 only")
    if beta > _MW_MAX_BETA or np.any(x > _MW_MAX_X):
        warnings.warn(
            f"M_{beta} requested outside the validated range "
            f"(beta <= {_MW_MAX_BETA}, x <= {_MW_MAX_X})",
            RangeWarning,
            stacklevel=2,
        )
    flat = x.ravel()
    total, ok = _mw_series(beta, flat, params.max_terms, params.series_tol)
    if not ok.all():
        total = total.copy()
        total[~ok] = _mw_integral(beta, flat[~ok])
    return total.reshape(x.shape)


def m_wright(params: MLParams, x: float) -> float:
    """M-Wright density M_beta(x) = sum (-x)^n / (n! Gamma(1 - beta - beta n))."""
    return float(m_wright_array(params, np.array([x]))[0])


def laplace_identity_residual(params: MLParams, s: float, tol: float = 1e-6) -> float:
    """|int_0^inf exp(-s t) M_beta(t) dt - E_beta(-s)| by composite Gauss-Legendre.

    The upper limit T doubles until exp(-s T) * M_beta(T) * T < 0.1 * tol.
    """
    if params.beta >= 1.0:
        raise BetaOutOfRange("beta = 1 is the Dirac case; the Laplace identity is degenerate")
    if not (0.0 <= s <= 10.0):
        raise ValueError("s must lie in [0, 10]")
    upper = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        while True:
            tail = math.exp(-s * upper) * m_wright(params, upper) * upper
            if tail < 0.1 * tol:
                break
            upper *= 2.0
            if upper > 1024.0:
                raise QuadratureFailure(f"M_{params.beta} tail estimate {tail:.3g} exceeds {tol}")
    per_panel = 20
    panels = max(1, params.quad_points // per_panel)
    nodes, weights = _legendre(per_panel)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wts = (half[:, None] * weights[None, :]).ravel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        dens = m_wright_array(params, pts)
    integral = float(np.sum(wts * np.exp(-s * pts) * dens))
    return abs(integral - mittag_leffler(params, -s))


def _circle_values(params: MLParams, radius: float, count: int):
    """E_beta on ``count`` equispaced points of |z| = radius, or None past the validated range."""
    coeffs = []
    abs_total = 0.0
    small = 0
    for n in range(params.max_terms):
        c = float(special.rgamma(params.beta * n + 1.0))
        coeffs.append(c)
        bound = abs(c) * radius**n
        abs_total += bound
        small = small + 1 if bound < params.series_tol else 0
        if small >= 3:
            break
    else:
        return None
    if _EPS * abs_total > _ROUNDOFF_LIMIT:
        return None
    z = radius * np.exp(2j * math.pi * np.arange(count) / count)
    return np.polynomial.polynomial.polyval(z, coeffs)


@lru_cache(maxsize=None)
def _winding_number(params: MLParams, radius: float) -> int | None:
    """Zeros of E_beta inside |z| < radius, or None if the circle cannot be evaluated."""
    count = 256
    while count <= 8192:
        vals = _circle_values(params, radius, count)
        if vals is None or np.any(np.abs(vals) == 0):
            return None
        phase = np.angle(np.append(vals, vals[0]))
        jumps = np.diff(np.unwrap(phase))
        if np.max(np.abs(jumps)) < math.pi / 4:
            return int(round(jumps.sum() / (2.0 * math.pi)))
        count *= 2
    return None


@lru_cache(maxsize=None)
def zero_free_radius(params: MLParams, max_radius: float = 12.0) -> float:
    """Modulus of the zero of E_beta nearest the origin.

    Located by the argument principle and bisection on the radius.  If no zero
    is found before the circle leaves the validated range, the largest verified
    zero-free radius is returned instead (``inf`` for beta = 1).
    """
    if params.beta == 1.0:
        return math.inf
    lo, step = 0.0, 0.25
    r = step
    while r <= max_radius:
        n = _winding_number(params, r)
        if n is None:
            return lo
        if n > 0:
            hi = r
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                m = _winding_number(params, mid)
                if m is None or m > 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        lo = r
        r += step
    return lo


def positivity_radius(params: MLParams, safety: float = 0.8) -> float:
    """eps_beta: a radius on which E_beta stays zero-free, with a safety factor."""
    return safety * zero_free_radius(params)
