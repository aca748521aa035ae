"""Normalized exponentials and the S- and T-transforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .appell import ChaosVector, _b_table
from .errors import OutsideDomain
from .special import MLParams, mittag_leffler, positivity_radius
from .tensors import pair, tensor_power

# extra degrees summed when bounding a truncation tail
_TAIL_TERMS = 80


def bilinear(x, y) -> complex:
    """<x, y> without conjugation."""
    return complex(np.dot(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)))


def exp_domain_radius(params: MLParams) -> float:
    """Admissible bound on |<xi, xi>|/2 for normalized exponentials."""
    return positivity_radius(params)


def check_domain(params: MLParams, xi, what: str = "xi"):
    q = 0.5 * bilinear(xi, xi)
    radius = exp_domain_radius(params)
    if abs(q) >= radius:
        raise OutsideDomain(f"|<{what},{what}>|/2 = {abs(q):.4g} exceeds the admissible radius {radius:.4g}")
    if abs(q.imag) == 0.0 and mittag_leffler(params, q.real) <= 0:
        raise OutsideDomain(f"E_beta(<{what},{what}>/2) is not positive")
    return q


@dataclass
class ExpVector:
    """Truncation of the normalized exponential e(w; xi) = exp<w,xi> / E_beta(<xi,xi>/2)."""

    xi: np.ndarray
    trunc_degree: int
    body: ChaosVector

    @property
    def params(self) -> MLParams:
        return self.body.params

    def tail_bound(self, omega_norm: float) -> float:
        """Upper bound on |e(w;xi) - body(w)| for |w| <= omega_norm."""
        x = float(np.linalg.norm(self.xi))
        b = np.abs(_b_table(self.params.beta, (self.trunc_degree + _TAIL_TERMS) // 2))
        q = 0.5 * x * x
        u = x * omega_norm
        total = 0.0
        for n in range(self.trunc_degree + 1, self.trunc_degree + _TAIL_TERMS + 1):
            total += sum(b[k] * q**k * u ** (n - 2 * k) / math.factorial(n - 2 * k) for k in range(n // 2 + 1))
        return total

    def exact(self, points) -> np.ndarray:
        """Closed-form e(w; xi) at the rows of ``points``."""
        pts = np.atleast_2d(np.asarray(points))
        norm = mittag_leffler(self.params, 0.5 * bilinear(self.xi, self.xi))
        return np.exp(pts @ self.xi) / norm


def exp_vector(params: MLParams, xi, N: int, tail_tol: float = 1e-6) -> ExpVector:
    """Kernels xi^n / n! in the Appell basis, n <= N.

    Raises OutsideDomain when xi is outside the normalizable domain or when
    the tail bound at |w| = 1 exceeds ``tail_tol``.
    """
    xi = np.asarray(xi, dtype=complex).ravel()
    check_domain(params, xi)
    kernels = [tensor_power(xi, n) / math.factorial(n) for n in range(N + 1)]
    ev = ExpVector(xi, N, ChaosVector(params, len(xi), "test", kernels))
    tail = ev.tail_bound(1.0)
    if tail > tail_tol:
        raise OutsideDomain(f"truncation tail {tail:.3g} at degree {N} exceeds {tail_tol:g}")
    return ev


def characteristic_function(params: MLParams, phi) -> complex:
    """E exp(i<w,phi>) = E_beta(-<phi,phi>/2)."""
    return complex(mittag_leffler(params, -0.5 * bilinear(phi, phi) + 0j))


def s_transform(Phi: ChaosVector, xi) -> complex:
    """S Phi(xi) = sum_n <Phi^(n), xi^n>."""
    if Phi.role != "dist":
        raise ValueError("s_transform expects a distribution; see appell.to_distribution")
    xi = np.asarray(xi, dtype=complex).ravel()
    check_domain(Phi.params, xi)
    return sum(pair(k, tensor_power(xi, n)) for n, k in enumerate(Phi.kernels))


def t_transform(Phi: ChaosVector, phi) -> complex:
    """T Phi(phi) = E_beta(-<phi,phi>/2) S Phi(i phi)."""
    phi = np.asarray(phi, dtype=complex).ravel()
    return characteristic_function(Phi.params, phi) * s_transform(Phi, 1j * phi)


def exp_pairing(params: MLParams, xi, eta) -> complex:
    """E[e(w;xi) e(w;eta)] = E_beta(<xi+eta,xi+eta>/2) / (E_beta(<xi,xi>/2) E_beta(<eta,eta>/2))."""
    xi = np.asarray(xi, dtype=complex).ravel()
    eta = np.asarray(eta, dtype=complex).ravel()
    qx = check_domain(params, xi, "xi")
    qe = check_domain(params, eta, "eta")
    qs = check_domain(params, xi + eta, "xi+eta")
    E = lambda q: complex(mittag_leffler(params, q))
    return E(qs) / (E(qx) * E(qe))


def evaluation_grid(params: MLParams, fn, xis, etas) -> list:
    """Rows (beta, xi..., eta..., value_re, value_im) of fn(xi, eta)."""
    rows = []
    for xi in xis:
        for eta in etas:
            v = complex(fn(xi, eta))
            row = {"beta": params.beta}
            row.update({f"xi_{i}": complex(c) for i, c in enumerate(np.ravel(xi))})
            row.update({f"eta_{i}": complex(c) for i, c in enumerate(np.ravel(eta))})
            row.update({"value_re": v.real, "value_im": v.imag})
            rows.append(row)
    return rows


def _fmt(v):
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+}j"
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(rows: list, fh):
    """Write dict rows with a header taken from the first row."""
    if not rows:
        return
    writer = csv.writer(fh)
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k, "")) for k in header])
