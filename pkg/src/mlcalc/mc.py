"""Seeded Monte Carlo sampling of the Mittag-Leffler measure.

w = sqrt(tau) g with g standard normal and tau drawn from the density M_beta,
whose Laplace transform is E_beta(-s).  Draws are produced in fixed-size
blocks; block b of variable v uses the stream SeedSequence([seed, v, b]),
so a batch depends only on (seed, n, d, beta) and never on the thread count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import appell
from .errors import BetaOutOfRange
from .special import MLParams, m_wright_array

BLOCK = 1 << 16
_UNIFORM, _EXPONENTIAL, _NORMAL = 0, 1, 2


def _stream(seed: int, var: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, var, block])))


def _blocks(n: int):
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range(-(-n // BLOCK))]


def _map_blocks(fn, n: int, threads: int | None):
    blocks = _blocks(n)
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bs: fn(*bs), blocks))
    else:
        parts = [fn(b, size) for b, size in blocks]
    return parts


def kanter_factor(beta: float, u):
    """Zolotarev/Kanter function K(u) on (0, pi)."""
    a = beta / (1 - beta)
    return np.sin(beta * u) ** a * np.sin((1 - beta) * u) / np.sin(u) ** (1 / (1 - beta))


def _subordinator_block(beta: float, seed: int, block: int, size: int) -> np.ndarray:
    u = _stream(seed, _UNIFORM, block).uniform(0.0, math.pi, size)
    e = _stream(seed, _EXPONENTIAL, block).standard_exponential(size)
    # tau = S^{-beta} for a one-sided beta-stable S with transform exp(-s^beta)
    return (e / kanter_factor(beta, u)) ** (1 - beta)


def sample_subordinator(beta: float, n: int, seed: int, threads: int | None = None, strict: bool = False) -> np.ndarray:
    """n draws with Laplace transform E_beta(-s).

    beta = 1 gives the constant stream 1; with ``strict`` it raises instead.
    """
    if not 0 < beta <= 1:
        raise BetaOutOfRange(f"beta={beta} outside (0, 1]")
    if beta == 1:
        if strict:
            raise BetaOutOfRange("the subordinator is degenerate at beta = 1")
        return np.ones(n)
    if n == 0:
        return np.empty(0)
    return np.concatenate(_map_blocks(lambda b, s: _subordinator_block(beta, seed, b, s), n, threads))


@dataclass
class SampleBatch:
    beta: float
    dim: int
    count: int
    seed: int
    omegas: np.ndarray
    taus: np.ndarray

    def to_csv(self, fh):
        writer = csv.writer(fh)
        writer.writerow(["tau"] + [f"omega_{i}" for i in range(self.dim)])
        for tau, w in zip(self.taus, self.omegas):
            writer.writerow([repr(float(tau))] + [repr(float(x)) for x in w])

    def save_npz(self, path):
        np.savez(path, beta=self.beta, dim=self.dim, seed=self.seed, omegas=self.omegas, taus=self.taus)

    @classmethod
    def load_npz(cls, path):
        z = np.load(path)
        return cls(float(z["beta"]), int(z["dim"]), len(z["taus"]), int(z["seed"]), z["omegas"], z["taus"])


def sample_measure(params: MLParams, d: int, n: int, seed: int, threads: int | None = None) -> SampleBatch:
    taus = sample_subordinator(params.beta, n, seed, threads)

    def normals(b, size):
        return _stream(seed, _NORMAL, b).standard_normal((size, d))

    g = np.concatenate(_map_blocks(normals, n, threads)) if n else np.empty((0, d))
    return SampleBatch(params.beta, d, n, seed, np.sqrt(taus)[:, None] * g, taus)


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    std_error: float
    count: int

    def sigmas(self, target) -> float:
        """|value - target| in standard errors; inf when the error is zero but the gap is not."""
        gap = abs(self.value - target)
        if self.std_error == 0:
            return 0.0 if gap == 0 else math.inf
        return gap / self.std_error

    def to_json(self, analytic=None) -> dict:
        v = complex(self.value)
        out = {"value": [v.real, v.imag], "std_error": self.std_error, "count": self.count}
        if analytic is not None:
            a = complex(analytic)
            out["analytic"] = [a.real, a.imag]
            out["sigmas"] = self.sigmas(a)
        return out


def estimate(values) -> MCEstimate:
    """Sample mean with standard error std/sqrt(n); complex values use var(re) + var(im)."""
    values = np.asarray(values)
    n = len(values)
    if n < 2:
        raise ValueError("need at least two samples")
    mean = values.mean()
    if np.iscomplexobj(values):
        var = values.real.var(ddof=1) + values.imag.var(ddof=1)
    else:
        var = values.var(ddof=1)
        mean = float(mean)
    return MCEstimate(mean, float(math.sqrt(var / n)), n)


def evaluate_batch(v: appell.ChaosVector, batch: SampleBatch, chunk: int = 1 << 17) -> np.ndarray:
    return np.concatenate(
        [appell.evaluate(v, batch.omegas[i : i + chunk]) for i in range(0, batch.count, chunk)]
    )


def mc_pair(batch: SampleBatch, f, g, conjugate: bool = True) -> MCEstimate:
    """Estimate of E[f conj(g)]; f and g are ChaosVectors or callables on the omega matrix."""
    fv = f(batch.omegas) if callable(f) else evaluate_batch(f, batch)
    gv = g(batch.omegas) if callable(g) else evaluate_batch(g, batch)
    return estimate(fv * (np.conj(gv) if conjugate else gv))


def mc_covariance_pair(batch: SampleBatch, phi, psi) -> MCEstimate:
    """E[<w,phi><w,psi>]; analytic value <phi,psi>/Gamma(beta+1)."""
    return estimate((batch.omegas @ np.asarray(phi)) * (batch.omegas @ np.asarray(psi)))


def mc_moment(batch: SampleBatch, phi, power: int) -> MCEstimate:
    return estimate((batch.omegas @ np.asarray(phi)) ** power)


def mc_characteristic(batch: SampleBatch, phi) -> MCEstimate:
    return estimate(np.exp(1j * (batch.omegas @ np.asarray(phi))))


def mc_laplace(taus: np.ndarray, s: float) -> MCEstimate:
    return estimate(np.exp(-s * taus))


def mc_mehler(batch: SampleBatch, t: float, y, xi) -> MCEstimate:
    x = math.exp(-t) * np.asarray(y) + math.sqrt(1 - math.exp(-2 * t)) * batch.omegas
    return estimate(np.exp(1j * (x @ np.asarray(xi))))


def density_check(params: MLParams, taus: np.ndarray, bins: int = 40, upper: float = 4.0) -> dict:
    """Histogram of subordinator draws against M_beta on [0, upper].

    Returns the largest bin deviation in standard errors.  Each bin count is
    compared with n times the integral of M_beta over the bin (5-point Gauss).
    """
    edges = np.linspace(0.0, upper, bins + 1)
    counts, _ = np.histogram(taus, edges)
    x, w = np.polynomial.legendre.leggauss(5)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    probs = (m_wright_array(params, nodes.ravel()).reshape(nodes.shape) * w).sum(axis=1) * half
    n = len(taus)
    expected = n * probs
    se = np.sqrt(np.maximum(n * probs * (1 - probs), 1.0))
    z = np.abs(counts - expected) / se
    return {"edges": edges.tolist(), "counts": counts.tolist(), "expected": expected.tolist(), "max_sigmas": float(z.max())}
