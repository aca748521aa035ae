"""Symmetric tensors over C^d stored by sorted multi-index.

The coefficient stored under a sorted multi-index is the common value of the
fully symmetric dense tensor at every permutation of that index.  Pairings
therefore carry the multinomial multiplicity of each multiset.  All pairings
are bilinear; :func:`inner` is the sesquilinear variant.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import comb as _comb

from .errors import DegreeMismatch, DimMismatch

_DENSE_LIMIT = 1 << 20


class _Basis:
    """Enumeration of the multisets of size ``degree`` drawn from ``range(dim)``."""

    def __init__(self, dim: int, degree: int):
        self.dim = dim
        self.degree = degree
        self.keys = list(itertools.combinations_with_replacement(range(dim), degree))
        counts = np.zeros((len(self.keys), dim), dtype=np.int64)
        for i, key in enumerate(self.keys):
            for k in key:
                counts[i, k] += 1
        self.counts = counts
        self.index = {key: i for i, key in enumerate(self.keys)}
        fact = np.array([math.factorial(j) for j in range(degree + 1)], dtype=float)
        self.multiplicity = math.factorial(degree) / np.prod(fact[counts], axis=1)
        self.radix = (degree + 1) ** np.arange(dim, dtype=np.int64)
        self.codes = counts @ self.radix
        lut = np.full((degree + 1) ** dim, -1, dtype=np.int64)
        lut[self.codes] = np.arange(len(self.keys))
        self.lut = lut

    def __len__(self):
        return len(self.keys)

    def encode(self, counts: np.ndarray) -> np.ndarray:
        return self.lut[counts @ self.radix]


@lru_cache(maxsize=None)
def basis(dim: int, degree: int) -> _Basis:
    return _Basis(dim, degree)


class SymTensor:
    """Degree-``degree`` symmetric tensor over C^``dim``."""

    __slots__ = ("dim", "degree", "coeffs")

    def __init__(self, dim: int, degree: int, coeffs=None):
        if dim < 1 or degree < 0:
            raise ValueError("need dim >= 1 and degree >= 0")
        self.dim = int(dim)
        self.degree = int(degree)
        size = len(basis(self.dim, self.degree))
        if coeffs is None:
            self.coeffs = np.zeros(size, dtype=complex)
        else:
            c = np.asarray(coeffs, dtype=complex).ravel()
            if c.shape != (size,):
                raise DegreeMismatch(f"expected {size} coefficients, got {c.shape}")
            self.coeffs = c.copy()

    # construction
    @classmethod
    def zeros(cls, dim, degree):
        return cls(dim, degree)

    @classmethod
    def scalar(cls, value, dim):
        return cls(dim, 0, [value])

    @classmethod
    def vector(cls, v):
        v = np.asarray(v, dtype=complex).ravel()
        return cls(len(v), 1, v)

    @classmethod
    def unit(cls, k, dim):
        t = cls(dim, 1)
        t.coeffs[k] = 1.0
        return t

    @classmethod
    def from_dict(cls, dim, degree, mapping):
        t = cls(dim, degree)
        b = basis(dim, degree)
        for key, value in mapping.items():
            key = tuple(sorted(key))
            if len(key) != degree:
                raise DegreeMismatch(f"index {key} has length != {degree}")
            t.coeffs[b.index[key]] = value
        return t

    # access
    def __getitem__(self, index):
        index = tuple(sorted(index)) if not isinstance(index, (int, np.integer)) else (index,)
        return self.coeffs[basis(self.dim, self.degree).index[index]]

    def items(self):
        return zip(basis(self.dim, self.degree).keys, self.coeffs)

    def as_dict(self):
        return dict(self.items())

    def __len__(self):
        return len(self.coeffs)

    def copy(self):
        return SymTensor(self.dim, self.degree, self.coeffs)

    # arithmetic
    def _check(self, other):
        if self.dim != other.dim:
            raise DimMismatch(f"dimensions {self.dim} and {other.dim} differ")
        if self.degree != other.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree} differ")

    def __add__(self, other):
        self._check(other)
        return SymTensor(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SymTensor(self.dim, self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return SymTensor(self.dim, self.degree, -self.coeffs)

    def __mul__(self, c):
        if isinstance(c, SymTensor):
            return NotImplemented
        return SymTensor(self.dim, self.degree, self.coeffs * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return SymTensor(self.dim, self.degree, self.coeffs / c)

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self.dim, self.degree) == (other.dim, other.degree) and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __repr__(self):
        return f"SymTensor(dim={self.dim}, degree={self.degree}, nnz={np.count_nonzero(self.coeffs)})"

    def conj(self):
        return SymTensor(self.dim, self.degree, self.coeffs.conj())

    def allclose(self, other, atol=1e-12):
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    # dense fallback
    def to_dense(self) -> np.ndarray:
        if self.dim**self.degree > _DENSE_LIMIT:
            raise ValueError("dense form too large")
        if self.degree == 0:
            return np.array(self.coeffs[0])
        b = basis(self.dim, self.degree)
        idx = np.indices((self.dim,) * self.degree).reshape(self.degree, -1).T
        counts = np.zeros((idx.shape[0], self.dim), dtype=np.int64)
        for j in range(self.degree):
            counts[np.arange(idx.shape[0]), idx[:, j]] += 1
        return self.coeffs[b.encode(counts)].reshape((self.dim,) * self.degree)

    # serialization
    def to_json(self) -> dict:
        coeffs = {
            ",".join(str(i) for i in key): [float(v.real), float(v.imag)]
            for key, v in self.items()
        }
        return {"dim": self.dim, "degree": self.degree, "coeffs": coeffs}

    @classmethod
    def from_json(cls, data: dict):
        dim, degree = int(data["dim"]), int(data["degree"])
        mapping = {}
        for key, (re, im) in data["coeffs"].items():
            idx = tuple(int(i) for i in key.split(",")) if key else ()
            mapping[idx] = complex(re, im)
        return cls.from_dict(dim, degree, mapping)


def symmetrize(raw) -> SymTensor:
    """Average a dense tensor over all permutations of its axes."""
    raw = np.asarray(raw, dtype=complex)
    degree = raw.ndim
    if degree == 0:
        return SymTensor.scalar(complex(raw), 1)
    dim = raw.shape[0]
    if any(s != dim for s in raw.shape):
        raise DegreeMismatch(f"axes of unequal length {raw.shape}")
    perms = list(itertools.permutations(range(degree)))
    avg = sum(np.transpose(raw, p) for p in perms) / len(perms)
    b = basis(dim, degree)
    return SymTensor(dim, degree, [avg[key] for key in b.keys])


def from_dense(raw) -> SymTensor:
    return symmetrize(raw)


@lru_cache(maxsize=None)
def _product_plan(dim: int, da: int, db: int):
    ba, bb, bo = basis(dim, da), basis(dim, db), basis(dim, da + db)
    ca = ba.counts[:, None, :]
    cb = bb.counts[None, :, :]
    total = ca + cb
    out = bo.encode(total.reshape(-1, dim))
    ca = np.broadcast_to(ca, total.shape)
    weight = np.prod(_comb(total, ca), axis=-1) / math.comb(da + db, da)
    return out, weight.reshape(-1)


def sym_product(a: SymTensor, b: SymTensor) -> SymTensor:
    """Symmetric tensor product a (x)^ b."""
    if a.dim != b.dim:
        raise DimMismatch(f"dimensions {a.dim} and {b.dim} differ")
    if a.degree == 0:
        return b * a.coeffs[0]
    if b.degree == 0:
        return a * b.coeffs[0]
    out, weight = _product_plan(a.dim, a.degree, b.degree)
    vals = (a.coeffs[:, None] * b.coeffs[None, :]).reshape(-1) * weight
    n = len(basis(a.dim, a.degree + b.degree))
    coeffs = np.bincount(out, weights=vals.real, minlength=n) + 1j * np.bincount(
        out, weights=vals.imag, minlength=n
    )
    return SymTensor(a.dim, a.degree + b.degree, coeffs)


@lru_cache(maxsize=None)
def _contract_plan(dim: int, degree_out: int, degree_b: int):
    bj, bk, ba = basis(dim, degree_out), basis(dim, degree_b), basis(dim, degree_out + degree_b)
    total = bj.counts[:, None, :] + bk.counts[None, :, :]
    return ba.encode(total.reshape(-1, dim)).reshape(len(bj), len(bk))


def contract(a: SymTensor, b: SymTensor) -> SymTensor:
    """Pair the last ``b.degree`` slots of ``a`` against ``b``; degree drops by ``b.degree``."""
    if a.dim != b.dim:
        raise DimMismatch(f"dimensions {a.dim} and {b.dim} differ")
    if b.degree > a.degree:
        raise DegreeMismatch(f"cannot contract degree {b.degree} into degree {a.degree}")
    if b.degree == 0:
        return a * b.coeffs[0]
    idx = _contract_plan(a.dim, a.degree - b.degree, b.degree)
    weighted = basis(b.dim, b.degree).multiplicity * b.coeffs
    return SymTensor(a.dim, a.degree - b.degree, a.coeffs[idx] @ weighted)


def pair(a: SymTensor, b: SymTensor) -> complex:
    """Full bilinear pairing <a, b> (no conjugation)."""
    a._check(b)
    return complex(np.sum(basis(a.dim, a.degree).multiplicity * a.coeffs * b.coeffs))


def inner(a: SymTensor, b: SymTensor) -> complex:
    """Sesquilinear inner product, conjugating ``b``."""
    return pair(a, b.conj())


@lru_cache(maxsize=None)
def _trace_tensor(dim: int) -> SymTensor:
    return SymTensor.from_dict(dim, 2, {(k, k): 1.0 for k in range(dim)})


def trace_tensor(dim: int) -> SymTensor:
    """Degree-2 tensor Tr with <Tr, a (x) b> = <a, b>."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _trace_tensor(dim).copy()


@lru_cache(maxsize=None)
def _trace_power(dim: int, k: int) -> SymTensor:
    if k == 0:
        return SymTensor.scalar(1.0, dim)
    return sym_product(_trace_power(dim, k - 1), _trace_tensor(dim))


def trace_power(dim: int, k: int) -> SymTensor:
    """Symmetrization of Tr^{(x) k}."""
    return _trace_power(dim, k).copy()


@lru_cache(maxsize=None)
def _trace_plan(dim: int, degree_out: int):
    bj, ba = basis(dim, degree_out), basis(dim, degree_out + 2)
    eye2 = 2 * np.eye(dim, dtype=np.int64)
    total = bj.counts[:, None, :] + eye2[None, :, :]
    return ba.encode(total.reshape(-1, dim)).reshape(len(bj), dim)


def partial_trace(t: SymTensor, times: int = 1) -> SymTensor:
    """Contract ``times`` slot pairs of ``t`` with Tr."""
    for _ in range(times):
        if t.degree < 2:
            raise DegreeMismatch("partial trace needs degree >= 2")
        idx = _trace_plan(t.dim, t.degree - 2)
        t = SymTensor(t.dim, t.degree - 2, t.coeffs[idx].sum(axis=1))
    return t


@lru_cache(maxsize=None)
def _vector_plan(dim: int, degree_out: int):
    bj, ba = basis(dim, degree_out), basis(dim, degree_out + 1)
    eye = np.eye(dim, dtype=np.int64)
    total = bj.counts[:, None, :] + eye[None, :, :]
    return ba.encode(total.reshape(-1, dim)).reshape(len(bj), dim)


def contract_vector(t: SymTensor, y, times: int = 1) -> SymTensor:
    """Contract ``times`` slots of ``t`` with the vector ``y``."""
    y = np.asarray(y, dtype=complex).ravel()
    if len(y) != t.dim:
        raise DimMismatch(f"vector of length {len(y)} against dim {t.dim}")
    for _ in range(times):
        if t.degree < 1:
            raise DegreeMismatch("cannot contract a scalar")
        idx = _vector_plan(t.dim, t.degree - 1)
        t = SymTensor(t.dim, t.degree - 1, t.coeffs[idx] @ y)
    return t


def tensor_power(y, n: int) -> SymTensor:
    """y^{(x) n}."""
    y = np.asarray(y, dtype=complex).ravel()
    b = basis(len(y), n)
    return SymTensor(len(y), n, np.prod(y[None, :] ** b.counts, axis=1))


def evaluate(t: SymTensor, points) -> np.ndarray:
    """<w^{(x) n}, t> at each row w of ``points`` (shape (m, dim))."""
    pts = np.asarray(points)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != t.dim:
        raise DimMismatch(f"points of dim {pts.shape[1]} against tensor dim {t.dim}")
    b = basis(t.dim, t.degree)
    weights = b.multiplicity * t.coeffs
    if t.degree == 0:
        return np.full(pts.shape[0], weights[0], dtype=complex)
    powers = [np.ones_like(pts)]
    for _ in range(t.degree):
        powers.append(powers[-1] * pts)
    powers = np.stack(powers)  # (degree+1, m, dim)
    out = np.zeros(pts.shape[0], dtype=complex)
    nz = np.flatnonzero(weights)
    # chunks of monomials bound the (chunk, m) temporaries
    for start in range(0, len(nz), 64):
        idx = nz[start : start + 64]
        counts = b.counts[idx]
        mono = powers[counts[:, 0], :, 0]
        for k in range(1, t.dim):
            mono = mono * powers[counts[:, k], :, k]
        out += weights[idx] @ mono
    return out


@dataclass(frozen=True)
class WeightProfile:
    """Per-coordinate weights (k+1)^p; negative p gives the dual norm."""

    p: float

    def weights(self, dim: int) -> np.ndarray:
        return (np.arange(dim) + 1.0) ** self.p


def weighted_norm(t: SymTensor, w: WeightProfile | float) -> float:
    """|t|_p with per-coordinate weights (k+1)^p."""
    if not isinstance(w, WeightProfile):
        w = WeightProfile(w)
    b = basis(t.dim, t.degree)
    per_index = np.prod(w.weights(t.dim)[None, :] ** (2 * b.counts), axis=1)
    return float(math.sqrt(np.sum(b.multiplicity * np.abs(t.coeffs) ** 2 * per_index)))


def dense_weighted_norm(arr, w: WeightProfile | float) -> float:
    """Weighted norm of an arbitrary (not necessarily symmetric) dense tensor."""
    if not isinstance(w, WeightProfile):
        w = WeightProfile(w)
    arr = np.asarray(arr)
    if arr.ndim == 0:
        return float(abs(arr))
    wt = w.weights(arr.shape[0]) ** 2
    scale = np.ones(arr.shape)
    for axis in range(arr.ndim):
        shape = [1] * arr.ndim
        shape[axis] = -1
        scale = scale * wt.reshape(shape)
    return float(math.sqrt(np.sum(np.abs(arr) ** 2 * scale)))
