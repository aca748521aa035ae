"""Operators on truncated chaos expansions and their symbols.

Derivative directions are the coordinate vectors e_k, k < dim.  The creation
operator in direction k is the adjoint of the annihilation operator
D_{e_k} under the dual pairing.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .appell import (
    ChaosVector,
    _prepare,
    _l2_prepared,
    dist_norm,
    l2_bilinear,
    monomial_to_p,
    p_to_monomial,
    testfn_norm,
    to_distribution,
)
from .errors import BasisMismatch, DegreeMismatch, DimMismatch, TruncationOverflow
from .special import MLParams, mittag_leffler
from .tensors import (
    SymTensor,
    contract,
    contract_vector,
    dense_weighted_norm,
    symmetrize,
    sym_product,
    tensor_power,
)
from .transforms import bilinear, exp_vector, s_transform


def _direction(k, dim: int) -> np.ndarray:
    if isinstance(k, (int, np.integer)):
        if not 0 <= k < dim:
            raise DimMismatch(f"direction {k} outside range({dim})")
        e = np.zeros(dim, dtype=complex)
        e[k] = 1.0
        return e
    y = np.asarray(k, dtype=complex).ravel()
    if len(y) != dim:
        raise DimMismatch(f"direction of length {len(y)} against dim {dim}")
    return y


def _as_appell(phi: ChaosVector) -> ChaosVector:
    if phi.role != "test":
        raise BasisMismatch("operator expects a test function")
    return monomial_to_p(phi)


def diff_const(Phi_n: SymTensor, phi: ChaosVector) -> ChaosVector:
    """D(Phi_n): kernel[m-n] += m!/(m-n)! contract(phi^(m), Phi_n)."""
    phi = _as_appell(phi)
    if Phi_n.dim != phi.dim:
        raise DimMismatch(f"kernel dim {Phi_n.dim} against {phi.dim}")
    n = Phi_n.degree
    if n > phi.degree:
        return ChaosVector.constant(phi.params, phi.dim, 0.0)
    out = [
        contract(phi.kernels[m], Phi_n) * (math.factorial(m) / math.factorial(m - n))
        for m in range(n, phi.degree + 1)
    ]
    return phi._like(out)


def gateaux(y, phi: ChaosVector) -> ChaosVector:
    """D_y phi with kernels n * (y contracted into phi^(n))."""
    phi = _as_appell(phi)
    y = _direction(y, phi.dim)
    if phi.degree == 0:
        return ChaosVector.constant(phi.params, phi.dim, 0.0)
    return phi._like([contract_vector(phi.kernels[n], y) * n for n in range(1, phi.degree + 1)])


def annihilation(k, phi: ChaosVector) -> ChaosVector:
    return gateaux(_direction(k, phi.dim), phi)


def creation(k, Phi: ChaosVector, capacity: int | None = None, trunc: int | None = None) -> ChaosVector:
    """Q_n(G) -> Q_{n+1}(G (x)^ e_k).

    A test-function input is first expanded in the dual basis up to ``trunc``
    (default: its own degree).
    """
    if Phi.role == "test":
        Phi = to_distribution(Phi, Phi.degree if trunc is None else trunc)
    e = SymTensor.vector(_direction(k, Phi.dim))
    top = Phi.degree + 1
    if capacity is not None and top > capacity:
        raise TruncationOverflow(f"output degree {top} exceeds capacity {capacity}")
    kernels = [SymTensor(Phi.dim, 0)] + [sym_product(G, e) for G in Phi.kernels]
    return Phi._like(kernels)


def translate(y, phi: ChaosVector) -> ChaosVector:
    """tau_y phi = phi(. + y); kernel[k] = sum_n C(n+k,k) contract(phi^(n+k), y^n).

    The same formula holds in the Appell and the monomial basis.
    """
    if phi.role != "test":
        raise BasisMismatch("translate expects a test function")
    y = _direction(y, phi.dim)
    N = phi.degree
    powers = [tensor_power(y, n) for n in range(N + 1)]
    out = []
    for k in range(N + 1):
        acc = SymTensor(phi.dim, k)
        for n in range(N - k + 1):
            acc = acc + contract(phi.kernels[n + k], powers[n]) * math.comb(n + k, k)
        out.append(acc)
    return phi._like(out)


def exp_gateaux(y, phi: ChaosVector, K: int) -> ChaosVector:
    """sum_{j <= K} D_y^j phi / j!."""
    phi = _as_appell(phi)
    term, total = phi, phi
    for j in range(1, K + 1):
        term = gateaux(y, term) * (1.0 / j)
        total = total + term
    return total


def scale(c: float, phi: ChaosVector) -> ChaosVector:
    """phi(w) -> phi(c w) on monomial kernels."""
    if phi.role != "test" or phi.basis != "monomial":
        raise BasisMismatch("scale expects a monomial-basis test function; call p_to_monomial first")
    return phi._like([k * (c**n) for n, k in enumerate(phi.kernels)])


def _derivatives(phi: ChaosVector, m: int) -> dict:
    """partial_{t_1}...partial_{t_m} phi keyed by the sorted tuple t."""
    d = phi.dim
    out = {(): phi}
    for depth in range(m):
        nxt = {}
        for t, v in out.items():
            if len(t) != depth:
                continue
            start = t[-1] if t else 0
            for k in range(start, d):
                nxt[t + (k,)] = annihilation(k, v)
        out.update(nxt)
    return {t: v for t, v in out.items() if len(t) == m}


def _dense_kernel(kappa, l: int, m: int, dim: int) -> np.ndarray:
    if isinstance(kappa, SymTensor):
        kappa = kappa.to_dense()
    kappa = np.asarray(kappa, dtype=complex)
    if kappa.ndim != l + m:
        raise DegreeMismatch(f"kernel of order {kappa.ndim}, expected {l + m}")
    if kappa.shape != (dim,) * (l + m):
        raise DimMismatch(f"kernel shape {kappa.shape} against dim {dim}")
    return kappa


def _summed_over_orderings(kappa: np.ndarray, l: int, t: tuple) -> np.ndarray:
    # derivatives commute, so every ordering of t contributes the same vector
    return sum(kappa[(Ellipsis,) + perm] for perm in set(itertools.permutations(t)))


def integral_kernel_op(l: int, m: int, kappa, phi: ChaosVector, trunc: int | None = None, capacity: int | None = None) -> ChaosVector:
    """Xi_{l,m}(kappa) phi = sum kappa[s, t] d*_{s_1}..d*_{s_l} d_{t_1}..d_{t_m} phi.

    The first ``l`` slots of ``kappa`` are creation indices.  With l = 0 the
    result is a test function; otherwise the annihilated test functions are
    expanded in the dual basis up to ``trunc`` before creation.
    """
    phi = _as_appell(phi)
    d = phi.dim
    kappa = _dense_kernel(kappa, l, m, d)
    derivs = _derivatives(phi, m)
    if l == 0:
        total = ChaosVector.constant(phi.params, d, 0.0)
        for t, v in derivs.items():
            total = total + v * complex(_summed_over_orderings(kappa, 0, t))
        return total
    N = phi.degree if trunc is None else trunc
    if capacity is not None and N + l > capacity:
        raise TruncationOverflow(f"output degree {N + l} exceeds capacity {capacity}")
    out = [SymTensor(d, n) for n in range(N + l + 1)]
    for t, v in derivs.items():
        S = symmetrize(_summed_over_orderings(kappa, l, t))
        if not np.any(S.coeffs):
            continue
        F = to_distribution(v, N)
        for n, G in enumerate(F.kernels):
            out[n + l] = out[n + l] + sym_product(G, S)
    return ChaosVector(phi.params, d, "dist", out)


def eta_form(l: int, m: int, phi: ChaosVector, psi: ChaosVector) -> np.ndarray:
    """eta[s, t] = <<d*_s d_t phi, psi>> = E[(d_t phi)(d_s psi)] as a dense (dim,)*(l+m) array."""
    phi.compatible(psi)
    d = phi.dim
    left = {t: _prepare(v) for t, v in _derivatives(_as_appell(phi), m).items()}
    right = {s: _prepare(v) for s, v in _derivatives(_as_appell(psi), l).items()}
    eta = np.zeros((d,) * (l + m), dtype=complex)
    for s, ps in right.items():
        for t, pt in left.items():
            val = _l2_prepared(pt, ps)
            for sp in set(itertools.permutations(s)):
                for tp in set(itertools.permutations(t)):
                    eta[sp + tp] = val
    return eta


def matrix_kernel(A) -> np.ndarray:
    """Kernel of Xi_{1,1} whose symbol is <xi, A eta> times the exponential pairing."""
    return np.asarray(A, dtype=complex).T


# operator representations


@dataclass(eq=False)
class Operator:
    params: MLParams
    dim: int

    kind = "abstract"
    output_role = "test"

    def apply(self, phi: ChaosVector, trunc: int | None = None) -> ChaosVector:
        raise NotImplementedError

    def __call__(self, phi, trunc=None):
        return self.apply(phi, trunc)

    def _payload(self) -> dict:
        return {}

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": {"beta": self.params.beta}, "dim": self.dim}
        out.update(self._payload())
        return out


def _cjson(v):
    v = np.asarray(v, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in v.ravel()], list(v.shape)


def _from_cjson(pairs, shape):
    arr = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    return arr.reshape(shape)


@dataclass(eq=False)
class Identity(Operator):
    kind = "identity"

    def apply(self, phi, trunc=None):
        return phi


@dataclass(eq=False)
class DiffConst(Operator):
    kernel: SymTensor = None
    kind = "diff_const"

    def apply(self, phi, trunc=None):
        return diff_const(self.kernel, phi)

    def _payload(self):
        return {"kappa": self.kernel.to_json()}


@dataclass(eq=False)
class Gateaux(Operator):
    y: np.ndarray = None
    kind = "gateaux"

    def apply(self, phi, trunc=None):
        return gateaux(self.y, phi)

    def _payload(self):
        return {"y": _cjson(self.y)[0]}


@dataclass(eq=False)
class Annihilation(Operator):
    k: int = 0
    kind = "annihilation"

    def apply(self, phi, trunc=None):
        return annihilation(self.k, phi)

    def _payload(self):
        return {"k": self.k}


@dataclass(eq=False)
class Creation(Operator):
    k: int = 0
    capacity: int | None = None
    kind = "creation"
    output_role = "dist"

    def apply(self, phi, trunc=None):
        return creation(self.k, phi, self.capacity, trunc)

    def _payload(self):
        return {"k": self.k, "capacity": self.capacity}


@dataclass(eq=False)
class Translate(Operator):
    y: np.ndarray = None
    kind = "translate"

    def apply(self, phi, trunc=None):
        return translate(self.y, phi)

    def _payload(self):
        return {"y": _cjson(self.y)[0]}


@dataclass(eq=False)
class Scale(Operator):
    c: float = 1.0
    kind = "scale"

    def apply(self, phi, trunc=None):
        return monomial_to_p(scale(self.c, p_to_monomial(phi)))

    def _payload(self):
        return {"c": self.c}


@dataclass(eq=False)
class IntegralKernel(Operator):
    l: int = 0
    m: int = 0
    kappa: np.ndarray = None
    capacity: int | None = None
    kind = "integral_kernel"

    def __post_init__(self):
        self.kappa = _dense_kernel(self.kappa, self.l, self.m, self.dim)

    @property
    def output_role(self):
        return "dist" if self.l else "test"

    def apply(self, phi, trunc=None):
        return integral_kernel_op(self.l, self.m, self.kappa, phi, trunc, self.capacity)

    def _payload(self):
        pairs, shape = _cjson(self.kappa)
        out = {"l": self.l, "m": self.m, "kappa": pairs, "shape": shape}
        if self.l == 1 and self.m == 1:
            out["matrix"] = [[complex(z).real for z in row] for row in self.kappa.T]
        return out


@dataclass(eq=False)
class Composition(Operator):
    factors: tuple = field(default_factory=tuple)
    kind = "composition"

    @property
    def output_role(self):
        return self.factors[0].output_role if self.factors else "test"

    def apply(self, phi, trunc=None):
        # rightmost factor acts first
        for op in reversed(self.factors):
            phi = op.apply(phi, trunc)
        return phi

    def _payload(self):
        return {"factors": [f.to_json() for f in self.factors]}


def operator_from_json(data: dict, params: MLParams | None = None) -> Operator:
    params = params or MLParams(float(data["params"]["beta"]))
    dim = int(data["dim"])
    kind = data["kind"]
    if kind == "identity":
        return Identity(params, dim)
    if kind == "diff_const":
        return DiffConst(params, dim, SymTensor.from_json(data["kappa"]))
    if kind in ("gateaux", "translate"):
        y = np.array([complex(re, im) for re, im in data["y"]])
        return (Gateaux if kind == "gateaux" else Translate)(params, dim, y)
    if kind == "annihilation":
        return Annihilation(params, dim, int(data["k"]))
    if kind == "creation":
        return Creation(params, dim, int(data["k"]), data.get("capacity"))
    if kind == "scale":
        return Scale(params, dim, float(data["c"]))
    if kind == "integral_kernel":
        if "kappa" in data:
            kappa = _from_cjson(data["kappa"], data["shape"])
        else:
            kappa = matrix_kernel(data["matrix"])
        return IntegralKernel(params, dim, int(data["l"]), int(data["m"]), kappa, data.get("capacity"))
    if kind == "composition":
        return Composition(params, dim, tuple(operator_from_json(f, params) for f in data["factors"]))
    raise ValueError(f"unknown operator kind {kind!r}")


def _flatten(op: Operator) -> list:
    if isinstance(op, Composition):
        return [g for f in op.factors for g in _flatten(f)]
    if isinstance(op, Identity):
        return []
    return [op]


def bilinear_form(op: Operator, phi: ChaosVector, psi: ChaosVector) -> complex:
    """<<op phi, psi>> for test functions phi, psi.

    Leading creation factors move to psi as annihilations; a leading integral
    kernel factor is evaluated through eta_form.
    """
    factors = _flatten(op)
    while factors and isinstance(factors[0], Creation):
        psi = annihilation(factors.pop(0).k, psi)
    if not factors:
        return l2_bilinear(phi, psi)
    head, rest = factors[0], factors[1:]
    if any(f.output_role != "test" for f in rest):
        raise NotImplementedError("creation factors must precede all other factors")
    for f in reversed(rest):
        phi = f.apply(phi)
    if isinstance(head, IntegralKernel) and head.l:
        return complex(np.sum(head.kappa * eta_form(head.l, head.m, phi, psi)))
    return l2_bilinear(head.apply(phi), psi)


def symbol(op: Operator, xi, eta, N: int = 16, path: str = "a") -> complex:
    """<<op e(.;xi), e(.;eta)>> computed by the bilinear form (a) or the S-transform (b)."""
    ex = exp_vector(op.params, xi, N, tail_tol=np.inf)
    ee = exp_vector(op.params, eta, N, tail_tol=np.inf)
    if path == "a":
        return bilinear_form(op, ex.body, ee.body)
    if path == "b":
        out = op.apply(ex.body, trunc=N)
        if out.role == "test":
            out = to_distribution(out, N)
        return s_transform(out, ee.xi)
    raise ValueError("path must be 'a' or 'b'")


# Mehler evolution


def mehler_exp(params: MLParams, t: float, y, xi) -> complex:
    """E exp(i<e^{-t} y + sqrt(1-e^{-2t}) w, xi>) = e^{i e^{-t}<y,xi>} E_beta(-(1-e^{-2t})<xi,xi>/2)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    q = bilinear(xi, xi)
    phase = np.exp(1j * math.exp(-t) * bilinear(y, xi))
    return complex(phase * mittag_leffler(params, -0.5 * (1 - math.exp(-2 * t)) * q + 0j))


def mehler_semigroup_defect(params: MLParams, t: float, s: float, xi) -> float:
    """|P_s P_t e - P_{t+s} e| on the exponential e^{i<.,xi>}, y-independent part."""
    if t < 0 or s < 0:
        raise ValueError("t and s must be >= 0")
    q = bilinear(xi, xi)
    E = lambda z: complex(mittag_leffler(params, z + 0j))
    lhs = E(-0.5 * (1 - math.exp(-2 * s)) * q) * E(-0.5 * (1 - math.exp(-2 * t)) * math.exp(-2 * s) * q)
    return abs(lhs - E(-0.5 * (1 - math.exp(-2 * (t + s))) * q))


def mehler_poly(params: MLParams, t: float, y, phi: ChaosVector) -> complex:
    """E phi(e^{-t} y + sqrt(1-e^{-2t}) w) for a truncated test function."""
    if t < 0:
        raise ValueError("t must be >= 0")
    y = np.asarray(y, dtype=complex)
    shifted = translate(math.exp(-t) * y, p_to_monomial(phi))
    g = scale(math.sqrt(1 - math.exp(-2 * t)), shifted)
    return complex(monomial_to_p(g).kernels[0].coeffs[0])


def translation_multiplication_gap(params: MLParams, xi, eta) -> dict:
    """Compare C(xi)/C(xi - i eta) with exp(-i<eta,xi>)/E_beta(<eta,eta>/2).

    C is the characteristic function.  The identity holds when beta = 1.
    """
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    C = lambda v: complex(mittag_leffler(params, -0.5 * bilinear(v, v) + 0j))
    lhs = C(xi) / C(xi - 1j * eta)
    laplace = complex(mittag_leffler(params, 0.5 * bilinear(eta, eta) + 0j))
    corrected = np.exp(-1j * bilinear(eta, xi)) / laplace
    printed = laplace / np.exp(1j * bilinear(eta, xi))
    return {
        "lhs": lhs,
        "rhs": corrected,
        "gap": abs(lhs - corrected),
        "rhs_as_printed": printed,
        "gap_as_printed": abs(lhs - printed),
    }


# norm bounds, reported rather than asserted


def _random_test(params, dim, degree, rng) -> ChaosVector:
    kernels = []
    for n in range(degree + 1):
        raw = rng.normal(size=(dim,) * n) if n else rng.normal()
        k = symmetrize(raw) if n else SymTensor.scalar(raw, dim)
        kernels.append(k / math.factorial(n))
    return ChaosVector(params, dim, "test", kernels)


def _translation_case(params, phi, y, p, q):
    r = 1 - 2.0 ** (-2 * q)
    lhs = testfn_norm(translate(y, phi), p, q)
    yn = dense_weighted_norm(y, -(p + q))
    rhs = testfn_norm(phi, p + q, q) / math.sqrt(r) * math.exp(yn**2 / (2 * r))
    return lhs, rhs


def _gateaux_case(params, phi, y, p, q):
    lhs = testfn_norm(gateaux(y, phi), p, q)
    const = math.sqrt(2.0 ** (-2 * q) / abs(-2 * q * math.e * math.log(2)))
    rhs = const * dense_weighted_norm(y, -(p + q)) * testfn_norm(phi, p + q, q)
    return lhs, rhs


def _kernel_case(params, phi, kappa, l, m, p, q):
    lhs = dist_norm(integral_kernel_op(l, m, kappa, phi), p, q)
    const = 2.0 ** (-p) * math.sqrt(l**l * m**m) * (2.0 ** (-p) / abs(-2 * p * math.e * math.log(2))) ** ((l + m) / 2)
    rhs = const * dense_weighted_norm(kappa, -p) * testfn_norm(phi, p, q)
    return lhs, rhs


def norm_bound_report(kind: str, params: MLParams, dim: int = 2, p: float = 1.0, q: float = 1.0, cases: int = 100, seed: int = 0, degree: int = 4, l: int = 1, m: int = 1, zero: bool = False) -> dict:
    """Empirical ratio table lhs/rhs for one of the three bounds.

    kind is "translation", "gateaux" or "integral_kernel".  Norms use the
    sign-corrected constants (2^{-2q} in place of 2^{2q}, absolute values of
    the log factors).
    """
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(cases):
        phi = _random_test(params, dim, degree, rng)
        if zero:
            phi = phi * 0.0
        y = rng.normal(size=dim) * rng.uniform(0, 1)
        if kind == "translation":
            lhs, rhs = _translation_case(params, phi, y, p, q)
        elif kind == "gateaux":
            lhs, rhs = _gateaux_case(params, phi, y, p, q)
        elif kind == "integral_kernel":
            kappa = rng.normal(size=(dim,) * (l + m))
            lhs, rhs = _kernel_case(params, phi, kappa, l, m, p, q)
        else:
            raise ValueError(f"unknown bound {kind!r}")
        ratio = lhs / rhs if rhs > 0 else 0.0
        rows.append({"lhs": lhs, "rhs": rhs, "ratio": ratio})
    ratios = np.array([r["ratio"] for r in rows])
    return {
        "kind": kind,
        "beta": params.beta,
        "dim": dim,
        "p": p,
        "q": q,
        "convention": "2^{-2q} for 2^{2q}; |2qe log 2| and |2pe log 2| for the log factors",
        "cases": rows,
        "max_ratio": float(ratios.max()) if len(ratios) else 0.0,
        "mean_ratio": float(ratios.mean()) if len(ratios) else 0.0,
        "exceedances": int(np.sum(ratios > 1.0)),
        "status": "reported",
    }
