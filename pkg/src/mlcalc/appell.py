"""Appell polynomials, moment kernels and chaos expansions for the Mittag-Leffler measure.

A :class:`ChaosVector` with ``role="test"`` and ``basis="appell"`` represents
phi(w) = sum_n <P_n(w), phi^(n)>.  With ``basis="monomial"`` it represents
sum_n <w^{(x)n}, phi^(n)>.  With ``role="dist"`` the kernels are the
coefficients of the dual Appell system, Phi = sum_n Q_n(Phi^(n)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import rgamma

from .errors import BasisMismatch, BetaMismatch, DegreeMismatch, DegreeOverflow, DimMismatch
from .special import MLParams
from .tensors import (
    SymTensor,
    contract,
    evaluate as evaluate_tensor,
    pair,
    partial_trace,
    sym_product,
    tensor_power,
    trace_power,
    weighted_norm,
)

# largest combined degree m+n accepted by the analytic L2 pairing
MAX_MOMENT_DEGREE = 96

ROLES = ("test", "dist")
BASES = ("appell", "monomial")


@dataclass
class ChaosVector:
    params: MLParams
    dim: int
    role: str = "test"
    kernels: list = field(default_factory=list)
    basis: str = "appell"

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}")
        if self.role == "dist" and self.basis != "appell":
            raise BasisMismatch("distributions are stored in the dual Appell basis only")
        kernels = []
        for n, k in enumerate(self.kernels):
            if not isinstance(k, SymTensor):
                if n:
                    raise TypeError("kernels of positive degree must be SymTensor")
                k = SymTensor.scalar(k, self.dim)
            if k.degree != n:
                raise DegreeMismatch(f"kernel {n} has degree {k.degree}")
            if k.dim != self.dim:
                raise DimMismatch(f"kernel {n} has dim {k.dim}, expected {self.dim}")
            kernels.append(k)
        if not kernels:
            kernels = [SymTensor(self.dim, 0)]
        self.kernels = kernels

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def degree(self) -> int:
        return len(self.kernels) - 1

    @classmethod
    def constant(cls, params, dim, value=1.0, role="test", basis="appell"):
        return cls(params, dim, role, [SymTensor.scalar(value, dim)], basis)

    @classmethod
    def single(cls, params, kernel: SymTensor, role="test", basis="appell"):
        """Vector with one nonzero kernel, e.g. <P_n, theta> or Q_n(G)."""
        kernels = [SymTensor(kernel.dim, n) for n in range(kernel.degree)] + [kernel]
        return cls(params, kernel.dim, role, kernels, basis)

    def _like(self, kernels, **kw):
        args = dict(params=self.params, dim=self.dim, role=self.role, basis=self.basis)
        args.update(kw)
        return ChaosVector(kernels=kernels, **args)

    def kernel(self, n: int) -> SymTensor:
        if n < len(self.kernels):
            return self.kernels[n]
        return SymTensor(self.dim, n)

    def padded(self, degree: int) -> "ChaosVector":
        return self._like([self.kernel(n) for n in range(max(degree, self.degree) + 1)])

    def truncated(self, degree: int) -> "ChaosVector":
        return self._like([self.kernel(n) for n in range(degree + 1)])

    def compatible(self, other: "ChaosVector"):
        if self.dim != other.dim:
            raise DimMismatch(f"dimensions {self.dim} and {other.dim} differ")
        if self.params.beta != other.params.beta:
            raise BetaMismatch(f"beta {self.params.beta} and {other.params.beta} differ")

    def __add__(self, other):
        self.compatible(other)
        if (self.role, self.basis) != (other.role, other.basis):
            raise BasisMismatch("cannot add vectors of different role or basis")
        top = max(self.degree, other.degree)
        return self._like([self.kernel(n) + other.kernel(n) for n in range(top + 1)])

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        return self._like([k * c for k in self.kernels])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def allclose(self, other, atol=1e-12) -> bool:
        self.compatible(other)
        top = max(self.degree, other.degree)
        return all(self.kernel(n).allclose(other.kernel(n), atol) for n in range(top + 1))

    def max_abs(self) -> float:
        return max(k.max_abs() for k in self.kernels)

    def to_json(self) -> dict:
        return {
            "beta": self.params.beta,
            "dim": self.dim,
            "role": self.role,
            "basis": self.basis,
            "kernels": [k.to_json() for k in self.kernels],
        }

    @classmethod
    def from_json(cls, data: dict, params: MLParams | None = None):
        params = params or MLParams(float(data["beta"]))
        if params.beta != float(data["beta"]):
            raise BetaMismatch("params disagree with the stored beta")
        kernels = [SymTensor.from_json(k) for k in data["kernels"]]
        return cls(params, int(data["dim"]), data["role"], kernels, data.get("basis", "appell"))


@dataclass(frozen=True)
class AppellCoeffs:
    beta: float
    b: np.ndarray

    def residuals(self) -> np.ndarray:
        """|b_n + sum_{k=1}^n b_{n-k}/Gamma(beta k + 1)| for n >= 1."""
        g = rgamma(self.beta * np.arange(len(self.b)) + 1.0)
        return np.array([abs(np.dot(self.b[: n + 1][::-1], g[: n + 1])) for n in range(1, len(self.b))])


@lru_cache(maxsize=64)
def _b_table(beta: float, N: int) -> np.ndarray:
    g = rgamma(beta * np.arange(N + 1) + 1.0)
    b = np.zeros(N + 1)
    b[0] = 1.0
    for n in range(1, N + 1):
        b[n] = -np.dot(b[n - 1 :: -1], g[1 : n + 1])
    b.setflags(write=False)
    return b


def appell_coeffs(params: MLParams, N: int) -> AppellCoeffs:
    """Coefficients b_n of 1/E_beta, from b_0 = 1 and the Cauchy-product recursion."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return AppellCoeffs(params.beta, _b_table(params.beta, N))


def moment_coefficient(beta: float, m: int) -> float:
    """(2m)! / (2^m Gamma(beta m + 1)), the weight of sym(Tr^m) in M_{2m}."""
    return math.factorial(2 * m) / 2.0**m * float(rgamma(beta * m + 1.0))


def _appell_zero_coefficient(beta: float, k: int) -> float:
    """b_k (2k)!/2^k, the weight of sym(Tr^k) in P_{2k}(0)."""
    return float(_b_table(beta, k)[k]) * math.factorial(2 * k) / 2.0**k


def moment_kernel(params: MLParams, n: int, d: int) -> SymTensor:
    """M_n with <M_n, theta^n> = E <w, theta>^n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n % 2:
        return SymTensor(d, n)
    return trace_power(d, n // 2) * moment_coefficient(params.beta, n // 2)


def appell_at_zero(params: MLParams, d: int, n: int) -> SymTensor:
    if n % 2:
        return SymTensor(d, n)
    return trace_power(d, n // 2) * _appell_zero_coefficient(params.beta, n // 2)


def appell_kernel(params: MLParams, omega, n: int) -> SymTensor:
    """P_n(omega) = sum_k b_k n!/(2^k (n-2k)!) sym(Tr^k (x) omega^(n-2k))."""
    omega = np.asarray(omega).ravel()
    d = len(omega)
    b = _b_table(params.beta, n // 2)
    out = SymTensor(d, n)
    for k in range(n // 2 + 1):
        c = b[k] * math.factorial(n) / (2.0**k * math.factorial(n - 2 * k))
        out = out + sym_product(trace_power(d, k), tensor_power(omega, n - 2 * k)) * c
    return out


def appell_function(params: MLParams, theta: SymTensor) -> ChaosVector:
    """Test function w -> <P_n(w), theta>."""
    return ChaosVector.single(params, theta, "test", "appell")


def q_vector(params: MLParams, G: SymTensor) -> ChaosVector:
    """Distribution Q_n(G)."""
    return ChaosVector.single(params, G, "dist", "appell")


def _require(v: ChaosVector, role: str, basis: str | None = None):
    if v.role != role:
        raise BasisMismatch(f"expected role {role!r}, got {v.role!r}")
    if basis is not None and v.basis != basis:
        raise BasisMismatch(f"expected basis {basis!r}, got {v.basis!r}")


def p_to_monomial(v: ChaosVector) -> ChaosVector:
    """Rewrite sum <P_n, phi^(n)> as sum <w^k, psi^(k)>."""
    _require(v, "test")
    if v.basis == "monomial":
        return v
    return v._like(_change_basis(v, lambda j: _appell_zero_coefficient(v.beta, j)), basis="monomial")


def monomial_to_p(v: ChaosVector) -> ChaosVector:
    """Inverse of :func:`p_to_monomial`."""
    _require(v, "test")
    if v.basis == "appell":
        return v
    return v._like(_change_basis(v, lambda j: moment_coefficient(v.beta, j)), basis="appell")


def _change_basis(v: ChaosVector, weight) -> list:
    # new^(k) = sum_{n-k even} C(n,k) weight((n-k)/2) tr^{(n-k)/2} old^(n)
    N = v.degree
    out = [SymTensor(v.dim, k) for k in range(N + 1)]
    for n, ker in enumerate(v.kernels):
        t = ker
        for j in range(n // 2 + 1):
            k = n - 2 * j
            if j:
                t = partial_trace(t)
            out[k] = out[k] + t * (math.comb(n, k) * weight(j))
    return out


def dual_pair(Phi: ChaosVector, phi: ChaosVector) -> complex:
    """<<Phi, phi>> = sum_n n! <Phi^(n), phi^(n)>, bilinear."""
    Phi.compatible(phi)
    _require(Phi, "dist")
    _require(phi, "test", "appell")
    top = min(Phi.degree, phi.degree)
    return sum(math.factorial(n) * pair(Phi.kernels[n], phi.kernels[n]) for n in range(top + 1))


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * _double_factorial(n - 2)


@dataclass
class _Prepared:
    """Monomial kernels with all their iterated partial traces."""

    beta: float
    dim: int
    traces: list  # traces[m][j] = tr^j(psi^(m))


def _prepare(v: ChaosVector) -> _Prepared:
    _require(v, "test")
    mono = p_to_monomial(v)
    traces = []
    for ker in mono.kernels:
        stack = [ker]
        for _ in range(ker.degree // 2):
            stack.append(partial_trace(stack[-1]))
        traces.append(stack)
    return _Prepared(v.beta, v.dim, traces)


def _gauss_weight(m: int, n: int, r: int) -> float:
    # pairings of m+n slots with exactly r cross links
    return (
        math.comb(m, r)
        * math.comb(n, r)
        * math.factorial(r)
        * _double_factorial(m - r - 1)
        * _double_factorial(n - r - 1)
    )


def _l2_prepared(a: _Prepared, b: _Prepared) -> complex:
    total = 0j
    for m, ta in enumerate(a.traces):
        for n, tb in enumerate(b.traces):
            if (m + n) % 2:
                continue
            if m + n > MAX_MOMENT_DEGREE:
                raise DegreeOverflow(f"combined degree {m + n} exceeds {MAX_MOMENT_DEGREE}")
            J = (m + n) // 2
            ej = math.factorial(J) * float(rgamma(a.beta * J + 1.0))
            acc = 0j
            for r in range(m % 2, min(m, n) + 1, 2):
                acc += _gauss_weight(m, n, r) * pair(ta[(m - r) // 2], tb[(n - r) // 2])
            total += ej * acc
    return total


def l2_bilinear(f: ChaosVector, g: ChaosVector) -> complex:
    """E[f g] without conjugation."""
    f.compatible(g)
    return _l2_prepared(_prepare(f), _prepare(g))


def l2_pairing(f: ChaosVector, g: ChaosVector, conjugate: bool = True) -> complex:
    """E[f conj(g)] under the Mittag-Leffler measure, exact for truncated expansions.

    Uses the mixture representation w = sqrt(tau) g: the Gaussian part is a
    Wick sum and E[tau^J] = J!/Gamma(beta J + 1).
    """
    if conjugate:
        g = g._like([k.conj() for k in g.kernels])
    return l2_bilinear(f, g)


def l2_pairing_dense(f: ChaosVector, g: ChaosVector, conjugate: bool = True) -> complex:
    """Reference form sum <M_{m+n}, a_m (x)^ b_n>; slow, for small degrees."""
    f.compatible(g)
    a, b = p_to_monomial(f), p_to_monomial(g)
    total = 0j
    for am in a.kernels:
        for bn in b.kernels:
            bn = bn.conj() if conjugate else bn
            M = moment_kernel(f.params, am.degree + bn.degree, f.dim)
            total += pair(M, sym_product(am, bn))
    return total


def moment_tensor(v: ChaosVector, r: int) -> SymTensor:
    """E[v(w) w^{(x) r}] as a degree-r tensor."""
    mono = p_to_monomial(v)
    out = SymTensor(v.dim, r)
    for a in mono.kernels:
        if (a.degree + r) % 2:
            continue
        out = out + contract(moment_kernel(v.params, a.degree + r, v.dim), a)
    return out


def to_distribution(F: ChaosVector, N: int) -> ChaosVector:
    """Dual-Appell kernels F^(n) = E[F P_n]/n! of a test function, n <= N."""
    _require(F, "test")
    d = F.dim
    T = [moment_tensor(F, r) for r in range(N + 1)]
    b = _b_table(F.beta, N // 2)
    kernels = []
    for n in range(N + 1):
        acc = SymTensor(d, n)
        for k in range(n // 2 + 1):
            c = b[k] / (2.0**k * math.factorial(n - 2 * k))
            acc = acc + sym_product(trace_power(d, k), T[n - 2 * k]) * c
        kernels.append(acc)
    return ChaosVector(F.params, d, "dist", kernels)


def evaluate(v: ChaosVector, points) -> np.ndarray:
    """Pointwise values of a test function at the rows of ``points``.

    Appell kernels are expanded through the explicit P_n formula, grouped
    by the degree of the traced kernel, and each degree is evaluated once.
    """
    _require(v, "test")
    pts = np.atleast_2d(np.asarray(points))
    if v.basis == "monomial":
        by_degree = list(v.kernels)
    else:
        # group the P_n terms by the degree of the traced kernel, then evaluate once per degree
        by_degree = [SymTensor(v.dim, j) for j in range(v.degree + 1)]
        for n, ker in enumerate(v.kernels):
            if not np.any(ker.coeffs):
                continue
            b = _b_table(v.beta, n // 2)
            t = ker
            for k in range(n // 2 + 1):
                if k:
                    t = partial_trace(t)
                c = b[k] * math.factorial(n) / (2.0**k * math.factorial(n - 2 * k))
                by_degree[n - 2 * k] = by_degree[n - 2 * k] + t * c
    out = np.zeros(pts.shape[0], dtype=complex)
    for ker in by_degree:
        if np.any(ker.coeffs):
            out += evaluate_tensor(ker, pts)
    return out


def testfn_norm(v: ChaosVector, p: float, q: float) -> float:
    """||phi||_{p,q} = (sum (n!)^2 2^{nq} |phi^(n)|_p^2)^{1/2} on Appell kernels."""
    _require(v, "test", "appell")
    return math.sqrt(
        sum(
            (math.factorial(n) ** 2) * 2.0 ** (n * q) * weighted_norm(k, p) ** 2
            for n, k in enumerate(v.kernels)
        )
    )


def dist_norm(v: ChaosVector, p: float, q: float) -> float:
    """||Phi||_{-p,-q} = (sum 2^{-nq} |Phi^(n)|_{-p}^2)^{1/2}."""
    _require(v, "dist")
    return math.sqrt(sum(2.0 ** (-n * q) * weighted_norm(k, -p) ** 2 for n, k in enumerate(v.kernels)))


def appell_growth_report(params: MLParams, dim: int, n_max: int, eps: float, p: float, samples: int = 50, seed: int = 0):
    """Smallest C with |P_n(w)|_{-p} <= C n! eps^{-n} exp(eps |w|_{-p}) over random w."""
    rng = np.random.default_rng(seed)
    weights = (np.arange(dim) + 1.0) ** (-p)
    worst = 0.0
    rows = []
    for _ in range(samples):
        w = rng.normal(size=dim) * rng.uniform(0.1, 4.0)
        wn = float(np.linalg.norm(w * weights))
        for n in range(n_max + 1):
            lhs = weighted_norm(appell_kernel(params, w, n), -p)
            c = lhs * eps**n / (math.factorial(n) * math.exp(eps * wn))
            worst = max(worst, c)
            rows.append({"n": n, "omega_norm": wn, "lhs": lhs, "C": c})
    return {"eps": eps, "p": p, "fitted_C": worst, "rows": rows, "status": "reported"}
