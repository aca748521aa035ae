"""Verification suites that back the ``mlcalc verify`` command.

Each suite returns a list of check records
``{name, formula, status, lhs, rhs, tol, sigmas?}`` with status one of
"pass", "fail", "reported" or "underpowered".
"""
from __future__ import annotations

import json
import math
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import eval_hermitenorm, gamma

from . import appell as A
from . import mc
from . import operators as O
from . import transforms as T
from .special import MLParams, mittag_leffler
from .tensors import SymTensor, pair, sym_product, symmetrize, tensor_power

SUITES = ("appell", "transforms", "operators", "mc", "bounds")
MIN_MC_SAMPLES = 1000
MC_SIGMAS = 4.0


def _num(v):
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return v.real if v.imag == 0 else [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def check(name, formula, lhs, rhs, tol, status=None, **extra) -> dict:
    """Record |lhs - rhs| <= tol, or carry an explicit status."""
    if status is None:
        status = "pass" if abs(complex(lhs) - complex(rhs)) <= tol else "fail"
    rec = {"name": name, "formula": formula, "status": status, "lhs": _num(lhs), "rhs": _num(rhs), "tol": tol}
    rec.update({k: _num(v) for k, v in extra.items()})
    return rec


def mc_check(name, formula, est: mc.MCEstimate, analytic, sigmas=MC_SIGMAS) -> dict:
    s = est.sigmas(analytic)
    return check(
        name, formula, est.value, analytic, sigmas * est.std_error,
        status="pass" if s <= sigmas else "fail", sigmas=s, std_error=est.std_error,
    )


def _rand_sym(rng, d, n):
    if n == 0:
        return SymTensor.scalar(rng.normal(), d)
    return symmetrize(rng.normal(size=(d,) * n))


def appell_suite(params: MLParams, dim: int, trunc: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    coeffs = A.appell_coeffs(params, 20)
    out.append(check("b_recursion", "b_n + sum_{k=1}^n b_{n-k}/Gamma(beta k+1) = 0, n <= 20",
                     float(coeffs.residuals().max()), 0.0, 1e-12))
    if params.beta == 1.0:
        ref = np.array([(-1) ** n / math.factorial(n) for n in range(21)])
        out.append(check("b_gaussian", "b_n = (-1)^n/n! at beta = 1",
                         float(np.abs(coeffs.b - ref).max()), 0.0, 1e-15))
    worst = 0.0
    for _ in range(10):
        x, y = rng.normal(size=dim), rng.normal(size=dim)
        for n in range(6):
            rhs = SymTensor(dim, n)
            for k in range(n + 1):
                rhs = rhs + sym_product(A.appell_kernel(params, x, k), tensor_power(y, n - k)) * math.comb(n, k)
            worst = max(worst, (A.appell_kernel(params, x + y, n) - rhs).max_abs())
    out.append(check("shift_identity", "P_n(x+y) = sum C(n,k) P_k(x) (x)^ y^(n-k)", worst, 0.0, 1e-9))
    v = A.ChaosVector(params, dim, "test", [_rand_sym(rng, dim, n) for n in range(trunc + 1)])
    back = A.monomial_to_p(A.p_to_monomial(v))
    out.append(check("basis_roundtrip", "monomial_to_p(p_to_monomial(phi)) = phi",
                     max((back.kernels[n] - v.kernels[n]).max_abs() for n in range(trunc + 1)), 0.0, 1e-10))
    worst = 0.0
    for n in range(4):
        for m in range(4):
            G, th = _rand_sym(rng, dim, n), _rand_sym(rng, dim, m)
            got = A.dual_pair(A.q_vector(params, G), A.appell_function(params, th))
            want = math.factorial(n) * pair(G, th) if n == m else 0.0
            worst = max(worst, abs(got - want))
    out.append(check("biorthogonality", "<<Q_n(G), <P_m, theta>>> = delta_nm n! <G, theta>", worst, 0.0, 1e-10))
    one = A.ChaosVector.constant(params, dim)
    worst = max(abs(A.l2_pairing(A.appell_function(params, _rand_sym(rng, dim, m)), one)) for m in range(1, 7))
    out.append(check("zero_mean", "E <P_m(w), phi> = 0 for m >= 1", worst, 0.0, 1e-10))
    if params.beta == 1.0 and dim == 1:
        worst = 0.0
        for n in range(9):
            for w in (-2.0, 0.0, 2.0):
                got = A.appell_kernel(params, [w], n).coeffs[0]
                worst = max(worst, abs(got - eval_hermitenorm(n, w)))
        out.append(check("hermite_limit", "P_n(w) = He_n(w) at beta = 1, d = 1", worst, 0.0, 1e-10))
        quartic = A.ChaosVector.single(params, SymTensor(1, 4, [1.0]), basis="monomial")
        coeffs = [k.coeffs[0] for k in A.monomial_to_p(quartic).kernels]
        out.append(check("hermite_expansion", "w^4 = He_4 + 6 He_2 + 3",
                         max(abs(c - r) for c, r in zip(coeffs, [3, 0, 6, 0, 1])), 0.0, 1e-12))
    return out


def transforms_suite(params: MLParams, dim: int, trunc: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for n in range(5):
        G = _rand_sym(rng, dim, n)
        xi = rng.normal(size=dim) * 0.2
        worst = max(worst, abs(T.s_transform(A.q_vector(params, G), xi) - pair(G, tensor_power(xi, n))))
    out.append(check("s_transform_dual_basis", "S Q_n(G)(xi) = <G, xi^n>", worst, 0.0, 1e-12))
    phi = rng.normal(size=dim) * 0.3
    one = A.ChaosVector.constant(params, dim, role="dist")
    out.append(check("t_transform_constant", "T 1(phi) = E_beta(-<phi,phi>/2)",
                     T.t_transform(one, phi), T.characteristic_function(params, phi), 1e-14))
    xi, eta = rng.normal(size=dim) * 0.2, rng.normal(size=dim) * 0.2
    out.append(check("exp_pairing_symmetry", "I(xi, eta) = I(eta, xi)",
                     T.exp_pairing(params, xi, eta), T.exp_pairing(params, eta, xi), 1e-14))
    out.append(check("exp_pairing_unit", "I(xi, 0) = 1", T.exp_pairing(params, xi, np.zeros(dim)), 1.0, 1e-14))
    ev = T.exp_vector(params, xi, 20)
    pts = rng.uniform(-1, 1, size=(20, dim))
    out.append(check("exp_vector_pointwise", "sum <P_n(w), xi^n>/n! = e^{<w,xi>}/E_beta(<xi,xi>/2)",
                     float(np.abs(A.evaluate(ev.body, pts) - ev.exact(pts)).max()), 0.0,
                     1e-8 + ev.tail_bound(float(np.linalg.norm(pts, axis=1).max()))))
    bodies = T.exp_vector(params, xi, 16).body, T.exp_vector(params, eta, 16).body
    out.append(check("exp_pairing_l2", "E[e(w;xi) e(w;eta)] = I(xi, eta)",
                     A.l2_bilinear(*bodies), T.exp_pairing(params, xi, eta), 1e-8))
    return out


def _baseline_path() -> Path:
    override = os.environ.get("MLCALC_DATA_DIR")
    if override:
        return Path(override) / "mehler_baseline.json"
    return Path(str(resources.files("mlcalc") / "data" / "mehler_baseline.json"))


@lru_cache(maxsize=4)
def _load_baseline(path: str):
    p = Path(path)
    if not p.exists():
        return None
    return json.loads(p.read_text())


def mehler_baseline(beta: float, t: float, s: float, xi_norm: float) -> float | None:
    """Stored high-precision defect for (beta, t, s, |xi|), or None."""
    data = _load_baseline(str(_baseline_path()))
    if data is None:
        return None
    for row in data["rows"]:
        if all(abs(row[k] - v) < 1e-12 for k, v in (("beta", beta), ("t", t), ("s", s), ("xi_norm", xi_norm))):
            return float(row["defect"])
    return None


def operators_suite(params: MLParams, dim: int, trunc: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    phi = A.ChaosVector(params, dim, "test", [_rand_sym(rng, dim, n) for n in range(7)])
    y = rng.normal(size=dim) * 0.5
    diff = O.exp_gateaux(y, phi, 6) - O.translate(y, phi)
    out.append(check("translation_is_exp_gateaux", "tau_y = exp(D_y) on polynomials", diff.max_abs(), 0.0, 1e-10))
    theta, eta = rng.normal(size=dim) * 0.2, rng.normal(size=dim) * 0.2
    ev = T.exp_vector(params, theta, 20)
    pts = rng.uniform(-1, 1, size=(10, dim))
    lhs = A.evaluate(O.translate(eta, ev.body), pts)
    rhs = np.exp(T.bilinear(eta, theta)) * A.evaluate(ev.body, pts)
    tol = 1e-8 + 2 * ev.tail_bound(float(np.linalg.norm(pts, axis=1).max() + np.linalg.norm(eta)))
    out.append(check("translation_of_exponential", "tau_eta e(.;theta) = e^{<eta,theta>} e(.;theta)",
                     float(np.abs(lhs - rhs).max()), 0.0, tol))
    psi = rng.normal(size=dim)
    Amat = rng.normal(size=(dim, dim))
    gat = O.Gateaux(params, dim, psi)
    x11 = O.IntegralKernel(params, dim, 1, 1, O.matrix_kernel(Amat))
    worst_g = worst_x = worst_ab = 0.0
    for _ in range(5):
        xi, et = rng.normal(size=dim) * 0.15, rng.normal(size=dim) * 0.15
        I = T.exp_pairing(params, xi, et)
        worst_g = max(worst_g, abs(O.symbol(gat, xi, et) - np.dot(psi, xi) * I))
        worst_x = max(worst_x, abs(O.symbol(x11, xi, et) - xi @ Amat @ et * I))
        worst_ab = max(worst_ab, abs(O.symbol(x11, xi, et, path="a") - O.symbol(x11, xi, et, path="b")))
    out.append(check("symbol_gateaux", "symbol(D_psi)(xi,eta) = <psi,xi> I(xi,eta)", worst_g, 0.0, 1e-8))
    out.append(check("symbol_matrix_kernel", "symbol(Xi_11(A))(xi,eta) = <xi,A eta> I(xi,eta)", worst_x, 0.0, 1e-8))
    out.append(check("symbol_two_paths", "<<Xi e(xi), e(eta)>> = S(Xi e(xi))(eta)", worst_ab, 0.0, 1e-8))
    xi1 = np.ones(1)
    d = O.mehler_semigroup_defect(params, 0.5, 0.5, xi1)
    if params.beta == 1.0:
        out.append(check("mehler_semigroup", "P_s P_t = P_{t+s} at beta = 1", d, 0.0, 1e-12))
    else:
        base = mehler_baseline(params.beta, 0.5, 0.5, 1.0)
        if base is None:
            out.append(check("mehler_defect", "|P_s P_t - P_{t+s}| on e^{i<.,xi>}", d, float("nan"), 0.0, status="reported"))
        else:
            out.append(check("mehler_defect_baseline", "|P_s P_t - P_{t+s}| on e^{i<.,xi>} vs stored series value", d, base, 1e-9))
    gap = O.translation_multiplication_gap(params, np.full(dim, 0.5 / math.sqrt(dim)), np.full(dim, 0.5 / math.sqrt(dim)))
    status = None if params.beta == 1.0 else "reported"
    out.append(check("translation_vs_multiplication", "C(xi)/C(xi - i eta) = e^{-i<eta,xi>}/E_beta(<eta,eta>/2)",
                     gap["lhs"], gap["rhs"], 1e-10, status=status, gap=gap["gap"]))
    return out


def mc_suite(params: MLParams, dim: int, samples: int, seed: int, threads=None) -> list:
    if samples < MIN_MC_SAMPLES:
        return [check("mc_sample_size", f"n >= {MIN_MC_SAMPLES}", samples, MIN_MC_SAMPLES, 0, status="underpowered")]
    rng = np.random.default_rng(seed + 1)
    batch = mc.sample_measure(params, dim, samples, seed, threads)
    b = params.beta
    out = []
    phi = rng.normal(size=dim)
    ip = float(phi @ phi)
    out.append(mc_check("second_moment", "E<w,phi>^2 = <phi,phi>/Gamma(beta+1)", mc.mc_moment(batch, phi, 2), ip / gamma(b + 1)))
    out.append(mc_check("fourth_moment", "E<w,phi>^4 = 6<phi,phi>^2/Gamma(2beta+1)", mc.mc_moment(batch, phi, 4), 6 * ip**2 / gamma(2 * b + 1)))
    out.append(mc_check("odd_moment", "E<w,phi>^3 = 0", mc.mc_moment(batch, phi, 3), 0.0))
    for i in range(3):
        f = rng.normal(size=dim) * rng.uniform(0.2, 1.0)
        out.append(mc_check(f"characteristic_{i}", "E e^{i<w,phi>} = E_beta(-<phi,phi>/2)",
                            mc.mc_characteristic(batch, f), T.characteristic_function(params, f)))
    if b < 1:
        for s in (0.5, 1.0, 2.0):
            out.append(mc_check(f"laplace_{s}", "E e^{-s tau} = E_beta(-s)", mc.mc_laplace(batch.taus, s), mittag_leffler(params, -s)))
    xi = np.full(dim, 0.3 / math.sqrt(dim))
    ev = T.exp_vector(params, xi, 16)
    est = mc.mc_pair(batch, ev.exact, ev.exact, conjugate=False)
    out.append(mc_check("exp_pairing", "E[e(w;xi)^2] = I(xi,xi)", est, T.exp_pairing(params, xi, xi)))
    return out


def bounds_suite(params: MLParams, dim: int, seed: int, cases: int = 100) -> list:
    out = []
    for kind, formula in (
        ("translation", "||tau_y phi||_p <= ||phi||_{p+q}(1-2^{-2q})^{-1/2} exp(|y|^2/(2(1-2^{-2q})))"),
        ("gateaux", "||D_y phi||_p <= (2^{-2q}/|2qe log 2|)^{1/2} |y| ||phi||_{p+q}"),
        ("integral_kernel", "||Xi phi||_{-p} <= 2^{-p}(l^l m^m)^{1/2}(2^{-p}/|2pe log 2|)^{(l+m)/2}|kappa| ||phi||_p"),
    ):
        rep = O.norm_bound_report(kind, params, dim, cases=cases, seed=seed)
        out.append(check(f"bound_{kind}", formula, rep["max_ratio"], 1.0, 0.0, status="reported",
                         mean_ratio=rep["mean_ratio"], exceedances=rep["exceedances"], cases=cases))
    return out


def run_suite(suite: str, params: MLParams, dim: int = 2, trunc: int = 8, seed: int = 0, samples: int = 100_000, threads=None) -> list:
    if suite == "all":
        return [c for s in SUITES for c in run_suite(s, params, dim, trunc, seed, samples, threads)]
    if suite == "appell":
        return appell_suite(params, dim, trunc, seed)
    if suite == "transforms":
        return transforms_suite(params, dim, trunc, seed)
    if suite == "operators":
        return operators_suite(params, dim, trunc, seed)
    if suite == "mc":
        return mc_suite(params, dim, samples, seed, threads)
    if suite == "bounds":
        return bounds_suite(params, dim, seed)
    raise ValueError(f"unknown suite {suite!r}")
