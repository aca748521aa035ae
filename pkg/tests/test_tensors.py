import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlcalc.errors import DegreeMismatch, DimMismatch
from mlcalc.tensors import (
    SymTensor,
    WeightProfile,
    contract,
    contract_vector,
    evaluate,
    inner,
    pair,
    partial_trace,
    sym_product,
    symmetrize,
    tensor_power,
    trace_power,
    trace_tensor,
    weighted_norm,
)


def dense_symmetrize(a):
    perms = list(itertools.permutations(range(a.ndim)))
    return sum(np.transpose(a, p) for p in perms) / len(perms)


def rand(rng, d, n, cplx=True):
    raw = rng.normal(size=(d,) * n)
    if cplx:
        raw = raw + 1j * rng.normal(size=(d,) * n)
    return symmetrize(raw) if n else SymTensor.scalar(complex(raw), d)


shapes = st.tuples(st.integers(1, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31 - 1))


@given(shapes)
@settings(max_examples=40, deadline=None)
def test_sym_product_matches_dense(case):
    d, na, nb, seed = case
    rng = np.random.default_rng(seed)
    a, b = rand(rng, d, na), rand(rng, d, nb)
    want = dense_symmetrize(np.multiply.outer(a.to_dense(), b.to_dense()))
    assert np.allclose(sym_product(a, b).to_dense(), want, atol=1e-12)


@given(shapes)
@settings(max_examples=40, deadline=None)
def test_contract_matches_dense(case):
    d, n, k, seed = case
    rng = np.random.default_rng(seed)
    a, b = rand(rng, d, n + k), rand(rng, d, k)
    want = np.tensordot(a.to_dense(), b.to_dense(), axes=k) if k else a.to_dense() * b.coeffs[0]
    assert np.allclose(contract(a, b).to_dense(), want, atol=1e-12)


@given(shapes)
@settings(max_examples=40, deadline=None)
def test_sym_product_commutes_and_pairs(case):
    d, na, nb, seed = case
    rng = np.random.default_rng(seed)
    a, b, c = rand(rng, d, na), rand(rng, d, nb), rand(rng, d, na + nb)
    assert sym_product(a, b).allclose(sym_product(b, a))
    # <a (x)^ b, c> = <a (x) b, c> since c is symmetric
    assert abs(pair(sym_product(a, b), c) - pair(a, contract(c, b))) < 1e-10


def test_sym_product_associative():
    rng = np.random.default_rng(3)
    a, b, c = rand(rng, 3, 2), rand(rng, 3, 1), rand(rng, 3, 2)
    assert sym_product(sym_product(a, b), c).allclose(sym_product(a, sym_product(b, c)))


def test_storage_is_one_entry_per_multiset():
    t = SymTensor(3, 4)
    assert len(t) == math.comb(3 + 4 - 1, 4)


def test_getitem_is_order_free():
    rng = np.random.default_rng(0)
    t = rand(rng, 3, 3)
    dense = t.to_dense()
    for idx in itertools.product(range(3), repeat=3):
        assert t[idx] == dense[idx]


def test_pair_equals_dense_sum():
    rng = np.random.default_rng(1)
    a, b = rand(rng, 3, 4), rand(rng, 3, 4)
    assert abs(pair(a, b) - np.sum(a.to_dense() * b.to_dense())) < 1e-12
    assert abs(inner(a, b) - np.sum(a.to_dense() * b.to_dense().conj())) < 1e-12


def test_trace_tensor_pairs_vectors():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=4), rng.normal(size=4)
    assert abs(pair(trace_tensor(4), sym_product(SymTensor.vector(x), SymTensor.vector(y))) - x @ y) < 1e-13


def test_trace_power_against_dense():
    d = 2
    tr = np.eye(d)
    want = dense_symmetrize(np.multiply.outer(tr, tr))
    assert np.allclose(trace_power(d, 2).to_dense(), want)
    # <sym(Tr^m), theta^2m> = <theta,theta>^m
    th = np.array([0.3, -1.2])
    assert abs(pair(trace_power(d, 3), tensor_power(th, 6)) - (th @ th) ** 3) < 1e-12


def test_partial_trace_and_vector_contraction():
    rng = np.random.default_rng(4)
    t = rand(rng, 3, 4)
    assert np.allclose(partial_trace(t).to_dense(), np.einsum("ijkk->ij", t.to_dense()))
    assert np.allclose(partial_trace(t, 2).to_dense(), np.einsum("iikk->", t.to_dense()))
    y = rng.normal(size=3)
    assert np.allclose(contract_vector(t, y, 2).to_dense(), np.einsum("ijkl,k,l->ij", t.to_dense(), y, y))


def test_evaluate_is_polynomial_value():
    rng = np.random.default_rng(5)
    t = rand(rng, 2, 3)
    pts = rng.normal(size=(7, 2))
    want = np.einsum("ijk,mi,mj,mk->m", t.to_dense(), pts, pts, pts)
    assert np.allclose(evaluate(t, pts), want)


def test_weighted_norm():
    t = SymTensor.vector([1.0, 1.0])
    assert weighted_norm(t, 0) == pytest.approx(math.sqrt(2))
    assert weighted_norm(t, 1) == pytest.approx(math.sqrt(1 + 4))
    assert weighted_norm(t, WeightProfile(-1)) == pytest.approx(math.sqrt(1 + 0.25))
    rng = np.random.default_rng(6)
    s = rand(rng, 3, 3)
    w = (np.arange(3) + 1.0) ** 2
    dense = np.abs(s.to_dense()) ** 2 * np.einsum("i,j,k->ijk", w, w, w)
    assert weighted_norm(s, 1) == pytest.approx(math.sqrt(dense.sum()))


def test_json_round_trip_is_bit_exact():
    rng = np.random.default_rng(7)
    for n in range(4):
        t = rand(rng, 3, n)
        t.coeffs[0] = -0.0 + 1e-300j
        back = SymTensor.from_json(json.loads(json.dumps(t.to_json())))
        assert back == t
        assert np.array_equal(np.signbit(back.coeffs.real), np.signbit(t.coeffs.real))


def test_json_schema():
    t = SymTensor.from_dict(2, 2, {(1, 0): 2.0})
    doc = t.to_json()
    assert doc["coeffs"]["0,1"] == [2.0, 0.0]
    assert set(doc) == {"dim", "degree", "coeffs"}


def test_errors():
    with pytest.raises(DimMismatch):
        SymTensor(2, 1) + SymTensor(3, 1)
    with pytest.raises(DegreeMismatch):
        SymTensor(2, 1) + SymTensor(2, 2)
    with pytest.raises(DegreeMismatch):
        contract(SymTensor(2, 1), SymTensor(2, 2))
    with pytest.raises(DegreeMismatch):
        symmetrize(np.zeros((2, 3)))
    with pytest.raises(DimMismatch):
        sym_product(SymTensor(2, 1), SymTensor(3, 1))
