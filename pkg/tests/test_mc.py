import io
import math

import numpy as np
import pytest
from scipy.special import gamma

from mlcalc import appell as A
from mlcalc import mc
from mlcalc import operators as O
from mlcalc import transforms as T
from mlcalc.errors import BetaOutOfRange
from mlcalc.special import MLParams, mittag_leffler
from mlcalc.tensors import SymTensor, symmetrize

N = 200_000
SIG = 4.0


@pytest.fixture(scope="module", params=[0.5, 0.75, 1.0])
def batch(request):
    return mc.sample_measure(MLParams(request.param), 3, N, seed=11)


def test_reproducible_and_thread_independent():
    p = MLParams(0.6)
    a = mc.sample_measure(p, 2, 3 * mc.BLOCK + 17, seed=5, threads=1)
    b = mc.sample_measure(p, 2, 3 * mc.BLOCK + 17, seed=5, threads=4)
    assert np.array_equal(a.omegas, b.omegas) and np.array_equal(a.taus, b.taus)
    c = mc.sample_measure(p, 2, 3 * mc.BLOCK + 17, seed=6)
    assert not np.array_equal(a.taus, c.taus)


def test_prefix_stable():
    p = MLParams(0.3)
    small = mc.sample_measure(p, 2, 1000, seed=9)
    big = mc.sample_measure(p, 2, mc.BLOCK + 500, seed=9)
    assert np.array_equal(small.omegas, big.omegas[:1000])


def test_beta_one_is_gaussian():
    assert np.all(mc.sample_subordinator(1.0, 10, 0) == 1.0)
    with pytest.raises(BetaOutOfRange):
        mc.sample_subordinator(1.0, 10, 0, strict=True)
    with pytest.raises(BetaOutOfRange):
        mc.sample_subordinator(1.2, 10, 0)
    assert len(mc.sample_subordinator(0.5, 0, 0)) == 0


def test_moments(batch):
    phi = np.array([0.6, -0.2, 0.5])
    q = phi @ phi
    beta = batch.beta
    for n in (1, 2):
        want = math.factorial(2 * n) / (2**n * gamma(beta * n + 1)) * q**n
        assert mc.mc_moment(batch, phi, 2 * n).sigmas(want) < SIG


def test_characteristic_function(batch):
    rng = np.random.default_rng(0)
    p = MLParams(batch.beta)
    for _ in range(5):
        phi = rng.normal(size=3)
        want = mittag_leffler(p, -0.5 * phi @ phi)
        assert mc.mc_characteristic(batch, phi).sigmas(want) < SIG


def test_covariance(batch):
    phi, psi = np.array([1.0, 0.5, 0.0]), np.array([0.2, -1.0, 0.3])
    assert mc.mc_covariance_pair(batch, phi, psi).sigmas((phi @ psi) / gamma(batch.beta + 1)) < SIG


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_subordinator_laplace_and_mean(beta):
    taus = mc.sample_subordinator(beta, N, seed=3)
    p = MLParams(beta)
    for s in (0.5, 1.0, 2.0, 5.0, 10.0):
        assert mc.mc_laplace(taus, s).sigmas(mittag_leffler(p, -s)) < SIG
    assert mc.estimate(taus).sigmas(1 / gamma(1 + beta)) < SIG


@pytest.mark.parametrize("beta", [0.3, 0.6, 0.85])
def test_density_histogram(beta):
    taus = mc.sample_subordinator(beta, N, seed=4)
    assert mc.density_check(MLParams(beta), taus)["max_sigmas"] < 5.0


def test_mc_pair_against_l2(batch):
    p = MLParams(batch.beta)
    rng = np.random.default_rng(1)
    f = A.ChaosVector(p, 3, "test", [SymTensor.scalar(0.3, 3), SymTensor.vector(rng.normal(size=3)), symmetrize(rng.normal(size=(3, 3))) / 2])
    g = A.ChaosVector(p, 3, "test", [SymTensor.scalar(-1.0, 3), SymTensor.vector(rng.normal(size=3) * (1 + 1j))])
    est = mc.mc_pair(batch, f, g)
    assert est.sigmas(A.l2_pairing(f, g)) < SIG
    one = A.ChaosVector.constant(p, 3)
    for n in (1, 2):
        th = symmetrize(rng.normal(size=(3,) * n))
        assert mc.mc_pair(batch, A.appell_function(p, th), one).sigmas(0.0) < SIG


def test_mc_exp_pairing(batch):
    p = MLParams(batch.beta)
    xi, eta = np.array([0.2, 0.1, -0.1]), np.array([-0.1, 0.2, 0.1])
    est = mc.mc_pair(batch, T.exp_vector(p, xi, 20).exact, T.exp_vector(p, eta, 20).exact, conjugate=False)
    assert est.sigmas(T.exp_pairing(p, xi, eta)) < SIG


def test_mc_mehler(batch):
    p = MLParams(batch.beta)
    y, xi = np.array([0.5, -1.0, 0.2]), np.array([0.7, 0.3, -0.4])
    for t in (0.1, 1.0):
        assert mc.mc_mehler(batch, t, y, xi).sigmas(O.mehler_exp(p, t, y, xi)) < SIG


def test_estimate_and_schema():
    e = mc.estimate(np.array([1.0, 3.0]))
    assert e.value == 2.0 and e.std_error == pytest.approx(1.0)
    assert mc.MCEstimate(1.0, 0.0, 5).sigmas(1.0) == 0.0
    assert mc.MCEstimate(1.0, 0.0, 5).sigmas(2.0) == math.inf
    doc = e.to_json(2.5)
    assert doc["sigmas"] == pytest.approx(0.5) and doc["count"] == 2
    with pytest.raises(ValueError):
        mc.estimate(np.array([1.0]))


def test_export(tmp_path):
    b = mc.sample_measure(MLParams(0.5), 2, 10, seed=2)
    buf = io.StringIO()
    b.to_csv(buf)
    rows = buf.getvalue().strip().splitlines()
    assert rows[0] == "tau,omega_0,omega_1" and len(rows) == 11
    assert float(rows[1].split(",")[1]) == b.omegas[0, 0]
    path = tmp_path / "b.npz"
    b.save_npz(path)
    back = mc.SampleBatch.load_npz(path)
    assert np.array_equal(back.omegas, b.omegas) and back.beta == 0.5 and back.seed == 2
