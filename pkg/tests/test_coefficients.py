import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from ksplap.coefficients import (
    A_of,
    CoefficientKind,
    CoefficientSet,
    a_of,
    f_of,
    g_of,
    uf_of,
)
from ksplap.errors import ConfigurationError

LINEAR = CoefficientSet(kind="linear_verification", chi=0.0)


def cs(**kw):
    return CoefficientSet(**kw)


def test_a_examples():
    assert a_of(0.0, cs(eps=0.01)) == 0.0
    assert a_of(1.0, cs(eps=0.01)) == 0.0
    assert a_of(0.5, cs(eps=0.5)) == 0.125
    assert a_of(0.5, cs(eps=0.5, eps_reg=0.1)) == pytest.approx(0.225)
    assert a_of(0.3, LINEAR) == 1.0


def test_A_examples():
    assert A_of(0.0, cs(eps=0.01)) == 0.0
    # eps / 6 and eps / 12, checked against quadrature below
    assert A_of(1.0, cs(eps=0.06)) == pytest.approx(0.01, abs=1e-15)
    assert A_of(0.5, cs(eps=0.01)) == pytest.approx(8.333333333333333e-4, rel=1e-14)
    assert A_of(0.7, LINEAR) == 0.7


@pytest.mark.parametrize("eps, eps_reg", [(0.01, 0.0), (0.5, 0.0), (0.3, 0.02)])
def test_A_is_antiderivative_of_a(eps, eps_reg):
    c = cs(eps=eps, eps_reg=eps_reg)
    rng = np.random.default_rng(7)
    for u in rng.random(100):
        oracle, _ = quad(lambda s: a_of(s, c), 0.0, u, epsabs=1e-14, epsrel=1e-13)
        assert abs(A_of(u, c) - oracle) <= 1e-10


def test_quadrature_oracle_values():
    val, _ = quad(lambda s: 0.06 * s * (1 - s), 0, 1)
    assert val == pytest.approx(0.01, rel=1e-12)
    val, _ = quad(lambda s: 0.01 * s * (1 - s), 0, 0.5)
    assert A_of(0.5, cs(eps=0.01)) == pytest.approx(val, rel=1e-12)


@given(st.floats(0, 1), st.floats(0, 1))
def test_A_monotone(u1, u2):
    c = cs(eps=0.3, eps_reg=0.01)
    lo, hi = sorted((u1, u2))
    assert A_of(lo, c) <= A_of(hi, c)


def test_degeneracy_only_without_regularization():
    assert a_of(np.array([0.0, 1.0]), cs(eps=0.2)).tolist() == [0.0, 0.0]
    assert np.all(a_of(np.array([0.0, 1.0]), cs(eps=0.2, eps_reg=1e-3)) > 0)
    inner = np.linspace(1e-6, 1 - 1e-6, 101)
    assert np.all(a_of(inner, cs(eps=0.2)) > 0)


def test_f_examples():
    c = cs()
    assert f_of(1.0, c) == 0.0
    assert f_of(0.0, c) == 1.0
    assert f_of(0.5, c) == 0.25
    assert f_of(0.5, LINEAR) == 0.0


def test_g_examples():
    c = cs(alpha=40.0, beta=160.0)
    assert g_of(1.0, 0.0, c) == 40.0
    assert g_of(0.0, 4.5, c) == -720.0
    assert g_of(0.0, 0.0, c) == 0.0


def test_inputs_are_clamped():
    c = cs(eps=0.01)
    assert a_of(-1e-17, c) == 0.0
    assert A_of(1.0 + 1e-12, c) == A_of(1.0, c)
    assert f_of(1.5, c) == 0.0
    assert f_of(-0.5, c) == 1.0


def test_vectorized_evaluation():
    u = np.linspace(0, 1, 11)
    out = A_of(u, cs(eps=0.5))
    assert out.shape == u.shape
    assert out[0] == 0.0 and out[-1] == pytest.approx(0.5 / 6)


def test_mobility_lipschitz_bound_is_one():
    c = cs()
    u = np.linspace(0, 1, 200001)
    slope = (1 - u) * (1 - 3 * u)
    h = 1e-6
    fd = (uf_of(np.clip(u + h, 0, 1), c) - uf_of(np.clip(u - h, 0, 1), c)) / (
        np.clip(u + h, 0, 1) - np.clip(u - h, 0, 1)
    )
    assert np.max(np.abs(fd - slope)) < 1e-5
    assert np.max(np.abs(slope)) == pytest.approx(1.0)
    # sampled secant slopes never exceed 1
    secants = np.abs(np.diff(uf_of(u, c)) / np.diff(u))
    assert secants.max() <= 1.0 + 1e-9


def test_a_max():
    assert cs(eps=0.01).a_max == pytest.approx(0.0025)
    assert cs(eps=0.01, eps_reg=0.001).a_max == pytest.approx(0.0035)
    assert LINEAR.a_max == 1.0
    u = np.linspace(0, 1, 10001)
    assert a_of(u, cs(eps=0.4)).max() <= cs(eps=0.4).a_max


@pytest.mark.parametrize(
    "kw, key",
    [
        ({"p": 1.5}, "p"),
        ({"eps": 0.0}, "eps"),
        ({"d": -1.0}, "d"),
        ({"alpha": -1.0}, "alpha"),
        ({"beta": -0.1}, "beta"),
        ({"chi": -2.0}, "chi"),
        ({"eps_reg": -1e-3}, "eps_reg"),
        ({"kind": "nonsense"}, "kind"),
        ({"p": float("nan")}, "p"),
    ],
)
def test_validation_names_key(kw, key):
    with pytest.raises(ConfigurationError, match=key):
        CoefficientSet(**kw)


def test_kind_coercion_and_replace():
    c = CoefficientSet(kind="linear_verification")
    assert c.kind is CoefficientKind.LINEAR_VERIFICATION
    c2 = c.replace(p=6)
    assert c2.p == 6.0 and c2.kind is c.kind
    assert c.to_dict()["kind"] == "linear_verification"
