import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfwaves import jets
from hfwaves.jets import DomainError, Jet

from conftest import richardson

xs = st.floats(min_value=0.2, max_value=2.5)

CASES = [
    ("exp", lambda x: jets.exp(x), np.exp),
    ("log", lambda x: jets.log(x), np.log),
    ("sin", lambda x: jets.sin(x), np.sin),
    ("cos", lambda x: jets.cos(x), np.cos),
    ("sqrt", lambda x: jets.sqrt(x), np.sqrt),
    ("pow", lambda x: x**2.7, lambda x: x**2.7),
    ("quot", lambda x: jets.sin(x) / (1.0 + x * x), lambda x: np.sin(x) / (1 + x * x)),
    ("abspow", lambda x: jets.abspow(x - 1.3, 0.5), lambda x: np.abs(x - 1.3) ** 1.5),
    ("bump", lambda x: jets.flatbump(x), lambda x: np.exp(-1 / x**2)),
]


@pytest.mark.parametrize("name,jf,nf", CASES, ids=[c[0] for c in CASES])
@given(u=xs)
def test_jet_matches_finite_differences(name, jf, nf, u):
    if name == "abspow" and abs(u - 1.3) < 0.05:
        return
    d = jf(Jet.variable(u, 3)).derivatives()
    assert d[0] == pytest.approx(nf(u), rel=1e-12, abs=1e-14)
    for k in (1, 2):
        fd = richardson(nf, u, k, h=min(1e-2, abs(u - 1.3) / 4) if name == "abspow" else 1e-2)
        assert d[k] == pytest.approx(fd, rel=1e-6, abs=1e-8)
    # third derivative: differentiate the jet's own second derivative
    second = lambda x: jf(Jet.variable(x, 2)).derivatives()[2]
    h = min(1e-2, abs(u - 1.3) / 4) if name == "abspow" else 1e-2
    assert d[3] == pytest.approx(richardson(second, u, 1, h=h), rel=1e-6, abs=1e-8)


@given(u=xs, v=st.floats(-2, 2))
def test_leibniz_product(u, v):
    x = Jet.variable(u, 6)
    f, g = jets.sin(x), jets.exp(x * v)
    fd, gd = f.derivatives(), g.derivatives()
    pd = (f * g).derivatives()
    for n in range(7):
        ref = sum(math.comb(n, k) * fd[k] * gd[n - k] for k in range(n + 1))
        assert pd[n] == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_division_inverts_product():
    x = Jet.variable(np.linspace(0.5, 2, 7), 8)
    a = jets.exp(x) + x
    b = jets.cos(x) + 2.0
    np.testing.assert_allclose(((a * b) / b).c, a.c, rtol=1e-12, atol=1e-12)


def test_integer_power_is_exact():
    x = Jet.variable(2.0, 5)
    np.testing.assert_allclose((x**3).derivatives(), [8, 12, 12, 6, 0, 0])


def test_batch_shapes_broadcast():
    u = np.linspace(0.1, 1, 12).reshape(3, 4)
    j = jets.sin(Jet.variable(u, 4)) * 2.0 + 1.0
    assert j.c.shape == (5, 3, 4)
    np.testing.assert_allclose(j.value, 2 * np.sin(u) + 1)


def test_domain_errors():
    with pytest.raises(DomainError):
        jets.log(Jet.variable(-1.0, 2))
    with pytest.raises(DomainError):
        Jet.variable(0.0, 2) ** 0.5
    with pytest.raises(DomainError):
        1.0 / Jet.variable(0.0, 1)
    with pytest.raises(DomainError):
        jets.abspow(Jet.variable(0.0, 3), 0.5)


def test_abspow_low_order_at_root_and_even_power():
    np.testing.assert_allclose(jets.abspow(Jet.variable(0.0, 1), 0.5).c, [0, 0])
    np.testing.assert_allclose(jets.abspow(Jet.variable(0.0, 4), 1.0).derivatives(), [0, 0, 2, 0, 0])


def test_flatbump_is_flat_at_zero():
    assert not np.any(jets.flatbump(Jet.variable(0.0, 10)).c)
