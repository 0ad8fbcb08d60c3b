import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfwaves.flux import (
    CATALOG,
    DomainError,
    FluxSyntaxError,
    catalog_flux,
    eval_jet,
    linear_combination,
    parse_expr,
    parse_flux,
    resolve_flux,
    velocity,
    velocity_derivatives,
)
from hfwaves.jets import Jet

from conftest import richardson


def test_burgers_jet():
    f = parse_flux("[u^2/2]")
    np.testing.assert_allclose(eval_jet(f, 0, 1.5, 3).derivatives(), [1.125, 1.5, 1.0, 0.0])


def test_trig_jet_at_zero():
    f = parse_flux("[cos(u), sin(u)]")
    np.testing.assert_allclose(eval_jet(f, 0, 0.0, 4).derivatives(), [1, 0, -1, 0, 1], atol=1e-15)
    np.testing.assert_allclose(velocity_derivatives(f, 0.0, 1)[1], [-1, 0], atol=1e-15)


def test_velocity_rows_power_chain():
    f = catalog_flux("power-chain-d(d=2)")
    rows = velocity_derivatives(f, 1.0, 2)
    np.testing.assert_allclose(rows, [[1, 1], [1, 2], [0, 2]])


def test_batched_velocity_shape():
    f = catalog_flux("trig2d")
    u = np.linspace(0, 1, 10).reshape(2, 5)
    assert velocity(f, u).shape == (2, 5, 2)
    assert velocity_derivatives(f, u, 3).shape == (4, 2, 5, 2)
    assert f(u).shape == (2, 5, 2)


def test_constant_component_broadcasts():
    f = parse_flux("[1, u]")
    assert eval_jet(f, 0, np.zeros(4), 2).c.shape == (3, 4)


@given(u=st.floats(-2, 2))
def test_velocity_matches_finite_difference(u):
    f = parse_flux("[sin(u)*exp(u/3), u^3/3 - u, cos(2*u)]")
    a = velocity(f, u)
    for i in range(3):
        fd = richardson(lambda x: f(x)[i], u, 1)
        assert a[i] == pytest.approx(fd, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize(
    "text",
    ["u^2/2", "-u^3 + 2*u", "sin(u)^2 + cos(u)**2", "abspow(u - 1, 0.5)", "exp(-u) / (1 + u^2)", "2^u", "u^2^3"],
)
def test_print_parse_round_trip(text):
    node = parse_expr(text)
    again = parse_expr(str(node))
    for u in (0.3, 1.7, 2.2):
        a = node.jet(Jet.variable(u, 3)).c
        b = again.jet(Jet.variable(u, 3)).c
        np.testing.assert_allclose(a, b, rtol=1e-14)


def test_power_right_associative():
    assert parse_expr("2^3^2").jet(Jet.variable(0.0, 0)).value == 512.0


def test_variable_exponent():
    d = parse_expr("2^u").jet(Jet.variable(1.0, 1)).derivatives()
    np.testing.assert_allclose(d, [2.0, 2.0 * math.log(2)])


@pytest.mark.parametrize("text", ["[u^2", "u +", "foo(u)", "sin(u, u)", "[]", "u $ 2", "abspow(u)"])
def test_syntax_errors_have_positions(text):
    with pytest.raises(FluxSyntaxError) as err:
        parse_flux(text)
    assert 0 <= err.value.position <= len(text)


def test_domain_error_on_evaluation():
    f = parse_flux("[log(u)]")
    with pytest.raises(DomainError):
        eval_jet(f, 0, -1.0, 1)


def test_abspow_smoothness_annotation():
    assert parse_flux("[abspow(u, 0.5), u]").smoothness == 1
    assert parse_flux("[abspow(u, 1)]").smoothness == math.inf


def test_catalog_keys_and_dimensions():
    for key, entry in CATALOG.items():
        f = catalog_flux(key)
        assert f.d == entry.default_d
    assert catalog_flux("power-chain-d(d=4)").d == 4
    assert resolve_flux("[u, u^2]").d == 2
    with pytest.raises(KeyError):
        catalog_flux("nope")


def test_linear_combination():
    f = parse_flux("[u^2/2, u^3/3]")
    g = linear_combination(f, [2.0, -1.0])
    u = 0.7
    assert g.jet(Jet.variable(u, 0)).value == pytest.approx(u**2 - u**3 / 3)
