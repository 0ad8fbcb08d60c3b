import math

import numpy as np
import pytest

from hfwaves.flux import parse_flux
from hfwaves.profile import InitialProfile, shock_time, solve_entropy_fv
from hfwaves.wave import (
    Field2D,
    WaveSetup,
    build_wave,
    cancellation_sweep,
    commensurate_box,
    compatibility_order,
    eikonal_phase,
    planar_cross_check,
    solve_fv_2d,
    uniform_preshock_time,
    wkb_error_sweep,
)

UU2 = parse_flux("[u^2/2, u^3/3]")  # velocity a = (u, u^2)
SINE = InitialProfile("sine", amp=1.0, k=1)


def test_compatibility_order_examples():
    assert compatibility_order(UU2, 0.0, [0, 1]) == 2
    assert compatibility_order(UU2, 0.0, [1, 0]) == 1
    assert compatibility_order(parse_flux("[2*u, -u]"), 0.3, [1, 1]) == math.inf
    with pytest.raises(ValueError):
        compatibility_order(UU2, 0.0, [0, 0])


def test_eikonal_phase_examples():
    assert eikonal_phase(parse_flux("[u^2/2, u^3/3]"), 0.0, [1, 2]).speed == 0.0
    ph = eikonal_phase(parse_flux("[u^2/2]"), 1.0, [1])
    assert ph(2.0, np.array([5.0])) == pytest.approx(3.0)
    ph = eikonal_phase(UU2, 0.5, [0, 1])
    assert ph.speed == pytest.approx(0.25)
    assert ph(4.0, np.array([0.3, 2.0])) == pytest.approx(1.0)


def test_setup_validation():
    s = WaveSetup(UU2, 0.0, [0, 1], 2.0)
    assert s.q == 2 and s.r == 1.0 and s.compatible
    s = WaveSetup(UU2, 0.0, [0, 1], 1.5)
    assert s.q == 2 and s.r == pytest.approx(0.5)
    assert not WaveSetup(UU2, 0.0, [1, 0], 2.0).compatible
    for bad in (dict(gamma=1.0), dict(gamma=2.0, q=3), dict(gamma=2.0, v=[0, 0]),
                dict(gamma=2.0, eps_list=[0.1, 0.2]), dict(gamma=2.0, M=0.05)):
        kw = {"flux": UU2, "u_bar": 0.0, "v": [0, 1], **bad}
        with pytest.raises(ValueError):
            WaveSetup(**kw)


def test_build_wave_initial_ansatz():
    s = WaveSetup(UU2, 0.1, [1, 2], 2.0, eps_list=[0.5, 0.25, 0.125, 0.0625])
    f = build_wave(s, 0.25, 0.0, N=32)
    x = f.centers()
    expected = 0.1 + 0.25 * np.sin(2 * np.pi * (x @ np.array([1.0, 2.0])) / 0.0625)
    assert np.max(np.abs(f.values - expected)) < 1e-12
    assert commensurate_box(s, 0.25, 1) == pytest.approx((0.0625, 0.03125))


def test_linear_flux_is_pure_transport():
    lin = parse_flux("[2*u, -u]")
    s = WaveSetup(lin, 0.3, [1, 1], 2.0, eps_list=[0.5, 0.25, 0.125, 0.0625])
    f = build_wave(s, 0.25, 0.7, N=16)
    x = f.centers()
    ph = x.sum(axis=-1) - 0.7 * (2 - 1)
    assert np.max(np.abs(f.values - (0.3 + 0.25 * np.sin(2 * np.pi * ph / 0.0625)))) < 1e-10
    res = wkb_error_sweep(s, 0.5, N=64, n_t=5)
    assert res.exact and res.fit is None and max(res.values) < 1e-12


def test_split_solver_constant_and_planarity():
    const = Field2D(np.full((16, 16), 0.4), (1.0, 1.0))
    assert np.all(solve_fv_2d(UU2, const, 0.3).values == 0.4)
    y = (np.arange(64) + 0.5) / 64
    planar = Field2D(np.tile(0.5 * np.sin(2 * np.pi * y), (8, 1)), (1.0, 1.0))
    out = solve_fv_2d(parse_flux("[sin(3*u) + u^3, u^2/2]"), planar, 0.4)
    assert np.max(np.abs(out.values - out.values[:1, :])) <= 1e-12
    assert abs(out.mean() - planar.mean()) < 1e-13


def test_split_solver_rejects_bad_box():
    f = Field2D(np.zeros((8, 8)), (1.0, 0.3))
    with pytest.raises(ValueError, match="commensurate"):
        solve_fv_2d(UU2, f, 0.1, periods=[0.0, 0.25])
    with pytest.raises(ValueError):
        solve_fv_2d(UU2, f, 0.1, cfl=0.95)


def test_planar_cross_check_small():
    s = WaveSetup(UU2, 0.0, [1, 2], 1.5, eps_list=[0.5, 0.25, 0.125, 0.0625])
    T = shock_time(s.psi(0.25), s.profile)
    out = planar_cross_check(s, 0.25, 2 * T, 64)
    assert out["distance_to_N"] <= 3 * out["self_convergence"]
    assert out["mean_drift"] < 1e-12


def test_wkb_orders():
    eps = [2.0**-k for k in range(3, 7)]
    s = WaveSetup(parse_flux("[u^2/2, u^3/3 + u^4/4]"), 0.0, [0, 1], 2.0, eps_list=eps)
    T0 = uniform_preshock_time(s)
    res = wkb_error_sweep(s, 0.4 * T0, N=256, n_t=17)
    assert res.fit.slope == pytest.approx(2.0, abs=0.2)
    s = WaveSetup(UU2, 0.0, [0, 1], 1.5, eps_list=eps)
    res = wkb_error_sweep(s, 0.4 * uniform_preshock_time(s), N=256, n_t=17)
    assert 1.3 <= res.fit.slope <= 1.8


def test_wkb_preconditions():
    s = WaveSetup(UU2, 0.0, [0, 1], 2.0)
    with pytest.raises(ValueError, match="pre-shock"):
        wkb_error_sweep(s, uniform_preshock_time(s))
    with pytest.raises(ValueError, match="compatibility"):
        wkb_error_sweep(WaveSetup(UU2, 0.0, [1, 0], 2.0), 0.01)


def test_cancellation_constant_and_contrast():
    eps = [2.0**-k for k in range(3, 7)]
    const = WaveSetup(UU2, 0.0, [1, 0], 2.0, profile=InitialProfile("const", offset=0.4), eps_list=eps)
    with pytest.warns(UserWarning):
        res = cancellation_sweep(const, 0.5, N=256)
    assert max(res.values) < 1e-14
    burgers = WaveSetup(parse_flux("[u^2/2]"), 0.0, [1], 2.0, eps_list=eps)
    res = cancellation_sweep(burgers, 0.5, N=512)
    assert all(f <= 0.9 for f in res.records[-1]["halving_factors"])
    with pytest.warns(UserWarning, match="no cancellation"):
        comp = cancellation_sweep(WaveSetup(UU2, 0.0, [0, 1], 2.0, eps_list=eps), 0.5, N=512)
    assert min(comp.values) > 0.3


def test_profile_values_through_shock():
    s = WaveSetup(parse_flux("[u^2/2]"), 0.0, [1], 2.0, eps_list=[0.5, 0.25, 0.125, 0.0625])
    T = shock_time(s.psi(0.25), SINE)
    f = build_wave(s, 0.25, 2 * T, N=64, N_fv=512)
    U = solve_entropy_fv(s.psi(0.25), SINE, 2 * T, 512).fields[0].values
    assert np.max(np.abs(f.values)) <= 0.25 * np.max(np.abs(U)) + 1e-12
