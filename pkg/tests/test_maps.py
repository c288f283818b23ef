import math
import pickle
import subprocess
import sys

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from hybridchaos import (DEFAULT_HCM2, BranchConfig, ConfigError, Hcm2Config,
                         MapParams, SingularInput, iterate, proposed_step)
from hybridchaos.maps import (advance, hcm1_raw, hcm1_step, hcm2x_step,
                              hcm2y_step, lt1_step, lt2_step, lt_step,
                              sine_step, step_many, State, EPS_SING)

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
param = st.floats(-4.0, 4.0, allow_nan=False)


def ulp_distance(a: float, b: float) -> float:
    return abs(a - b) / math.ulp(max(abs(a), abs(b), 1e-300))


# -- sine / logistic-tent -----------------------------------------------------

def test_sine_examples():
    assert sine_step(4, 0.5) == 1.0
    assert sine_step(3.7, 0.0) == 0.0
    assert sine_step(2, 0.25) == pytest.approx(0.353553390593273762, rel=1e-15)


def test_lt_examples():
    assert lt_step(4, 0.25) == 0.75
    assert lt_step(1.3, 0.0) == 0.0
    assert lt_step(2, 0.75) == 0.625


def test_lt_branch_split_at_half():
    assert lt_step(1.0, 0.5) == lt2_step(1.0, 0.5)
    x = math.nextafter(0.5, 0.0)
    assert lt_step(1.0, x) == lt1_step(1.0, x)


def test_sine_and_lt_within_4_ulp_of_high_precision():
    rng = np.random.default_rng(11)
    worst = 0.0
    for r, x in zip(rng.uniform(-4, 4, 10_000), rng.uniform(0, 1, 10_000)):
        for got, exact in ((sine_step(r, x), O.sine_mp(r, x)),
                           (lt_step(r, x), O.lt_mp(r, x))):
            err = abs(mpmath.mpf(got) - exact)
            scale = math.ulp(max(abs(float(exact)), 1e-300))
            worst = max(worst, float(err) / scale)
    assert worst <= 4


# -- HCM1 ---------------------------------------------------------------------

def _mp_frac_abs(v):
    with mpmath.workdps(50):
        return float(mpmath.frac(abs(v)))


def test_hcm1_raw_value_against_high_precision():
    exact = O.hcm1_raw_mp(0.5, 0.5)
    assert hcm1_raw(0.5, 0.5) == pytest.approx(float(exact), rel=1e-15)
    assert hcm1_step(0.5, 0.5) == pytest.approx(_mp_frac_abs(exact), abs=1e-15)
    assert hcm1_step(0.5, 0.5) == pytest.approx(0.025116041909182766, abs=1e-15)


def test_hcm1_keeps_full_fractional_precision():
    # values reach 1e5 (or 1e12 near the guard); the wrapped result must
    # still be good to a few float64 ulps, not to ulp(1e5) ~ 1.5e-11
    rng = np.random.default_rng(8)
    worst = 0.0
    xs = np.concatenate((rng.uniform(1e-6, 1.0, 9000),
                         10 ** rng.uniform(-6, -1, 1000)))
    for r, x in zip(rng.uniform(-4, 4, xs.size), xs):
        d = abs(hcm1_step(r, x) - _mp_frac_abs(O.hcm1_raw_mp(r, x)))
        worst = max(worst, min(d, 1.0 - d))
    assert worst < 5e-15


def test_hcm1_singular_guard():
    with pytest.raises(SingularInput):
        hcm1_step(0.3, EPS_SING / 2)
    with pytest.raises(SingularInput):
        hcm1_step(0.3, 0.0)
    # x*x < 1e-12 below 1e-6
    with pytest.raises(SingularInput):
        hcm1_step(0.3, 9.9e-7)
    assert 0.0 <= hcm1_step(0.3, 1e-6) < 1.0


@given(param, st.floats(1e-6, 1.0, exclude_max=True))
def test_hcm1_range(r, x):
    assert 0.0 <= hcm1_step(r, x) < 1.0


def test_hcm1_branch_dispatch_around_one_third():
    rng = np.random.default_rng(3)
    third = 1.0 / 3.0
    below = third - rng.uniform(1e-12, 1e-3, 1000)
    above = third + rng.uniform(0, 1e-3, 1000)
    for x in np.concatenate((below, above, [third])):
        r = float(rng.uniform(0, 1))
        assert hcm1_step(r, float(x)) == O.ref_hcm1(r, float(x))


# -- HCM2 ---------------------------------------------------------------------

def test_hcm2x_default_value():
    got = hcm2x_step(0.3, 0.2, 0.7)
    assert got == pytest.approx(O.ref_hcm2x(0.3, 0.2, 0.7), rel=1e-12)
    assert got == pytest.approx(0.18202460400474707, rel=1e-12)


def test_hcm2y_default_value():
    got = hcm2y_step(0.3, 0.4, 0.6)
    assert got == pytest.approx(O.ref_hcm2y(0.3, 0.4, 0.6), rel=1e-12)
    assert got == pytest.approx(0.023185311715413937, rel=1e-12)


def _degenerate(r):
    zero = BranchConfig(omega=0.0, alpha=0.0, beta=r, h="identity")
    return Hcm2Config(x1=zero, x2=zero, y1=zero, y2=zero)


@pytest.mark.parametrize("x,y", [(0.2, 0.1), (0.7, 0.9), (0.0, 0.5)])
def test_hcm2_zero_weights(x, y):
    cfg = _degenerate(0.37)
    assert hcm2x_step(0.37, x, y, cfg) == 0.0
    assert hcm2y_step(0.37, x, y, cfg) == 0.0


@given(param, unit, unit)
def test_hcm2_range(r, x, y):
    assert 0.0 <= hcm2x_step(r, x, y) < 1.0
    assert 0.0 <= hcm2y_step(r, x, y) < 1.0


def test_hcm2x_branch_dispatch_around_half():
    rng = np.random.default_rng(5)
    ys = np.concatenate((0.5 - rng.uniform(1e-12, 1e-3, 1000),
                         0.5 + rng.uniform(0, 1e-3, 1000), [0.5]))
    for y in ys:
        r, x = rng.uniform(0, 1, 2)
        assert hcm2x_step(r, x, float(y)) == O.ref_hcm2x(r, x, float(y))


def test_hcm2y_branch_dispatch_around_half():
    rng = np.random.default_rng(6)
    zs = np.concatenate((0.5 - rng.uniform(1e-12, 1e-3, 1000),
                         0.5 + rng.uniform(0, 1e-3, 1000)))
    for z in zs:
        r, y = rng.uniform(0, 1, 2)
        assert hcm2y_step(r, y, float(z)) == O.ref_hcm2y(r, y, float(z))


def test_literal_superscripts_switch_weights():
    x2 = BranchConfig(omega=0.25, base="sine")
    y2 = BranchConfig(omega=0.75, f="cos_pi", alpha=0.5, base="sine")
    y1 = BranchConfig(alpha=2.0)
    plain = Hcm2Config(x2=x2, y1=y1, y2=y2)
    literal = Hcm2Config(x2=x2, y1=y1, y2=y2, literal_superscripts=True)
    r, x, y = 0.3, 0.2, 0.7
    # omega^y_2 f^y_2 o F^x_2 in the second x branch
    expected = (0.75 * math.cos(math.pi * (r * math.sin(math.pi * x) / 4))
                + r * x * y + math.sin(math.pi * ((4 - r) * (1 - x) / 2)))
    assert hcm2x_step(r, x, y, literal) == pytest.approx(expected % 1.0, rel=1e-13)
    assert hcm2x_step(r, x, y, plain) != hcm2x_step(r, x, y, literal)
    # alpha^y_1 reused in the second y branch
    yv, z = 0.4, 0.6
    expected = (0.75 * math.cos(math.pi * (r * math.sin(math.pi * yv) / 4))
                + 2.0 * r * z * yv + math.sin(math.pi * ((4 - r) * (1 - z) / 2)))
    assert hcm2y_step(r, yv, z, literal) == pytest.approx(expected % 1.0, rel=1e-13)


def test_zeta_choice_changes_hcm2y_input():
    p = MapParams(r1=0.2, r2=0.4, x0=0.6)
    a = proposed_step(p, Hcm2Config(zeta="x_next"))
    b = proposed_step(p, Hcm2Config(zeta="x_n"))
    assert a != b


# -- proposed map -------------------------------------------------------------

def test_proposed_step_value():
    got = proposed_step(MapParams(r1=0.01, r2=0.3, x0=0.03))
    assert got == pytest.approx(O.ref_proposed(0.01, 0.3, 0.03), rel=1e-12)
    assert got == pytest.approx(0.3650879754312742, rel=1e-12)


@settings(max_examples=300)
@given(param, param, unit)
def test_proposed_range_and_determinism(r1, r2, x):
    p = MapParams(r1=r1, r2=r2, x0=x)
    a = proposed_step(p)
    assert 0.0 <= a < 1.0
    assert a == proposed_step(p)


def test_proposed_matches_transcription_on_random_inputs():
    rng = np.random.default_rng(2024)
    r1, r2, x = rng.uniform(0, 1, (3, 10_000))
    got = step_many(r1, r2, x)
    ref = np.array([O.ref_proposed(a, b, c) for a, b, c in zip(r1, r2, x)])
    rel = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)
    assert rel.max() <= 1e-12


def test_zero_state_is_not_absorbing():
    # the nudge target keeps HCM1 away from exact integers at decimal r1
    p = MapParams(r1=0.01, r2=0.3, x0=0.0)
    xs = iterate(p, n=50).samples
    assert np.unique(xs).size == 50


def test_gamma_and_phi_selectors():
    p = MapParams(r1=0.2, r2=0.3, x0=0.4)
    outs = {proposed_step(p.with_(phi1=a, phi2=b, gamma=g))
            for a in ("sin_pi", "identity") for b in ("sum", "product", "mean")
            for g in (1.0, 1e5)}
    assert len(outs) == 12
    assert all(0.0 <= v < 1.0 for v in outs)


# -- iterate ------------------------------------------------------------------

def test_iterate_single_step():
    p = MapParams(r1=0.3, r2=0.01, x0=0.2)
    tr = iterate(p, n=1, burn_in=0)
    assert tr.samples.tolist() == [proposed_step(p, DEFAULT_HCM2, p.x0)]


@pytest.mark.parametrize("n", [1, 7, 1000])
def test_iterate_length(n):
    assert len(iterate(MapParams(), n=n, burn_in=3)) == n


def test_iterate_prefix_consistency():
    p = MapParams(r1=0.1, r2=0.3, x0=0.6)
    a = iterate(p, n=100, burn_in=50).samples
    b = iterate(p, n=150, burn_in=0).samples
    assert np.array_equal(a, b[-100:])


def test_iterate_matches_repeated_steps():
    p = MapParams(r1=0.7, r2=0.2, x0=0.9)
    s = State(p.x0)
    for _ in range(20):
        s = advance(s, p)
    assert s.step_index == 20
    assert s.x == iterate(p, n=20).samples[-1]


def test_iterate_rejects_bad_counts():
    with pytest.raises(ValueError):
        iterate(MapParams(), n=0)
    with pytest.raises(ValueError):
        iterate(MapParams(), n=1, burn_in=-1)


def test_determinism_across_processes():
    code = ("from hybridchaos import MapParams, iterate;"
            "import sys; sys.stdout.buffer.write("
            "iterate(MapParams(r1=0.3, r2=0.01, x0=0.2), n=5000).samples.tobytes())")
    runs = [subprocess.run([sys.executable, "-c", code], capture_output=True,
                           check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1]
    local = iterate(MapParams(r1=0.3, r2=0.01, x0=0.2), n=5000).samples.tobytes()
    assert runs[0] == local


# -- parameter types ----------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"x0": 1.0}, {"x0": -0.1}, {"gamma": 0.0}, {"gamma": -1.0},
    {"r1": math.inf}, {"r2": math.nan}, {"phi1": "cube"}, {"phi2": "max"},
])
def test_map_params_invariants(kwargs):
    with pytest.raises(ConfigError):
        MapParams(**kwargs)


@pytest.mark.parametrize("kwargs", [
    {"omega": math.nan}, {"f": "tanh"}, {"g": "quotient"}, {"base": "tent"},
])
def test_branch_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        BranchConfig(**kwargs)


def test_hcm2_config_round_trip():
    cfg = Hcm2Config(x2=BranchConfig(omega=0.5, base="sine"), zeta="x_n")
    again = Hcm2Config.from_dict(cfg.to_dict())
    assert again == cfg
    assert pickle.loads(pickle.dumps(cfg)) == cfg


def test_hcm2_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        Hcm2Config.from_dict({"x1": {"omegaa": 1}})
    with pytest.raises(ConfigError):
        Hcm2Config.from_dict({"w": 1})


def test_range_closure_on_a_million_triples():
    rng = np.random.default_rng(99)
    r1, r2 = rng.uniform(-4, 4, (2, 1_000_000))
    x = rng.uniform(0, 1, 1_000_000)
    out = step_many(r1, r2, x)
    assert bool(np.all((out >= 0.0) & (out < 1.0)))
