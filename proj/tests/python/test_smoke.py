import math

import pytest

import tacnode


def test_version():
    assert tacnode.__version__ == "0.1.0"


def test_special_functions():
    assert tacnode.harmonic_oscillator(0, 0.0) == pytest.approx(math.pi ** -0.25)
    mant, exp = tacnode.hermite_poly(2, 0.0)
    assert mant * 2.0 ** exp == -2.0
    assert tacnode.airy_ai(0.0) == pytest.approx(0.3550280538878172, rel=1e-14)
    assert tacnode.reflected_kernel(0.1, 0.5, 0.0, -1.0) == 0.0


def test_stay_below_closed_form():
    d = tacnode.stay_below(1, r=1.0)
    assert d["value"] == pytest.approx(1 - math.exp(-2), abs=1e-12)
    assert tacnode.stay_below(2, R=0.5)["value"] < 1


def test_routes_agree():
    pts = [(0.3, 1.5), (0.6, 1.2)]
    a = tacnode.conditional_stay_below(2, 2.0, points=pts)["value"]
    b = tacnode.gap_probability_multipoint(2, 2.0, pts)["value"]
    assert abs(a - b) < 1e-8


def test_kernels():
    k = tacnode.FiniteKernel(3, r=2.0)
    assert k.k0().shape == (3, 3)
    assert k.extended(0.2, 0.0, 0.3, -1.0) == 0.0
    lk = tacnode.LimitKernel(0.0)
    assert lk.det_k0() == pytest.approx(tacnode.tracy_widom_goe(0.0), abs=1e-8)
    f, g = lk.rank_one(0.0, -0.5, 0.2, -1.0)
    assert math.isfinite(f * g)
    assert tacnode.airy_gap(0.0)["value"] == pytest.approx(tacnode.tracy_widom_gue(0.0), abs=1e-8)


def test_sampler():
    e = tacnode.estimate_stay_below(1, 1.0, replicas=20000, seed=3, grid=32)
    assert abs(e["value"] - (1 - math.exp(-2))) < 4 * e["std_error"]
    assert e["seed"] == 3
    ens = tacnode.sample_watermelon(2, 1.5, replicas=10, grid=8)
    assert ens["top"].shape == (10, 8)


def test_errors():
    with pytest.raises(ValueError):
        tacnode.stay_below(0, r=1.0)
    with pytest.raises(ValueError):
        tacnode.estimate_stay_below(1, 1.0, grid=0)


def test_verify_suite():
    checks = tacnode.verify("conjugation")
    assert checks and all(c["passed"] for c in checks)
