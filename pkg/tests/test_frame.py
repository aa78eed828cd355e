import random
from fractions import Fraction

import pytest

from vsi.catalog import build
from vsi.curvature import build_stack, christoffel
from vsi.expr import RationalFunction
from vsi.frame import (
    FrameError,
    NullFrame,
    boost_weight_of,
    bw_decompose,
    classify_geometry,
    frame_components,
    reconstruction_residuals,
    spin_coefficients,
    validate_frame,
)
from vsi.tensor import DOWN, Tensor, raise_lower, tensor_product

from .frame_tensors import random_frame_tensor


@pytest.fixture(scope="module")
def vsi3():
    return build("vsi3", {"a": "a"})


def test_frame_validates_and_roles(vsi3):
    f = vsi3.frame
    assert f.roles == ("l1", "n1", "l2", "n2")
    assert validate_frame(f, vsi3.metric).ok
    assert f.weight_table() == [(1, 0), (-1, 0), (0, 1), (0, -1)]


def test_corrupted_frame_reports_pairings(vsi3):
    vecs = dict(zip(vsi3.frame.roles, vsi3.frame.vectors))
    vecs["n1"] = tuple(c + c for c in vecs["n1"])
    bad = NullFrame.from_vectors(vsi3.ctx, vecs)
    report = validate_frame(bad, vsi3.metric)
    assert not report.ok
    assert any("g(l1, n1)" in v for v in report.violations)
    with pytest.raises(FrameError):
        NullFrame.from_vectors(vsi3.ctx, {"l1": vecs["l1"]})


def test_walker_riemann_weights(vsi3):
    dec = bw_decompose(build_stack(vsi3.metric, 0).riemann, vsi3.frame)
    assert dec.support() == [(-2, -2), (-1, -1), (0, -2), (2, -2)]
    assert all(b1 + b2 <= 0 for b1, b2 in dec.support())
    P = dec.part((2, -2))
    assert str(P[(0, 3, 0, 3)]) == "-12*v^2*a"


def test_metric_is_boost_weight_zero(vsi3):
    assert bw_decompose(vsi3.metric.g, vsi3.frame).support() == [(0, 0)]


def test_random_frame_tensor_round_trip(vsi3):
    rng = random.Random(7)
    T, comps = random_frame_tensor(rng, vsi3.frame, vsi3.metric, rank=3)
    got = frame_components(T, vsi3.frame).components
    assert got == {k: RationalFunction.constant(vsi3.ctx, v) for k, v in comps.items()}


def test_additivity_under_tensor_product(vsi3):
    rng = random.Random(11)
    frame, metric = vsi3.frame, vsi3.metric
    for _ in range(100):
        T, tc = random_frame_tensor(rng, frame, metric, rank=rng.randint(1, 2))
        S, sc = random_frame_tensor(rng, frame, metric, rank=rng.randint(1, 2))
        prod = bw_decompose(tensor_product(T, S), frame)
        want: dict = {}
        for I, x in tc.items():
            for J, y in sc.items():
                b = tuple(p + q for p, q in zip(boost_weight_of(I, frame), boost_weight_of(J, frame)))
                want.setdefault(b, {})[I + J] = x * y
        assert set(prod.parts) == set(want)
        for b, items in prod.parts.items():
            assert {idx: v.constant_value() for idx, v in items} == want[b]


def test_raise_lower_keeps_weights(vsi3):
    rng = random.Random(3)
    for _ in range(10):
        T, _ = random_frame_tensor(rng, vsi3.frame, vsi3.metric, rank=3)
        up = raise_lower(T, rng.randrange(3), vsi3.metric)
        assert bw_decompose(up, vsi3.frame, vsi3.metric).parts == bw_decompose(T, vsi3.frame).parts


def test_boost_equivariance(vsi3):
    R = build_stack(vsi3.metric, 1).nabla[1]
    frame = vsi3.frame
    s = (Fraction(3), Fraction(-1, 2))
    base = frame_components(R, frame).components
    boosted = frame_components(R, frame.boosted(s)).components
    assert set(base) == set(boosted)
    for idx, v in base.items():
        b = boost_weight_of(idx, frame)
        factor = s[0] ** b[0] * s[1] ** b[1]
        assert boosted[idx] == v * RationalFunction.constant(vsi3.ctx, factor)


# -- spin coefficients ---------------------------------------------------------


def test_flat_spin_coefficients_vanish():
    inst = build("flat4")
    sc = spin_coefficients(inst.frame, metric=inst.metric)
    assert all(v.is_zero() for v in sc.as_dict().values())
    assert len(sc.as_dict()) == 12
    flags = classify_geometry(inst.metric, inst.frame)
    assert all(flags.as_dict().values())


def test_walker_flags(vsi3):
    flags = classify_geometry(vsi3.metric, vsi3.frame)
    assert flags.walker_plane
    sc = flags.coefficients
    assert all(getattr(sc, f).is_zero() for f in ("kappa", "rho", "sigma", "tau"))
    assert str(sc.sigma_t) == "-4*v^3*a"
    assert reconstruction_residuals(sc, vsi3.frame, christoffel(vsi3.metric)) == []


@pytest.mark.parametrize("eps", ["0", "1"])
def test_kundt_flags(eps):
    inst = build("kundt-st", {"eps": eps, "H0": "u*T", "H1": "X", "W0T": "u", "W0X": "T"})
    flags = classify_geometry(inst.metric, inst.frame)
    assert flags.kundt
    conn = christoffel(inst.metric)
    assert reconstruction_residuals(flags.coefficients, inst.frame, conn) == []


def test_spin_coefficients_need_4d_neutral():
    inst = build("six-d")
    with pytest.raises(FrameError):
        spin_coefficients(inst.frame, metric=inst.metric)


def test_rank_zero_and_covector_frames_agree(vsi3):
    vecs = NullFrame.from_vectors(vsi3.ctx, dict(zip(vsi3.frame.roles, vsi3.frame.vectors)))
    assert vecs.vectors == vsi3.frame.vectors
    scalar = Tensor(vsi3.ctx, (), {(): 5})
    assert frame_components(scalar, vecs).components == {(): RationalFunction.constant(vsi3.ctx, 5)}
    assert Tensor(vsi3.ctx, (DOWN,)).is_zero()
