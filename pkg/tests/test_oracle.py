from fractions import Fraction

import pytest

from vsi.catalog import build
from vsi.curvature import build_stack
from vsi.oracle import SamplePlan, cross_check, cross_check_instance, sample_points


@pytest.fixture(scope="module")
def vsi3_stack():
    inst = build("vsi3")
    return inst, build_stack(inst.metric, 4)


def test_vsi3_fourth_order_norm_at_a_point(vsi3_stack):
    _, stack = vsi3_stack
    pt = {"a": 1, "u": 0, "v": 2, "U": 0, "V": 3}
    report = cross_check(stack, points=[pt])
    assert report.ok, [str(m) for m in report.mismatches]
    assert report.invariants[0]["self_norm(4)"] == 331776
    assert report.invariants[0]["self_norm(0)"] == 0


def test_flat_gives_zeros():
    inst = build("flat4")
    report = cross_check(build_stack(inst.metric, 2), SamplePlan(points=3))
    assert report.ok and not report.problems
    assert all(v == 0 for row in report.invariants for v in row.values())


def test_fault_injection_is_reported(vsi3_stack):
    inst, _ = vsi3_stack
    stack = build_stack(inst.metric, 2)
    key = next(iter(stack.nabla[2].components))
    stack.nabla[2].components[key] = stack.nabla[2].components[key] * 2
    report = cross_check(stack, SamplePlan(points=2))
    assert not report.ok
    assert any(m.quantity.startswith("nabla^2") for m in report.mismatches)
    assert report.to_json()["mismatches"]


def test_kundt_instance_agrees():
    inst = build("kundt-st", {"eps": "1", "H0": "u*T", "H1": "X", "W0T": "u", "W0X": "T"})
    stack = build_stack(inst.metric, 2)
    report = cross_check_instance(inst, stack, SamplePlan(seed=5, points=4))
    assert report.ok and len(report.points) == 4
    assert report.comparisons > 0
    assert all({"self_norm(0)", "self_norm(1)", "self_norm(2)"} <= set(row) for row in report.invariants)


def test_sampling_avoids_poles_and_honours_fixed_values():
    inst = build("kundt-st")
    stack = build_stack(inst.metric, 0)
    pts, problems = sample_points(stack, SamplePlan(points=10, fixed={"v": "1/2"}))
    assert len(pts) == 10 and not problems
    x = inst.ctx.index("X")
    assert all(p[x] != 0 for p in pts)
    _, problems = sample_points(stack, SamplePlan(points=1, fixed={"X": 0}, retries=3))
    assert problems


def test_explicit_points_must_be_complete(vsi3_stack):
    _, stack = vsi3_stack
    with pytest.raises(ValueError, match="misses"):
        cross_check(stack, points=[{"u": 0}])
    with pytest.raises(ValueError):
        SamplePlan(points=-1)


def test_to_json_uses_strings(vsi3_stack):
    _, stack = vsi3_stack
    data = cross_check(stack, points=[{"a": Fraction(1, 2), "u": 0, "v": 1, "U": 0, "V": 0}], max_order=1).to_json()
    assert data["points"][0]["a"] == "1/2"
    assert data["mismatches"] == []
