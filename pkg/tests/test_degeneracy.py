import random
from fractions import Fraction

import pytest

from vsi.catalog import build
from vsi.degeneracy import (
    Status,
    b_conditions_on,
    enumerate_separating_direction,
    find_separating_direction,
    fourier_motzkin,
    nilpotency_check,
    tensor_product_property_check,
    vsi_verdict,
)
from vsi.expr import RationalFunction, VariableContext
from vsi.frame import FrameError, NullFrame

from .frame_tensors import random_frame_tensor


def random_support(rng, k, size):
    return [tuple(rng.randint(-3, 3) for _ in range(k)) for _ in range(size)]


def random_unimodular(rng, k):
    M = [[int(i == j) for j in range(k)] for i in range(k)]
    for _ in range(6):
        i, j = rng.sample(range(k), 2)
        c = rng.choice([-2, -1, 1, 2])
        M[i] = [a + c * b for a, b in zip(M[i], M[j])]
    if rng.random() < 0.5:
        M[0] = [-x for x in M[0]]
    return M


def apply(M, b):
    return tuple(sum(r * x for r, x in zip(row, b)) for row in M)


# -- separating directions -----------------------------------------------------


def test_textbook_supports():
    assert find_separating_direction([(-2, -2), (-1, -1), (0, -2), (2, -2)]).as_ints() == (1, 2)
    assert find_separating_direction([(1, -1), (-1, 1)]) is None
    assert find_separating_direction([(1, -1), (-1, 1)], strict=False) is not None
    assert find_separating_direction([(0, 0)], strict=False) is not None
    assert find_separating_direction([(1, 0), (-1, 0), (0, 1), (0, -1)], strict=False) is None


@pytest.mark.parametrize("k", [1, 2, 3])
def test_solvers_agree(k):
    rng = random.Random(100 + k)
    for _ in range(60):
        S = random_support(rng, k, rng.randint(1, 6))
        for strict in (True, False):
            a = find_separating_direction(S, strict, k)
            b = find_separating_direction(S, strict, k, method="fm")
            c = enumerate_separating_direction(S, strict, k)
            assert (a is None) == (b is None) == (c is None), (S, strict)
            for d in (a, b, c):
                assert d is None or d.certifies(S)


def test_fourier_motzkin_infeasible_and_feasible():
    assert fourier_motzkin([((1,), Fraction(-1)), ((-1,), Fraction(-1))], 1) is None
    sol = fourier_motzkin([((1, 1), Fraction(-1)), ((-1, 0), Fraction(0))], 2)
    assert sol[0] + sol[1] <= -1 and sol[0] >= 0


@pytest.mark.parametrize("k", [2, 3])
def test_unimodular_invariance(k):
    rng = random.Random(200 + k)
    for _ in range(50):
        S = random_support(rng, k, rng.randint(1, 6))
        M = random_unimodular(rng, k)
        image = [apply(M, b) for b in S]
        for strict in (True, False):
            assert (find_separating_direction(S, strict, k) is None) == (
                find_separating_direction(image, strict, k) is None
            )


def test_b_conditions():
    c = b_conditions_on([(-1, 3), (0, -1)], 2)
    assert c.b == (True, True) and c.s_level == 2 and c.n
    c = b_conditions_on([(0, 1)], 2)
    assert c.b == (True, False) and c.s_level == 1 and not c.n
    assert not b_conditions_on([(0, 0)], 2).n


# -- product rules -------------------------------------------------------------


@pytest.fixture(scope="module", params=["vsi3", "six-d"])
def geometry(request):
    return build(request.param)


def test_product_rules(geometry):
    frame, metric = geometry.frame, geometry.metric
    k = frame.k
    rng = random.Random(17 + k)
    seen = set()
    levels = [(lv, False) for lv in range(k + 1)] + [(k, True)]
    rounds = 40 if k == 2 else 15
    for _ in range(rounds):
        lt, nt = rng.choice(levels)
        ls, ns = rng.choice(levels)
        T, _ = random_frame_tensor(rng, frame, metric, rng.randint(1, 2), lt, nt, density=0.4)
        S, _ = random_frame_tensor(rng, frame, metric, rng.randint(1, 2), ls, ns, density=0.4)
        rep = tensor_product_property_check(T, S, frame, metric)
        assert rep.ok, rep.failures
        assert rep.t.s_level >= lt and rep.s.s_level >= ls
        seen.add((rep.t.n, rep.s.n))
    assert (True, True) in seen and (False, False) in seen


def test_product_rule_on_curvature():
    from vsi.curvature import build_stack

    inst = build("vsi3")
    stack = build_stack(inst.metric, 1)
    vecs = dict(zip(inst.frame.roles, inst.frame.vectors))
    # B1 is read off the first pair, so put the (2, -2) weight's negative entry first
    swapped = NullFrame.from_vectors(
        inst.ctx, {"l1": vecs["l2"], "n1": vecs["n2"], "l2": vecs["l1"], "n2": vecs["n1"]}
    )
    rep = tensor_product_property_check(stack.riemann, stack.nabla[1], inst.frame, inst.metric)
    assert rep.ok and rep.t.b == (False, True)
    rep = tensor_product_property_check(stack.riemann, stack.nabla[1], swapped, inst.metric)
    assert rep.ok
    assert rep.t.n and rep.s.n and rep.product.n
    assert rep.contraction is not None and rep.contraction.n


# -- nilpotency and verdicts ---------------------------------------------------


def test_nilpotency():
    ctx = VariableContext(["x"], signature=(0, 1))
    z, o = RationalFunction.zero(ctx), RationalFunction.one(ctx)
    shift = [[z, o, z], [z, z, o], [z, z, z]]
    assert nilpotency_check(shift)
    assert not nilpotency_check(shift, d=2)
    assert not nilpotency_check([[o, z], [z, z]])
    with pytest.raises(ValueError):
        nilpotency_check([[o, z]])


def test_vsi3_verdict():
    inst = build("vsi3")
    v = vsi_verdict(inst.metric, inst.frame, 4)
    assert v.summary() == "VSI_3, not VSI_4"
    assert v.highest_certified() == 3
    assert [o.status for o in v.orders] == [Status.CERTIFIED] * 4 + [Status.REFUTED]
    assert v.orders[0].direction.as_ints() == (1, 2)
    assert all(o.direction.certifies(o.support) for o in v.orders[:4])
    assert v.first_refuted().witness_value


def test_vsi1_verdict():
    inst = build("vsi1")
    v = vsi_verdict(inst.metric, inst.frame, 2)
    assert v.summary() == "VSI_1, not VSI_2"


def test_flat_is_certified():
    inst = build("flat4")
    v = vsi_verdict(inst.metric, inst.frame, 2)
    assert all(o.status is Status.CERTIFIED for o in v.orders)


def test_verdict_rejects_bad_frame():
    inst = build("vsi3")
    vecs = dict(zip(inst.frame.roles, inst.frame.vectors))
    vecs["l1"], vecs["l2"] = vecs["l2"], vecs["n1"]
    with pytest.raises(FrameError):
        vsi_verdict(inst.metric, NullFrame.from_vectors(inst.ctx, vecs), 0)
