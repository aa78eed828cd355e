import pytest

from vsi.catalog import build
from vsi.curvature import (
    audit_stack,
    build_stack,
    christoffel,
    covariant_derivative,
    hodge_left,
    riemann,
    riemann_symmetry_violations,
    second_bianchi_violations,
    stack_size,
    weyl_split,
)
from vsi.errors import InvariantViolation, ResourceLimitError
from vsi.expr import RationalFunction, VariableContext, parse_expression
from vsi.tensor import (
    DOWN,
    UP,
    SingularMetricError,
    Tensor,
    TensorError,
    contract,
    full_contraction,
    metric_inverse,
    raise_lower,
    tensor_product,
)


def metric(coords, rows, signature, params=()):
    ctx = VariableContext(coords, params, signature)
    P = lambda s: parse_expression(s, ctx)  # noqa: E731
    return metric_inverse(Tensor.from_matrix(ctx, [[P(x) for x in r] for r in rows]))


@pytest.fixture(scope="module")
def polar():
    return metric(["x", "y"], [["1", "0"], ["0", "x^2"]], (0, 2))


@pytest.fixture(scope="module")
def sphere():
    f = "4/(1+x^2+y^2)^2"
    return metric(["x", "y"], [[f, "0"], ["0", f]], (0, 2))


@pytest.fixture(scope="module")
def vsi3():
    return build("vsi3", {"a": "a"})


def test_polar_christoffel_symbols(polar):
    conn = christoffel(polar)
    P = lambda s: parse_expression(s, polar.ctx)  # noqa: E731
    assert conn[0, 1, 1] == P("-x")
    assert conn[1, 0, 1] == conn[1, 1, 0] == P("1/x")
    assert conn[0, 0, 0].is_zero()
    assert riemann(conn).is_zero()


def test_sphere_sign_and_scalar(sphere):
    stack = build_stack(sphere, 1)
    R = stack.riemann
    assert R[0, 1, 0, 1].evaluate_values([0, 0]) > 0
    assert stack.scalar == RationalFunction.constant(sphere.ctx, 2)


def test_inverse_and_raise_lower(vsi3):
    m = vsi3.metric
    delta = contract(tensor_product(m.g, m.g_inv), 1, 2)
    n = m.dim
    for i in range(n):
        for j in range(n):
            assert delta[i, j] == (1 if i == j else 0)
    T = build_stack(m, 0).riemann
    up = raise_lower(T, 2, m)
    assert up.valence == (DOWN, DOWN, UP, DOWN)
    assert raise_lower(up, 2, m) == T


def test_singular_metric_rejected():
    with pytest.raises(SingularMetricError):
        metric(["x", "y"], [["1", "1"], ["1", "1"]], (1, 0))


def test_tensor_index_checks():
    ctx = VariableContext(["x", "y"], signature=(1, 0))
    with pytest.raises(TensorError):
        Tensor(ctx, (DOWN,), {(2,): 1})


def test_metric_compatibility(vsi3):
    m = vsi3.metric
    conn = christoffel(m)
    assert covariant_derivative(m.g, conn).is_zero()


def test_ricci_identity_on_a_covector(vsi3):
    m = vsi3.metric
    ctx = m.ctx
    conn = christoffel(m)
    P = lambda s: parse_expression(s, ctx)  # noqa: E731
    w = Tensor(ctx, (DOWN,), {(0,): P("v*U"), (1,): P("V^2"), (2,): P("u + v^3"), (3,): P("a*v*u")})
    ww = covariant_derivative(covariant_derivative(w, conn), conn)  # w_{b;c;d}
    R_up = raise_lower(riemann(conn), 0, m)  # R^a_{bcd}
    n = m.dim
    for b in range(n):
        for c in range(n):
            for d in range(n):
                lhs = ww[b, c, d] - ww[b, d, c]
                rhs = RationalFunction.zero(ctx)
                for a in range(n):
                    rhs = rhs + R_up[a, b, c, d] * w[(a,)]
                assert lhs == rhs


def test_symmetry_reduced_derivative_matches_full(vsi3):
    conn = christoffel(vsi3.metric)
    R = riemann(conn)
    plain = Tensor(R.ctx, R.valence, dict(R.components))
    for _ in range(2):
        R = covariant_derivative(R, conn)
        plain = covariant_derivative(plain, conn)
        assert R.components == plain.components


@pytest.mark.parametrize(
    "name, settings",
    [
        ("vsi1", {}),
        ("kundt-null", {"H0": "u*U", "H1": "V", "W0U": "u", "W0V": "U", "W1U": "u"}),
        ("kundt-st", {"eps": "1", "H0": "u*T", "H1": "X", "W0T": "u", "W0X": "T"}),
    ],
)
def test_identities_hold(name, settings):
    stack = build_stack(build(name, settings).metric, 2, audit=False)
    for T in stack.nabla:
        assert riemann_symmetry_violations(T) == []
    assert second_bianchi_violations(stack.nabla[1]) == []
    audit_stack(stack)


def test_corrupted_stack_is_caught(vsi3):
    stack = build_stack(vsi3.metric, 1)
    key = next(iter(stack.nabla[1].components))
    stack.nabla[1].components[key] = stack.nabla[1].components[key] + 1
    with pytest.raises(InvariantViolation):
        audit_stack(stack)


def test_weyl_split(vsi3):
    stack = build_stack(vsi3.metric, 0)
    wp, wm = weyl_split(stack)
    assert wp + wm == stack.weyl
    assert hodge_left(wp, vsi3.metric) == wp
    assert hodge_left(wm, vsi3.metric) == -wm


def test_self_norm_by_full_contraction(vsi3):
    stack = build_stack(vsi3.metric, 4)
    T = stack.nabla[4]
    assert str(full_contraction(T, T, vsi3.metric)) == "331776*a^2"


def test_resource_cap(vsi3, monkeypatch):
    assert stack_size(4, 1) == 4**4 + 4**5
    with pytest.raises(ResourceLimitError):
        build_stack(vsi3.metric, 3, cap=1000)
    monkeypatch.setenv("VSI_COMPONENT_CAP", "500")
    build_stack(vsi3.metric, 0)
    with pytest.raises(ResourceLimitError):
        build_stack(vsi3.metric, 1)
