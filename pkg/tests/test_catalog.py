import pytest

from vsi.catalog import (
    FAMILIES,
    CatalogError,
    build,
    kundt_vsi,
    six_d_example,
    vsi1,
    vsi3,
    walker_cond,
    walker_general,
)
from vsi.frame import classify_geometry, validate_frame


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_default_instances_have_valid_frames(name):
    inst = build(name)
    assert validate_frame(inst.frame, inst.metric).ok
    assert inst.frame.roles[0] == "l1"
    assert len(inst.coordinates) == inst.metric.dim


@pytest.mark.parametrize("name", ["flat4", "vsi3", "vsi1", "walker-general", "walker-cond"])
def test_walker_flag_matches_expectation(name):
    inst = build(name)
    flags = classify_geometry(inst.metric, inst.frame)
    assert inst.expected["walker_plane"] is True
    assert flags.walker_plane


@pytest.mark.parametrize("name", ["kundt-null", "kundt-st", "kundt-general"])
def test_kundt_flag_matches_expectation(name):
    inst = build(name)
    assert inst.expected["kundt"] is True
    assert classify_geometry(inst.metric, inst.frame).kundt


def test_unknown_family_and_slot():
    with pytest.raises(CatalogError, match="unknown family"):
        build("no-such")
    with pytest.raises(CatalogError, match="no slot"):
        build("vsi3", {"q": "1"})


def test_dependence_violation():
    with pytest.raises(CatalogError, match="may depend on"):
        walker_cond(1, A0="v")
    with pytest.raises(CatalogError, match="may depend on"):
        build("kundt-null", {"W1U": "V"})
    with pytest.raises(CatalogError, match="may depend on"):
        six_d_example(E="u")


def test_unused_slots_and_bad_tier():
    with pytest.raises(CatalogError, match="not used at tier 1"):
        walker_cond(1, B10="u")
    with pytest.raises(CatalogError, match="tier"):
        walker_cond(4)
    with pytest.raises(CatalogError, match="eps"):
        build("kundt-st", {"eps": "2"})
    with pytest.raises(CatalogError):
        kundt_vsi("sideways")


def test_parse_errors_are_catalog_errors():
    with pytest.raises(CatalogError, match="slot A"):
        walker_general(A="u +* v")


def test_parameters_come_from_bindings():
    inst = vsi1("p", "q*r")
    assert inst.parameters == ("p", "q", "r")
    assert str(inst.values["b"]) == "q*r"
    assert vsi3("2").parameters == ()


def test_tier_expectations():
    assert walker_cond(1, B1="v^2").expected["refuted_at"] == 2
    inst = walker_cond(1, B1="0", C1="0")
    assert inst.expected["certified_through"] is None
    assert walker_cond(2, B0="v^3").expected["refuted_at"] is None
    assert walker_cond(2, B0="v^4").expected["refuted_at"] == 4
    assert walker_cond(3).expected["certified_through"] == "all"


def test_walker_general_metric_entries():
    inst = walker_general("u*V", "v^2", "U")
    g = inst.metric.g
    # coordinates (u, v, U, V): g_uv = g_UV = 1, lower block carries A, B, C
    assert g[0, 1] == 1 and g[2, 3] == 1
    assert str(g[0, 0]) == "2*u*V"
    assert str(g[2, 2]) == "2*v^2"
    assert str(g[0, 2]) == "U"


def test_general_kundt_form():
    inst = build("kundt-general", {"H": "v^2*u + U", "WU": "v*V", "WV": "u*v", "Q": "U*V"})
    flags = classify_geometry(inst.metric, inst.frame)
    assert flags.kundt and not flags.walker_plane
    assert inst.expected["certified_through"] is None
    with pytest.raises(CatalogError, match="may depend on"):
        build("kundt-general", {"P": "1 + v"})
    with pytest.raises(CatalogError, match="nonzero"):
        build("kundt-general", {"P": "0"})
