import random
from fractions import Fraction

import pytest

from blockswap import model_house as mh
from blockswap import rewrite as rw
from blockswap import search as se
from blockswap.errors import BoundaryMismatch, TargetNotIntact
from blockswap.graph_ir import (
    serialize_network,
    subnetwork_from_layers,
    validate_network,
)
from blockswap.synth import gen_chain

from conftest import make_house, make_profile


def identity_alt(net, members, target_id="t"):
    sn = subnetwork_from_layers(net, members)
    return sn, mh.Alternative(subnet=sn, origin="teacher", target_id=target_id, mask=None)


def test_identity_replacement_isomorphic(chain4):
    target, alt = identity_alt(chain4, {"b", "c"})
    student = rw.replace_subnetwork(chain4, target, alt, chain4, "alt0")
    assert validate_network(student) == []
    assert len(student.layers) == 4
    assert ("a", "alt0/b") in student.edges
    assert ("alt0/c", "d") in student.edges
    kinds = sorted(l.kind for l in student.layers.values())
    assert kinds == sorted(l.kind for l in chain4.layers.values())


def test_shape_preserving_splice(chain4):
    donor = gen_chain(2, channels=8, name="donor")
    sn = subnetwork_from_layers(donor, {"a", "b"})
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="t", mask=None)
    target = subnetwork_from_layers(chain4, {"b", "c"})
    student = rw.replace_subnetwork(chain4, target, alt, donor, "alt0")
    assert validate_network(student) == []
    assert len(student.layers) == 4


def test_full_diamond_collapse(diamond):
    donor = gen_chain(1, channels=8, name="micro")
    sn = subnetwork_from_layers(donor, {"a"})
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="t", mask=None)
    target = subnetwork_from_layers(diamond, set(diamond.layers))
    student = rw.replace_subnetwork(diamond, target, alt, donor, "alt0")
    assert validate_network(student) == []
    assert sorted(student.layers) == ["alt0/a"]
    assert student.graph_inputs == ("alt0/a",)
    assert student.graph_outputs == ("alt0/a",)


def test_boundary_mismatch_rejected(chain4):
    donor = gen_chain(2, channels=16, name="wide")
    sn = subnetwork_from_layers(donor, {"a", "b"})
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="t", mask=None)
    target = subnetwork_from_layers(chain4, {"b", "c"})
    with pytest.raises(BoundaryMismatch):
        rw.replace_subnetwork(chain4, target, alt, donor, "alt0")


def test_target_not_intact(chain4):
    target, alt = identity_alt(chain4, {"b", "c"})
    once = rw.replace_subnetwork(chain4, target, alt, chain4, "alt0")
    with pytest.raises(TargetNotIntact):
        rw.replace_subnetwork(once, target, alt, chain4, "alt1")


def test_masked_splice_channels(chain4):
    donor = gen_chain(2, channels=16, name="wide")
    sn = subnetwork_from_layers(donor, {"a", "b"})
    mask = mh.ChannelMask(
        keep_in=mh.first_k_mask(16, 8), keep_out=mh.first_k_mask(16, 8)
    )
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="t", mask=mask)
    target = subnetwork_from_layers(chain4, {"b", "c"})
    student = rw.replace_subnetwork(chain4, target, alt, donor, "alt0")
    assert validate_network(student) == []
    assert student.layers["alt0/a"].in_channels == 8
    assert student.layers["alt0/b"].out_channels == 8


def test_apply_plan_empty_is_byte_identical():
    house = make_house(seed=110, n_p=6)
    student, provenance = rw.apply_plan(house, frozenset())
    assert serialize_network(student) == serialize_network(house.teacher)
    assert provenance == {}


def test_apply_plan_identity_isomorphic():
    house = make_house(seed=111, n_p=0, n_t=3)
    profile = make_profile(house)
    idents = frozenset(
        aid for aid, a in house.alternatives.items() if a.origin == "teacher"
    )
    feasible = se.random_feasible_plan(house, profile, random.Random(0)).plan
    student, _ = rw.apply_plan(house, feasible)
    assert validate_network(student) == []
    assert len(student.layers) == len(house.teacher.layers)
    assert sorted(l.kind for l in student.layers.values()) == sorted(
        l.kind for l in house.teacher.layers.values()
    )


def test_apply_plan_random_valid_and_spatial_preserving():
    rng = random.Random(5)
    for seed in range(5):
        house = make_house(seed=120 + seed, n_p=8, n_expand=4)
        profile = make_profile(house)
        for _ in range(20):
            plan = se.random_feasible_plan(house, profile, rng).plan
            student, provenance = rw.apply_plan(house, plan)
            assert validate_network(student) == []
            for lid, aid in provenance.items():
                assert lid in student.layers
                assert aid in plan


def test_render_dot_counts(chain4):
    dot = rw.render_dot(chain4)
    assert dot.count("shape=box") == 4
    assert dot.count(" -> ") == 3


def test_render_dot_deterministic(chain4):
    assert rw.render_dot(chain4) == rw.render_dot(chain4)


def test_render_dot_provenance_attribute():
    house = make_house(seed=130, n_p=6)
    profile = make_profile(house)
    plan = se.greedy_init(house, profile).plan
    if not plan:
        plan = se.random_feasible_plan(house, profile, random.Random(1)).plan
    student, provenance = rw.apply_plan(house, plan)
    dot = rw.render_dot(student, provenance)
    if provenance:
        some = next(iter(provenance.values()))
        assert f'origin="{some}"' in dot
        assert "fillcolor=" in dot
