import random
from fractions import Fraction

import pytest

from blockswap import model_house as mh
from blockswap.errors import EmptyPretrainedSet, MaskLengthMismatch, NoSubnetFound
from blockswap.graph_ir import Network
from blockswap.synth import gen_chain, gen_pool

from conftest import make_house, make_layer


def test_sampling_respects_min_size(chain4):
    rng = random.Random(0)
    for _ in range(50):
        sn = mh.subnet_sampling(chain4, Fraction(1), 2, rng)
        assert len(sn.layer_ids) >= 2
        assert sn.layer_ids in {
            frozenset(s)
            for s in [
                {"a", "b"},
                {"a", "b", "c"},
                {"a", "b", "c", "d"},
                {"b", "c"},
                {"b", "c", "d"},
                {"c", "d"},
            ]
        }


def test_sampling_r_prefix(chain4):
    rng = random.Random(1)
    seen = set()
    for _ in range(80):
        sn = mh.subnet_sampling(chain4, Fraction(1, 2), 1, rng, start="a")
        seen.add(sn.layer_ids)
    # ceil(0.5 * 4) = 2 prefix pairs from start a
    assert seen == {frozenset({"a"}), frozenset({"a", "b"})}


def test_sampling_no_eligible_start():
    # every layer has two inbound connections (necessarily cyclic)
    ids = ("x", "y", "z")
    layers = [make_layer(i, kind="add") for i in ids]
    edges = [(a, b) for a in ids for b in ids if a != b]
    ineligible = Network("noneligible", layers, edges, [], [])
    with pytest.raises(NoSubnetFound):
        mh.subnet_sampling(ineligible, Fraction(1), 1, random.Random(0))


def test_compatibility_rules():
    def sn(spatial, cin, cout):
        src = gen_chain(1, channels=cin, name="s")
        from dataclasses import replace

        from blockswap.graph_ir import subnetwork_from_layers

        base = subnetwork_from_layers(src, {"a"})
        return replace(base, in_channels=cin, out_channels=cout, spatial_change=spatial)

    assert mh.is_compatible(sn(Fraction(1, 2), 48, 64), sn(Fraction(1, 2), 32, 64))
    assert not mh.is_compatible(sn(Fraction(1, 2), 16, 64), sn(Fraction(1, 2), 32, 64))
    assert not mh.is_compatible(sn(Fraction(1, 4), 48, 96), sn(Fraction(1, 2), 32, 64))


def test_construct_teacher_only(chain4):
    params = mh.HouseParams(n_t=3, n_p=0, r=Fraction(1), seed=0)
    house = mh.construct(chain4, [], params)
    assert len(house.teacher_subnets) == 3
    assert len(house.alternatives) == 3
    assert all(a.origin == "teacher" for a in house.alternatives.values())
    assert all(a.mask is None for a in house.alternatives.values())


def test_construct_requires_pool_when_np_positive(chain4):
    with pytest.raises(EmptyPretrainedSet):
        mh.construct(chain4, [], mh.HouseParams(n_t=2, n_p=1, seed=0))


def test_construct_mask_sizing(chain4):
    wide = gen_chain(4, channels=16, name="chain4w")
    params = mh.HouseParams(n_t=4, n_p=2, r=Fraction(1), seed=3)
    house = mh.construct(chain4, [wide], params)
    harvested = [a for a in house.alternatives.values() if a.origin == "pretrained"]
    assert harvested
    for alt in harvested:
        assert alt.mask is not None
        target = house.teacher_subnets[alt.target_id]
        assert alt.mask.in_popcount == target.in_channels
        assert alt.mask.out_popcount == target.out_channels


def test_construct_stops_at_distinct_limit(diamond):
    # only 4 SISO sub-networks exist, so n_t=10 falls short and stops
    params = mh.HouseParams(n_t=10, n_p=0, r=Fraction(1), seed=0)
    house = mh.construct(diamond, [], params)
    assert len(house.teacher_subnets) == 4


def test_construct_compatibility_invariant():
    house = make_house(seed=11, n_p=10)
    for alt in house.alternatives.values():
        target = house.teacher_subnets[alt.target_id]
        assert mh.is_compatible(alt.subnet, target)
        assert alt.target_id in house.teacher_subnets


def test_construct_seed_determinism(chain4):
    wide = gen_chain(4, channels=16, name="chain4w")
    params = mh.HouseParams(n_t=4, n_p=3, r=Fraction(1), seed=5)
    a = mh.serialize_house(mh.construct(chain4, [wide], params))
    b = mh.serialize_house(mh.construct(chain4, [wide], params))
    assert a == b


def test_expand_identity():
    house = make_house(seed=2, n_p=4)
    assert mh.expand(house, 0) is house


def test_expand_default_keep_first():
    chain = gen_chain(2, channels=8, name="t2")
    wide = gen_chain(2, channels=16, name="w2")
    params = mh.HouseParams(n_t=3, n_p=2, r=Fraction(1), seed=1)
    house = mh.construct(chain, [wide], params)
    grown = mh.expand(house, 6, rng=random.Random(0))
    expanded = [a for a in grown.alternatives.values() if a.origin == "expanded"]
    assert expanded
    for alt in expanded:
        target = grown.teacher_subnets[alt.target_id]
        if alt.mask is not None:
            # default rule keeps the first channels
            kept_in = [i for i, b in enumerate(alt.mask.keep_in) if b]
            assert kept_in == list(range(target.in_channels))
            assert alt.mask.in_popcount == target.in_channels
            assert alt.mask.out_popcount == target.out_channels
        else:
            assert alt.subnet.in_channels == target.in_channels


def test_expand_determinism():
    house = make_house(seed=4, n_p=6)
    a = mh.serialize_house(mh.expand(house, 5, rng=random.Random(42)))
    b = mh.serialize_house(mh.expand(house, 5, rng=random.Random(42)))
    assert a == b


def test_apply_mask_popcounts(chain4):
    wide = gen_chain(4, channels=16, name="w")
    params = mh.HouseParams(n_t=4, n_p=2, r=Fraction(1), seed=3)
    house = mh.construct(chain4, [wide], params)
    alt = next(a for a in house.alternatives.values() if a.mask is not None)
    pruned = mh.apply_mask(alt)
    target = house.teacher_subnets[alt.target_id]
    assert pruned.in_channels == target.in_channels
    assert pruned.out_channels == target.out_channels


def test_apply_mask_flops_rescale():
    from blockswap.graph_ir import subnetwork_from_layers

    net = gen_chain(1, channels=16, name="one", flops_per_layer=1000)
    sn = subnetwork_from_layers(net, {"a"})
    mask = mh.ChannelMask(
        keep_in=mh.first_k_mask(16, 8), keep_out=mh.first_k_mask(16, 16)
    )
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="t0000", mask=mask)
    assert mh.apply_mask(alt).cost.flops == 500


def test_apply_mask_identity_mask():
    from blockswap.graph_ir import subnetwork_from_layers

    net = gen_chain(2, channels=8, name="two")
    sn = subnetwork_from_layers(net, {"a", "b"})
    mask = mh.ChannelMask(keep_in=(True,) * 8, keep_out=(True,) * 8)
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="x", mask=mask)
    pruned = mh.apply_mask(alt)
    assert pruned.in_channels == 8 and pruned.out_channels == 8
    assert pruned.cost.flops == sn.cost.flops


def test_apply_mask_length_mismatch():
    from blockswap.graph_ir import subnetwork_from_layers

    net = gen_chain(1, channels=8, name="one")
    sn = subnetwork_from_layers(net, {"a"})
    mask = mh.ChannelMask(keep_in=(True,) * 4, keep_out=(True,) * 8)
    alt = mh.Alternative(subnet=sn, origin="pretrained", target_id="x", mask=mask)
    with pytest.raises(MaskLengthMismatch):
        mh.apply_mask(alt)


def test_mask_needs_one_channel():
    with pytest.raises(ValueError):
        mh.ChannelMask(keep_in=(False, False), keep_out=(True,))


def test_house_roundtrip():
    house = make_house(seed=6, n_p=6, n_expand=3)
    data = mh.serialize_house(house)
    back = mh.parse_house(data)
    assert mh.serialize_house(back) == data


def test_pool_harvest_yields_pretrained_alts():
    house = make_house(seed=9, n_p=10)
    origins = {a.origin for a in house.alternatives.values()}
    assert "pretrained" in origins
