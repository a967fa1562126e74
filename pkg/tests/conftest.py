import random
from fractions import Fraction

import pytest

from blockswap import cost_profile as cp
from blockswap import model_house as mh
from blockswap import synth
from blockswap.graph_ir import CostVector, Layer, Network


def make_layer(lid, cin=8, cout=8, kind="conv", spatial=Fraction(1), flops=100, params=10):
    return Layer(
        id=lid,
        kind=kind,
        in_channels=cin,
        out_channels=cout,
        spatial_change=spatial,
        cost=CostVector(flops=flops, params=params),
    )


@pytest.fixture
def chain4():
    return synth.gen_chain(4, name="chain4")


@pytest.fixture
def diamond():
    layers = [
        make_layer("l0"),
        make_layer("l1"),
        make_layer("l2"),
        make_layer("l3", kind="add"),
    ]
    return Network(
        "diamond",
        layers,
        [("l0", "l1"), ("l0", "l2"), ("l1", "l3"), ("l2", "l3")],
        ["l0"],
        ["l3"],
    )


def make_house(seed, n_layers=6, n_t=6, n_p=8, n_expand=0, r=Fraction(1), min_size=1):
    """Small deterministic house over a synthetic chain-ish teacher."""
    rng = random.Random(seed)
    teacher = synth.gen_network(
        synth.NetSpec(layers=n_layers, edge_prob=0.25, seed=seed, name=f"teach{seed}")
    )
    pool = synth.gen_pool(teacher, 3, (2, 3), seed=seed + 1)
    params = mh.HouseParams(
        n_t=n_t, n_p=n_p, n_expand=n_expand, r=r, min_size=min_size, seed=seed
    )
    house = mh.construct(teacher, pool, params, rng)
    if n_expand:
        house = mh.expand(house, n_expand, rng=rng)
    return house


def make_profile(house, req_ratio=Fraction(3, 4), lam=Fraction(1), seed=0):
    teacher_total = sum(l.cost.flops for l in house.teacher.layers.values())
    return cp.synth_profile(
        house,
        requirement=Fraction(teacher_total) * req_ratio,
        lam=lam,
        seed=seed,
    )
