from blockswap import model_house as mh
from blockswap.graph_ir import serialize_network, validate_network
from blockswap.synth import NetSpec, gen_chain, gen_network, gen_pool

from fractions import Fraction


def test_single_layer():
    net = gen_network(NetSpec(layers=1, seed=0))
    assert len(net.layers) == 1
    assert validate_network(net) == []


def test_generation_deterministic():
    spec = NetSpec(layers=8, edge_prob=0.4, seed=17)
    assert serialize_network(gen_network(spec)) == serialize_network(gen_network(spec))


def test_generated_networks_always_validate():
    for seed in range(150):
        spec = NetSpec(layers=3 + seed % 10, edge_prob=0.3, seed=seed)
        assert validate_network(gen_network(spec)) == [], seed


def test_pool_size_zero():
    base = gen_chain(4)
    assert gen_pool(base, 0) == []


def test_pool_channel_scaling():
    base = gen_chain(4, channels=8, name="base")
    pool = gen_pool(base, 1, (2,), seed=0)
    assert all(
        layer.in_channels == 16 and layer.out_channels == 16
        for lid, layer in pool[0].layers.items()
        if lid in base.layers
    )
    assert validate_network(pool[0]) == []


def test_pool_supports_compatible_harvest():
    base = gen_chain(5, channels=8, name="base")
    pool = gen_pool(base, 5, (2, 3), seed=2)
    params = mh.HouseParams(n_t=5, n_p=10, r=Fraction(1), seed=2)
    house = mh.construct(base, pool, params)
    assert any(a.origin == "pretrained" for a in house.alternatives.values())
