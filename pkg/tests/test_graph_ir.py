from fractions import Fraction

import pytest

from blockswap.errors import NotSISO, SchemaViolation
from blockswap.graph_ir import (
    CostVector,
    Layer,
    Network,
    parse_network,
    serialize_network,
    subnetwork_from_layers,
    topological_order,
    validate_network,
)

from conftest import make_layer


def test_wellformed_chain_validates(chain4):
    assert validate_network(chain4) == []


def test_cycle_reported(chain4):
    cyclic = Network(
        "cyc",
        chain4.layers.values(),
        list(chain4.edges) + [("d", "a")],
        ["a"],
        ["d"],
    )
    report = validate_network(cyclic)
    assert any("cycle" in v for v in report)


def test_merge_channel_mismatch_reported():
    layers = [
        make_layer("s", cout=8),
        make_layer("t", cin=8, cout=16),
        make_layer("u", cin=8, cout=8),
        make_layer("m", cin=8, kind="add"),
    ]
    net = Network("bad", layers, [("s", "t"), ("s", "u"), ("t", "m"), ("u", "m")], ["s"], ["m"])
    report = validate_network(net)
    assert any("merge channel mismatch" in v for v in report)


def test_unreachable_layer_reported(chain4):
    layers = list(chain4.layers.values()) + [make_layer("zz")]
    net = Network("orphan", layers, chain4.edges, ["a"], ["d"])
    report = validate_network(net)
    assert any("zz" in v and "reachable" in v for v in report)


def test_layer_invariants():
    with pytest.raises(ValueError):
        make_layer("x", cin=0)
    with pytest.raises(ValueError):
        Layer(id="x", kind="conv", in_channels=1, out_channels=1, spatial_change=Fraction(0))
    with pytest.raises(ValueError):
        Layer(id="x", kind="wat", in_channels=1, out_channels=1)
    with pytest.raises(ValueError):
        CostVector(flops=-1)


def test_subnetwork_chain_interval(chain4):
    sn = subnetwork_from_layers(chain4, {"b", "c"})
    assert sn.input_layer == "b"
    assert sn.output_layer == "c"
    assert (sn.in_channels, sn.out_channels) == (8, 8)
    assert sn.spatial_change == Fraction(1)
    expected = chain4.layers["b"].cost + chain4.layers["c"].cost
    assert sn.cost.flops == expected.flops
    assert sn.cost.params == expected.params


def test_subnetwork_diamond_prefix_not_siso(diamond):
    # two outbound boundary edges from different layers
    with pytest.raises(NotSISO):
        subnetwork_from_layers(diamond, {"l0", "l1"})


def test_subnetwork_full_diamond(diamond):
    sn = subnetwork_from_layers(diamond, {"l0", "l1", "l2", "l3"})
    assert sn.input_layer == "l0"
    assert sn.output_layer == "l3"


def test_join_singleton_not_siso(diamond):
    # two boundary input connections enter the join layer
    with pytest.raises(NotSISO):
        subnetwork_from_layers(diamond, {"l3"})


def test_subnetwork_cost_is_exact_member_sum(chain4):
    sn = subnetwork_from_layers(chain4, {"a", "b", "c", "d"})
    assert sn.cost.flops == sum(l.cost.flops for l in chain4.layers.values())


def test_spatial_product(chain4):
    from blockswap.synth import gen_chain

    strided = gen_chain(4, name="strided", stride_positions=(1, 2))
    sn = subnetwork_from_layers(strided, {"a", "b", "c", "d"})
    assert sn.spatial_change == Fraction(1, 4)


def test_roundtrip_identity(chain4):
    data = serialize_network(chain4)
    assert parse_network(data) == chain4


def test_canonical_bytes_stable(chain4):
    data = serialize_network(chain4)
    assert serialize_network(parse_network(data)) == data


def test_missing_edges_is_schema_violation(chain4):
    import json

    obj = json.loads(serialize_network(chain4))
    del obj["edges"]
    with pytest.raises(SchemaViolation) as exc:
        parse_network(json.dumps(obj).encode())
    assert "edges" in str(exc.value)


def test_latency_rationals_roundtrip():
    layer = Layer(
        id="x",
        kind="conv",
        in_channels=4,
        out_channels=4,
        cost=CostVector(flops=10, params=1, latency_us={"cpu0": Fraction(7, 3)}),
    )
    net = Network("lat", [layer], [], ["x"], ["x"])
    back = parse_network(serialize_network(net))
    assert back.layers["x"].cost.latency_us["cpu0"] == Fraction(7, 3)


def test_topological_order_unique_lexicographic(chain4):
    assert topological_order(chain4) == ["a", "b", "c", "d"]


def test_subnetwork_matches_bruteforce_predicate(diamond):
    # exhaustive agreement between the constructor and a literal
    # restatement of the SISO rules, on every subset of a small graph
    from itertools import combinations

    ids = sorted(diamond.layers)
    for size in range(1, len(ids) + 1):
        for combo in combinations(ids, size):
            subset = frozenset(combo)
            in_conns = 0
            in_targets = set()
            out_sources = set()
            for lid in subset:
                for p in diamond.predecessors(lid):
                    if p not in subset:
                        in_conns += 1
                        in_targets.add(lid)
                if lid in diamond.graph_inputs:
                    in_conns += 1
                    in_targets.add(lid)
                if any(s not in subset for s in diamond.successors(lid)):
                    out_sources.add(lid)
                if lid in diamond.graph_outputs:
                    out_sources.add(lid)
            ok = (
                in_conns == 1
                and len(in_targets) == 1
                and len(out_sources) == 1
                and diamond.inbound_count(next(iter(in_targets))) <= 1
            )
            try:
                subnetwork_from_layers(diamond, subset)
                built = True
            except NotSISO:
                built = False
            assert built == ok, subset
