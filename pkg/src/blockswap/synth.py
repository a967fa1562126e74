"""Deterministic generators for random DAG networks and pretrained-pool
stand-ins, used by desk-scale experiments and test oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .graph_ir import CostVector, Layer, Network

_CHAIN_KINDS = ("conv", "bn", "act", "conv", "dwconv", "conv", "pool", "conv")


@dataclass(frozen=True)
class NetSpec:
    layers: int = 6
    edge_prob: float = 0.3
    channel_palette: tuple[int, ...] = (8, 16, 32)
    stride_positions: tuple[int, ...] = ()
    seed: int = 0
    name: str = ""


def gen_network(spec: NetSpec) -> Network:
    """Random DAG over a random topological order.

    Nodes that feed a merge all share the palette's base (first) channel
    width, so merge consistency holds by construction; merge nodes are
    ``add`` layers. Stride positions get spatial change 1/2 (chain-safe;
    callers placing strides on branchy graphs own path consistency).
    """
    assert spec.layers >= 1 and 0.0 <= spec.edge_prob <= 1.0
    rng = random.Random(spec.seed)
    n = spec.layers
    ids = [f"l{i:02d}" for i in range(n)]
    edges: set[tuple[int, int]] = set()
    for j in range(1, n):
        for i in range(j):
            if rng.random() < spec.edge_prob:
                edges.add((i, j))
    # keep every node on an input-to-output path
    for j in range(1, n):
        if not any(i < j for i, jj in edges if jj == j):
            edges.add((rng.randrange(j), j))
    for i in range(n - 1):
        if not any(ii == i for ii, j in edges if j > i):
            edges.add((i, rng.randrange(i + 1, n)))

    indeg = [0] * n
    for i, j in edges:
        indeg[j] += 1
    merge_nodes = {j for j in range(n) if indeg[j] >= 2}
    feeds_merge = {i for i, j in edges if j in merge_nodes}
    base = spec.channel_palette[0]

    out_ch: dict[int, int] = {}
    for i in range(n):
        if i in feeds_merge or i in merge_nodes:
            out_ch[i] = base
        else:
            out_ch[i] = rng.choice(spec.channel_palette)

    layers = []
    for i in range(n):
        preds = sorted(p for p, j in edges if j == i)
        if i in merge_nodes:
            kind = "add"
            in_c = out_ch[preds[0]]
            out_ch[i] = in_c
        else:
            kind = _CHAIN_KINDS[i % len(_CHAIN_KINDS)]
            in_c = out_ch[preds[0]] if preds else out_ch[i]
        spatial = Fraction(1, 2) if i in spec.stride_positions else Fraction(1)
        flops = in_c * out_ch[i] * 9 * 2
        layers.append(
            Layer(
                id=ids[i],
                kind=kind,
                in_channels=in_c,
                out_channels=out_ch[i],
                spatial_change=spatial,
                cost=CostVector(flops=flops, params=in_c * out_ch[i] * 9),
            )
        )

    graph_inputs = [ids[i] for i in range(n) if indeg[i] == 0]
    outdeg = [0] * n
    for i, j in edges:
        outdeg[i] += 1
    graph_outputs = [ids[i] for i in range(n) if outdeg[i] == 0]
    return Network(
        name=spec.name or f"synth{spec.seed}-{n}",
        layers=layers,
        edges=[(ids[i], ids[j]) for i, j in sorted(edges)],
        graph_inputs=graph_inputs,
        graph_outputs=graph_outputs,
    )


def gen_chain(
    n: int,
    channels: int = 8,
    name: str = "chain",
    flops_per_layer: int = 100,
    stride_positions: Sequence[int] = (),
) -> Network:
    ids = [chr(ord("a") + i) if n <= 26 else f"l{i:02d}" for i in range(n)]
    layers = [
        Layer(
            id=ids[i],
            kind="conv",
            in_channels=channels,
            out_channels=channels,
            spatial_change=Fraction(1, 2) if i in stride_positions else Fraction(1),
            cost=CostVector(flops=flops_per_layer, params=flops_per_layer // 10),
        )
        for i in range(n)
    ]
    return Network(
        name=name,
        layers=layers,
        edges=[(ids[i], ids[i + 1]) for i in range(n - 1)],
        graph_inputs=[ids[0]],
        graph_outputs=[ids[-1]],
    )


def gen_pool(
    base: Network,
    variants: int,
    scale_factors: Sequence[int] = (1, 2),
    seed: int = 0,
) -> list[Network]:
    """Channel-scaled and depth-perturbed variants of a base network; scale
    factors >= 1 guarantee sub-networks compatible with the base's exist."""
    assert variants >= 0
    rng = random.Random(seed)
    pool = []
    for v in range(variants):
        factor = scale_factors[v % len(scale_factors)]
        layers = []
        for lid in sorted(base.layers):
            layer = base.layers[lid]
            layers.append(
                Layer(
                    id=layer.id,
                    kind=layer.kind,
                    in_channels=layer.in_channels * factor,
                    out_channels=layer.out_channels * factor,
                    spatial_change=layer.spatial_change,
                    cost=CostVector(
                        flops=layer.cost.flops * factor * factor,
                        params=layer.cost.params * factor * factor,
                        latency_us=dict(layer.cost.latency_us),
                    ),
                )
            )
        edges = set(base.edges)
        graph_outputs = list(base.graph_outputs)
        # light depth perturbation: tack an activation onto one former sink
        if rng.random() < 0.5:
            tail_of = rng.choice(sorted(base.graph_outputs))
            width = base.layers[tail_of].out_channels * factor
            extra = Layer(
                id=f"{tail_of}_act", kind="act", in_channels=width, out_channels=width
            )
            layers.append(extra)
            edges.add((tail_of, extra.id))
            graph_outputs = [
                extra.id if g == tail_of else g for g in graph_outputs
            ]
        pool.append(
            Network(
                name=f"{base.name}-v{v}",
                layers=layers,
                edges=edges,
                graph_inputs=base.graph_inputs,
                graph_outputs=graph_outputs,
            )
        )
    return pool
