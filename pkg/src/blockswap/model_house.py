"""Model-house assembly: teacher sub-network sampling, alternative
harvesting from pretrained networks, target mapping, and channel masks.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from .enumeration import eligible_starts, modified_dfs
from .errors import (
    EmptyPretrainedSet,
    MaskLengthMismatch,
    NoSubnetFound,
)
from .graph_ir import (
    CostVector,
    Network,
    SubNetwork,
    canonical_bytes,
    cost_from_obj,
    cost_to_obj,
    frac_from_str,
    frac_to_str,
    network_from_obj,
    network_to_obj,
    subnetwork_from_layers,
    subnetwork_from_obj,
    subnetwork_to_obj,
)

log = logging.getLogger(__name__)

SAMPLING_RETRIES = 32
CONSTRUCT_ATTEMPT_FACTOR = 50


@dataclass(frozen=True)
class ChannelMask:
    """Boolean keep-vectors over an alternative's boundary channels."""

    keep_in: tuple[bool, ...]
    keep_out: tuple[bool, ...]

    def __post_init__(self):
        if sum(self.keep_in) < 1 or sum(self.keep_out) < 1:
            raise ValueError("masks must keep at least one channel per boundary")

    @property
    def in_popcount(self) -> int:
        return sum(self.keep_in)

    @property
    def out_popcount(self) -> int:
        return sum(self.keep_out)


@dataclass(frozen=True)
class Alternative:
    subnet: SubNetwork
    origin: str  # teacher | pretrained | expanded
    target_id: str
    mask: Optional[ChannelMask] = None


@dataclass(frozen=True)
class HouseParams:
    n_t: int = 100
    n_p: int = 200
    n_expand: int = 200
    r: Fraction = Fraction(3, 10)
    min_size: int = 1
    seed: int = 0


@dataclass
class ModelHouse:
    teacher: Network
    teacher_subnets: dict[str, SubNetwork]
    alternatives: dict[str, Alternative]
    params: HouseParams
    # source networks referenced by alternatives, needed to materialize
    # their layers at rewrite time; keyed by network name
    sources: dict[str, Network] = field(default_factory=dict)

    def target_of(self, alt_id: str) -> SubNetwork:
        return self.teacher_subnets[self.alternatives[alt_id].target_id]

    def sorted_alt_ids(self) -> list[str]:
        return sorted(self.alternatives)


def first_k_mask(width: int, k: int) -> tuple[bool, ...]:
    return tuple(i < k for i in range(width))


def top_k_mask(width: int, k: int, scores: Sequence[float]) -> tuple[bool, ...]:
    if len(scores) != width:
        raise MaskLengthMismatch(f"{len(scores)} scores for width {width}")
    ranked = sorted(range(width), key=lambda i: (-scores[i], i))
    keep = set(ranked[:k])
    return tuple(i in keep for i in range(width))


def mask_for_target(alt: SubNetwork, target: SubNetwork) -> Optional[ChannelMask]:
    """Keep-first-k default mask reconciling the alternative's boundary with
    its target; None when widths already match."""
    if alt.in_channels == target.in_channels and alt.out_channels == target.out_channels:
        return None
    return ChannelMask(
        keep_in=first_k_mask(alt.in_channels, target.in_channels),
        keep_out=first_k_mask(alt.out_channels, target.out_channels),
    )


def masked_cost(cost: CostVector, in_ratio: Fraction, out_ratio: Fraction) -> CostVector:
    """Linear cost rescale by the kept-channel fractions; latency is left
    untouched (a profile may override it)."""
    return CostVector(
        flops=math.floor(cost.flops * in_ratio * out_ratio),
        params=math.floor(cost.params * in_ratio * out_ratio),
        latency_us=dict(cost.latency_us),
    )


def apply_mask(alt: Alternative) -> SubNetwork:
    """Masked view of the alternative's sub-network: boundary channels
    reduced to mask popcounts, flops/params rescaled linearly."""
    if alt.mask is None:
        raise MaskLengthMismatch("alternative has no mask")
    sn = alt.subnet
    if len(alt.mask.keep_in) != sn.in_channels or len(alt.mask.keep_out) != sn.out_channels:
        raise MaskLengthMismatch(
            f"mask widths {len(alt.mask.keep_in)}/{len(alt.mask.keep_out)} vs "
            f"boundary {sn.in_channels}/{sn.out_channels}"
        )
    pin, pout = alt.mask.in_popcount, alt.mask.out_popcount
    return replace(
        sn,
        in_channels=pin,
        out_channels=pout,
        cost=masked_cost(
            sn.cost, Fraction(pin, sn.in_channels), Fraction(pout, sn.out_channels)
        ),
    )


def effective_subnet(alt: Alternative) -> SubNetwork:
    return apply_mask(alt) if alt.mask is not None else alt.subnet


def boundary_ratios(alt: Alternative, sources: dict[str, Network]) -> tuple[Fraction, Fraction]:
    """Kept-channel fractions of the alternative's effective boundary
    relative to the layer widths in its source network."""
    source = sources[alt.subnet.source]
    eff = effective_subnet(alt)
    src_in = source.layers[alt.subnet.input_layer].in_channels
    src_out = source.layers[alt.subnet.output_layer].out_channels
    return Fraction(eff.in_channels, src_in), Fraction(eff.out_channels, src_out)


def scaled_member_cost(
    source: Network,
    member_ids: frozenset[str],
    in_ratio: Fraction,
    out_ratio: Fraction,
) -> CostVector:
    """Per-layer linear cost rescale (floored per layer) summed over the
    members; the same rule the rewrite applies to each copied layer, so
    profile sums and rewritten-graph sums agree exactly."""
    total = CostVector()
    scale = in_ratio * out_ratio
    for lid in sorted(member_ids):
        cost = source.layers[lid].cost
        total = total + CostVector(
            flops=math.floor(cost.flops * scale),
            params=math.floor(cost.params * scale),
            latency_us=dict(cost.latency_us),
        )
    return total


def effective_cost(alt: Alternative, sources: dict[str, Network]) -> CostVector:
    """Cost of the alternative as it will be materialized by the rewrite."""
    in_ratio, out_ratio = boundary_ratios(alt, sources)
    source = sources[alt.subnet.source]
    return scaled_member_cost(source, alt.subnet.layer_ids, in_ratio, out_ratio)


def is_compatible(alt: SubNetwork, target: SubNetwork) -> bool:
    """Equal spatial change, channel dominance on both boundaries."""
    return (
        alt.spatial_change == target.spatial_change
        and alt.in_channels >= target.in_channels
        and alt.out_channels >= target.out_channels
    )


def subnet_sampling(
    net: Network,
    r: Fraction,
    min_size: int,
    rng: random.Random,
    start: Optional[str] = None,
) -> SubNetwork:
    """Sample one sub-network: uniform eligible start, modified DFS, keep
    the first ceil(r*m) closure pairs by pop order (those close to the
    start), filter by minimum size, pick uniformly. Retries with new starts
    up to a fixed budget."""
    starts = eligible_starts(net)
    if not starts:
        raise NoSubnetFound(f"{net.name}: no layer has a single inbound connection")
    for _ in range(SAMPLING_RETRIES):
        s = start if start is not None else rng.choice(starts)
        pairs = modified_dfs(net, s)
        m = len(pairs)
        if m:
            prefix = pairs[: math.ceil(r * m)]
            candidates = [p for p in prefix if len(p.member_ids) >= min_size]
            if candidates:
                pick = rng.choice(candidates)
                return subnetwork_from_layers(net, pick.member_ids)
        if start is not None:
            break
    raise NoSubnetFound(f"{net.name}: no sub-network of size >= {min_size} found")


def construct(
    teacher: Network,
    pretrained: Sequence[Network],
    params: HouseParams,
    rng: Optional[random.Random] = None,
) -> ModelHouse:
    """Build the model house: sample up to n_t distinct teacher
    sub-networks, register each as its own identity alternative, then
    harvest up to n_p compatible sub-networks from the pretrained pool,
    recording the target map and attaching masks where channels exceed the
    target's."""
    if params.n_p > 0 and not pretrained:
        raise EmptyPretrainedSet("n_p > 0 requires at least one pretrained network")
    rng = rng if rng is not None else random.Random(params.seed)

    teacher_subnets: dict[str, SubNetwork] = {}
    seen: set[frozenset[str]] = set()
    attempts = 0
    cap = CONSTRUCT_ATTEMPT_FACTOR * max(params.n_t, 1)
    while len(teacher_subnets) < params.n_t and attempts < cap:
        attempts += 1
        try:
            sn = subnet_sampling(teacher, params.r, params.min_size, rng)
        except NoSubnetFound:
            continue
        if sn.layer_ids in seen:
            continue
        seen.add(sn.layer_ids)
        teacher_subnets[f"t{len(teacher_subnets):04d}"] = sn
    if len(teacher_subnets) < params.n_t:
        log.warning(
            "teacher sampling shortfall: %d of %d sub-networks",
            len(teacher_subnets),
            params.n_t,
        )

    alternatives: dict[str, Alternative] = {}
    for tid, sn in teacher_subnets.items():
        alternatives[f"a{len(alternatives):04d}"] = Alternative(
            subnet=sn, origin="teacher", target_id=tid, mask=None
        )

    sources = {teacher.name: teacher}
    tids = sorted(teacher_subnets)
    harvested = 0
    attempts = 0
    cap = CONSTRUCT_ATTEMPT_FACTOR * params.n_p
    while harvested < params.n_p and attempts < cap:
        attempts += 1
        target_id = rng.choice(tids) if tids else None
        if target_id is None:
            break
        target = teacher_subnets[target_id]
        pool_net = rng.choice(pretrained)
        try:
            cand = subnet_sampling(pool_net, params.r, params.min_size, rng)
        except NoSubnetFound:
            continue
        if not is_compatible(cand, target):
            continue
        alternatives[f"a{len(alternatives):04d}"] = Alternative(
            subnet=cand,
            origin="pretrained",
            target_id=target_id,
            mask=mask_for_target(cand, target),
        )
        sources[pool_net.name] = pool_net
        harvested += 1
    if harvested < params.n_p:
        log.warning("alternative harvest shortfall: %d of %d", harvested, params.n_p)

    return ModelHouse(
        teacher=teacher,
        teacher_subnets=teacher_subnets,
        alternatives=alternatives,
        params=params,
        sources=sources,
    )


def expand(
    house: ModelHouse,
    n_expand: int,
    scores: Optional[dict[str, dict[str, Sequence[float]]]] = None,
    rng: Optional[random.Random] = None,
) -> ModelHouse:
    """Grow the alternative set with pruned clones of existing
    alternatives.

    Per boundary of width c a kept-channel count k is drawn uniformly from
    [ceil(c/2), c] and widened to at least the target's width; the clone's
    boundary is narrowed to k channels (cost rescaled linearly), and a
    fresh mask down to the target width is attached when k still exceeds
    it. Keep-sets come from per-alternative score tables when supplied
    (``scores[alt_id]["in"|"out"]``), else channels are kept first-k.
    """
    if n_expand == 0:
        return house
    rng = rng if rng is not None else random.Random(house.params.seed + 1)
    alternatives = dict(house.alternatives)
    base_ids = sorted(house.alternatives)
    counter = len(alternatives)
    for _ in range(n_expand):
        base_id = rng.choice(base_ids)
        base = house.alternatives[base_id]
        target = house.teacher_subnets[base.target_id]
        sn = effective_subnet(base)

        def draw_keep(width: int, floor_width: int, table) -> tuple[bool, ...]:
            k = rng.randint(math.ceil(width / 2), width)
            k = max(k, floor_width)
            if table is not None:
                return top_k_mask(width, k, table)
            return first_k_mask(width, k)

        tab = scores.get(base_id, {}) if scores else {}
        keep_in = draw_keep(sn.in_channels, target.in_channels, tab.get("in"))
        keep_out = draw_keep(sn.out_channels, target.out_channels, tab.get("out"))
        kin, kout = sum(keep_in), sum(keep_out)
        source = house.sources[sn.source]
        pruned = replace(
            sn,
            in_channels=kin,
            out_channels=kout,
            cost=scaled_member_cost(
                source,
                sn.layer_ids,
                Fraction(kin, source.layers[sn.input_layer].in_channels),
                Fraction(kout, source.layers[sn.output_layer].out_channels),
            ),
        )
        alternatives[f"a{counter:04d}"] = Alternative(
            subnet=pruned,
            origin="expanded",
            target_id=base.target_id,
            mask=mask_for_target(pruned, target),
        )
        counter += 1
    return ModelHouse(
        teacher=house.teacher,
        teacher_subnets=house.teacher_subnets,
        alternatives=alternatives,
        params=house.params,
        sources=house.sources,
    )


# ---------------------------------------------------------------------------
# serialization

def house_to_obj(house: ModelHouse) -> dict:
    return {
        "teacher": network_to_obj(house.teacher),
        "teacher_subnets": {
            tid: subnetwork_to_obj(sn) for tid, sn in sorted(house.teacher_subnets.items())
        },
        "alternatives": [
            {
                "id": aid,
                "origin": alt.origin,
                "target_id": alt.target_id,
                "source_network": alt.subnet.source,
                "member_ids": sorted(alt.subnet.layer_ids),
                "input_layer": alt.subnet.input_layer,
                "output_layer": alt.subnet.output_layer,
                "in_channels": alt.subnet.in_channels,
                "out_channels": alt.subnet.out_channels,
                "spatial_change": {
                    "num": alt.subnet.spatial_change.numerator,
                    "den": alt.subnet.spatial_change.denominator,
                },
                "cost": cost_to_obj(alt.subnet.cost),
                "mask": None
                if alt.mask is None
                else {
                    "keep_in": [int(b) for b in alt.mask.keep_in],
                    "keep_out": [int(b) for b in alt.mask.keep_out],
                },
            }
            for aid, alt in sorted(house.alternatives.items())
        ],
        "params": {
            "n_t": house.params.n_t,
            "n_p": house.params.n_p,
            "n_expand": house.params.n_expand,
            "r": frac_to_str(house.params.r),
            "min_size": house.params.min_size,
            "seed": house.params.seed,
        },
        "sources": {
            name: network_to_obj(net) for name, net in sorted(house.sources.items())
        },
    }


def serialize_house(house: ModelHouse) -> bytes:
    return canonical_bytes(house_to_obj(house))


def house_from_obj(obj: dict) -> ModelHouse:
    params = HouseParams(
        n_t=obj["params"]["n_t"],
        n_p=obj["params"]["n_p"],
        n_expand=obj["params"]["n_expand"],
        r=frac_from_str(obj["params"]["r"]),
        min_size=obj["params"]["min_size"],
        seed=obj["params"]["seed"],
    )
    alternatives = {}
    for entry in obj["alternatives"]:
        sn = SubNetwork(
            source=entry["source_network"],
            layer_ids=frozenset(entry["member_ids"]),
            input_layer=entry["input_layer"],
            output_layer=entry["output_layer"],
            in_channels=entry["in_channels"],
            out_channels=entry["out_channels"],
            spatial_change=Fraction(
                entry["spatial_change"]["num"], entry["spatial_change"]["den"]
            ),
            cost=cost_from_obj(entry["cost"]),
        )
        mask = None
        if entry["mask"] is not None:
            mask = ChannelMask(
                keep_in=tuple(bool(b) for b in entry["mask"]["keep_in"]),
                keep_out=tuple(bool(b) for b in entry["mask"]["keep_out"]),
            )
        alternatives[entry["id"]] = Alternative(
            subnet=sn, origin=entry["origin"], target_id=entry["target_id"], mask=mask
        )
    return ModelHouse(
        teacher=network_from_obj(obj["teacher"]),
        teacher_subnets={
            tid: subnetwork_from_obj(o) for tid, o in obj["teacher_subnets"].items()
        },
        alternatives=alternatives,
        params=params,
        sources={name: network_from_obj(o) for name, o in obj["sources"].items()},
    )


def parse_house(data: bytes) -> ModelHouse:
    import json

    from .errors import MalformedDocument

    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(str(exc)) from exc
    return house_from_obj(obj)
