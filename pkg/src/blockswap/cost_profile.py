"""Metric and accuracy-loss profiles plus the incremental plan evaluator.

All arithmetic is exact rational: the incremental metric must equal a cold
recomputation, not approximate it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import MalformedDocument, SchemaViolation, UnknownAlternative
from .graph_ir import canonical_bytes, frac_from_str, frac_to_str
from .model_house import ModelHouse, effective_cost, effective_subnet


@dataclass(frozen=True)
class Profile:
    metric_name: str
    teacher_metric: Fraction
    requirement: Fraction
    lam: Fraction
    subnet_metrics: dict[str, Fraction] = field(default_factory=dict)
    dacc: dict[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.teacher_metric <= 0:
            raise ValueError("teacher metric must be positive")
        if self.requirement <= 0:
            raise ValueError("requirement must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")

    def metric_of(self, key: str) -> Fraction:
        try:
            return self.subnet_metrics[key]
        except KeyError:
            raise UnknownAlternative(key) from None

    def dacc_of(self, alt_id: str) -> Fraction:
        try:
            return self.dacc[alt_id]
        except KeyError:
            raise UnknownAlternative(alt_id) from None


def incremental_metric(
    profile: Profile, plan: Iterable[str], house: ModelHouse
) -> Fraction:
    """metric(teacher) + sum over the plan of metric(alt) - metric(target)."""
    total = profile.teacher_metric
    for alt_id in plan:
        if alt_id not in house.alternatives:
            raise UnknownAlternative(alt_id)
        total += profile.metric_of(alt_id)
        total -= profile.metric_of(house.alternatives[alt_id].target_id)
    return total


def score(profile: Profile, plan: Iterable[str], house: ModelHouse) -> Fraction:
    """Budget-pressure term plus weighted accuracy loss; lower is better."""
    plan = list(plan)
    metric = incremental_metric(profile, plan, house)
    dacc_sum = sum((profile.dacc_of(a) for a in plan), Fraction(0))
    return max(Fraction(1), metric / profile.requirement) + profile.lam * dacc_sum


def cost_metric(cost, metric_name: str) -> Fraction:
    """Read one metric component off a cost summary."""
    if metric_name == "flops":
        return Fraction(cost.flops)
    if metric_name == "params":
        return Fraction(cost.params)
    if metric_name.startswith("latency_us:"):
        dev = metric_name.split(":", 1)[1]
        return cost.latency_us.get(dev, Fraction(0))
    raise ValueError(f"unknown metric {metric_name!r}")


def synth_profile(
    house: ModelHouse,
    requirement: Fraction,
    lam: Fraction = Fraction(1),
    metric_name: str = "flops",
    dacc_max: Fraction = Fraction(1, 20),
    seed: int = 0,
    rng: Optional[random.Random] = None,
) -> Profile:
    """Deterministic stand-in for hardware measurement: metrics are
    member-layer cost sums; accuracy losses are uniform in [0, dacc_max]
    scaled by each alternative's cost-reduction ratio, and exactly zero for
    identity (teacher-origin) alternatives."""
    rng = rng if rng is not None else random.Random(seed)
    teacher_total = Fraction(0)
    for lid in sorted(house.teacher.layers):
        teacher_total += cost_metric(house.teacher.layers[lid].cost, metric_name)

    metrics: dict[str, Fraction] = {}
    dacc: dict[str, Fraction] = {}
    for tid in sorted(house.teacher_subnets):
        metrics[tid] = cost_metric(house.teacher_subnets[tid].cost, metric_name)
    for aid in sorted(house.alternatives):
        alt = house.alternatives[aid]
        if alt.subnet.source in house.sources:
            metrics[aid] = cost_metric(effective_cost(alt, house.sources), metric_name)
        else:
            metrics[aid] = cost_metric(effective_subnet(alt).cost, metric_name)
        if alt.origin == "teacher":
            dacc[aid] = Fraction(0)
            continue
        target_metric = metrics[alt.target_id]
        if target_metric > 0:
            reduction = max(Fraction(0), 1 - metrics[aid] / target_metric)
        else:
            reduction = Fraction(0)
        u = Fraction(rng.randrange(0, 10**6), 10**6)
        dacc[aid] = u * dacc_max * reduction
    return Profile(
        metric_name=metric_name,
        teacher_metric=teacher_total if teacher_total > 0 else Fraction(1),
        requirement=requirement,
        lam=lam,
        subnet_metrics=metrics,
        dacc=dacc,
    )


# ---------------------------------------------------------------------------
# serialization

def profile_to_obj(profile: Profile) -> dict:
    return {
        "metric_name": profile.metric_name,
        "teacher_metric": frac_to_str(profile.teacher_metric),
        "requirement": frac_to_str(profile.requirement),
        "lambda": frac_to_str(profile.lam),
        "subnet_metrics": {
            k: frac_to_str(v) for k, v in sorted(profile.subnet_metrics.items())
        },
        "dacc": {k: frac_to_str(v) for k, v in sorted(profile.dacc.items())},
    }


def serialize_profile(profile: Profile) -> bytes:
    return canonical_bytes(profile_to_obj(profile))


def parse_profile(data: bytes) -> Profile:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(str(exc)) from exc
    for key in ("metric_name", "teacher_metric", "requirement", "lambda"):
        if key not in obj:
            raise SchemaViolation(f"$.{key}", "missing required field")
    return Profile(
        metric_name=obj["metric_name"],
        teacher_metric=frac_from_str(obj["teacher_metric"]),
        requirement=frac_from_str(obj["requirement"]),
        lam=frac_from_str(obj["lambda"]),
        subnet_metrics={k: frac_from_str(v) for k, v in obj.get("subnet_metrics", {}).items()},
        dacc={k: frac_from_str(v) for k, v in obj.get("dacc", {}).items()},
    )
