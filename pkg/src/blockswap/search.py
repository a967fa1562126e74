"""Replacement-plan search: greedy seeding plus simulated annealing, with
an exhaustive oracle for small instances.

Feasibility means the teacher regions targeted by the chosen alternatives
are pairwise disjoint. Score state is cached incrementally and must always
equal a cold recomputation.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cost_profile import Profile, incremental_metric
from .errors import TooLarge
from .graph_ir import canonical_bytes, frac_to_str
from .model_house import ModelHouse


@dataclass(frozen=True)
class Solution:
    plan: frozenset[str]
    cached_metric: Fraction
    cached_dacc_sum: Fraction
    occupied: frozenset[str]

    def score(self, profile: Profile) -> Fraction:
        return (
            max(Fraction(1), self.cached_metric / profile.requirement)
            + profile.lam * self.cached_dacc_sum
        )


@dataclass(frozen=True)
class AnnealConfig:
    iterations: int = 5000
    initial_temperature: Fraction = Fraction(1)
    cooling: Fraction = Fraction(97, 100)
    cooling_interval: int = 50
    restarts: int = 1
    seed: int = 0
    parallel: bool = False
    # when > 0, a neighbor move retries this many infeasible draws instead
    # of stopping at the first one
    retry_draws: int = 0
    record_trace: bool = True


def empty_solution(profile: Profile) -> Solution:
    return Solution(
        plan=frozenset(),
        cached_metric=profile.teacher_metric,
        cached_dacc_sum=Fraction(0),
        occupied=frozenset(),
    )


def _with_added(sol: Solution, alt_id: str, house: ModelHouse, profile: Profile) -> Solution:
    alt = house.alternatives[alt_id]
    target = house.teacher_subnets[alt.target_id]
    return Solution(
        plan=sol.plan | {alt_id},
        cached_metric=sol.cached_metric
        + profile.metric_of(alt_id)
        - profile.metric_of(alt.target_id),
        cached_dacc_sum=sol.cached_dacc_sum + profile.dacc_of(alt_id),
        occupied=sol.occupied | target.layer_ids,
    )


def _without(sol: Solution, alt_id: str, house: ModelHouse, profile: Profile) -> Solution:
    alt = house.alternatives[alt_id]
    target = house.teacher_subnets[alt.target_id]
    return Solution(
        plan=sol.plan - {alt_id},
        cached_metric=sol.cached_metric
        - profile.metric_of(alt_id)
        + profile.metric_of(alt.target_id),
        cached_dacc_sum=sol.cached_dacc_sum - profile.dacc_of(alt_id),
        occupied=sol.occupied - target.layer_ids,
    )


def can_add(sol: Solution, alt_id: str, house: ModelHouse) -> bool:
    if alt_id in sol.plan:
        return False
    target = house.target_of(alt_id)
    return not (target.layer_ids & sol.occupied)


def is_feasible(plan: frozenset[str], house: ModelHouse) -> bool:
    """Cold feasibility check: targeted teacher regions pairwise disjoint."""
    seen: set[str] = set()
    for alt_id in sorted(plan):
        members = house.target_of(alt_id).layer_ids
        if members & seen:
            return False
        seen |= members
    return True


def solution_from_plan(
    plan: frozenset[str], house: ModelHouse, profile: Profile
) -> Solution:
    occupied = frozenset().union(
        *(house.target_of(a).layer_ids for a in plan)
    ) if plan else frozenset()
    return Solution(
        plan=frozenset(plan),
        cached_metric=incremental_metric(profile, plan, house),
        cached_dacc_sum=sum((profile.dacc_of(a) for a in plan), Fraction(0)),
        occupied=occupied,
    )


def greedy_init(house: ModelHouse, profile: Profile) -> Solution:
    """Steepest descent: repeatedly add the feasible alternative with the
    best score decrease, lexicographic id as tie-break, until no addition
    improves the score."""
    sol = empty_solution(profile)
    alt_ids = house.sorted_alt_ids()
    while True:
        best_id = None
        best_score = sol.score(profile)
        for alt_id in alt_ids:
            if not can_add(sol, alt_id, house):
                continue
            cand = _with_added(sol, alt_id, house, profile)
            cand_score = cand.score(profile)
            if cand_score < best_score:
                best_score = cand_score
                best_id = alt_id
        if best_id is None:
            return sol
        sol = _with_added(sol, best_id, house, profile)


def neighbor(
    sol: Solution,
    house: ModelHouse,
    profile: Profile,
    rng: random.Random,
    retry_draws: int = 0,
) -> Solution:
    """Remove one uniformly random plan member (skip when empty), then add
    uniformly drawn alternatives until a draw would break feasibility; that
    draw is discarded. ``retry_draws`` > 0 tolerates that many bad draws
    before stopping."""
    cand = sol
    if cand.plan:
        victim = rng.choice(sorted(cand.plan))
        cand = _without(cand, victim, house, profile)
    alt_ids = house.sorted_alt_ids()
    if not alt_ids:
        return cand
    misses = 0
    while True:
        pick = alt_ids[rng.randrange(len(alt_ids))]
        if can_add(cand, pick, house):
            cand = _with_added(cand, pick, house, profile)
            continue
        misses += 1
        if misses > retry_draws:
            return cand


def random_feasible_plan(
    house: ModelHouse, profile: Profile, rng: random.Random
) -> Solution:
    """Uniform random feasible plan via the neighbor move from empty."""
    return neighbor(empty_solution(profile), house, profile, rng)


def _chain_seed(seed: int, chain: int) -> int:
    return seed * 1_000_003 + chain


def _run_chain(
    house: ModelHouse,
    profile: Profile,
    config: AnnealConfig,
    chain: int,
    init: Solution,
) -> tuple[Solution, list[dict]]:
    # Hot loop works on integer-scaled scores: every per-alternative score
    # contribution is a rational, so multiplying through by the common
    # denominator turns all score comparisons into exact int comparisons.
    # The RNG draw sequence matches the Solution-based neighbor() move.
    rng = random.Random(_chain_seed(config.seed, chain))
    alt_ids = house.sorted_alt_ids()
    base_q = profile.teacher_metric / profile.requirement
    alt_q = {}
    alt_v = {}
    occ_of = {}
    for alt_id in alt_ids:
        alt = house.alternatives[alt_id]
        alt_q[alt_id] = (
            profile.metric_of(alt_id) - profile.metric_of(alt.target_id)
        ) / profile.requirement
        alt_v[alt_id] = profile.lam * profile.dacc_of(alt_id)
        occ_of[alt_id] = house.teacher_subnets[alt.target_id].layer_ids
    scale = math.lcm(
        base_q.denominator,
        *(q.denominator for q in alt_q.values()),
        *(v.denominator for v in alt_v.values()),
    )
    base_mq = int(base_q * scale)
    dq = {a: int(q * scale) for a, q in alt_q.items()}
    dv = {a: int(v * scale) for a, v in alt_v.items()}

    def score_int(mq: int, vsum: int) -> int:
        return max(scale, mq) + vsum

    plan = set(init.plan)
    occupied = set(init.occupied)
    mq = base_mq + sum(dq[a] for a in plan)
    vsum = sum(dv[a] for a in plan)
    current_score = score_int(mq, vsum)
    best_score = current_score
    best_plan = sorted(plan)
    trace: list[dict] = []
    temperature = config.initial_temperature
    cool_rate = -1.0 / (scale * float(temperature))
    n_alts = len(alt_ids)
    rand = rng.random
    exp = math.exp
    for it in range(config.iterations):
        if it and it % config.cooling_interval == 0:
            temperature *= config.cooling
            cool_rate = -1.0 / (scale * float(temperature))
        # neighbor move: drop one member, then add until a draw conflicts
        cand_plan = set(plan)
        cand_occ = set(occupied)
        cand_mq = mq
        cand_vsum = vsum
        if cand_plan:
            victim = sorted(cand_plan)[int(rand() * len(cand_plan))]
            cand_plan.discard(victim)
            cand_occ -= occ_of[victim]
            cand_mq -= dq[victim]
            cand_vsum -= dv[victim]
        misses = 0
        while n_alts:
            pick = alt_ids[int(rand() * n_alts)]
            if pick not in cand_plan and not (occ_of[pick] & cand_occ):
                cand_plan.add(pick)
                cand_occ |= occ_of[pick]
                cand_mq += dq[pick]
                cand_vsum += dv[pick]
                continue
            misses += 1
            if misses > config.retry_draws:
                break
        cand_score = score_int(cand_mq, cand_vsum)
        delta = cand_score - current_score
        if delta <= 0:
            accepted = True
        else:
            accepted = rand() < exp(delta * cool_rate)
        if accepted:
            plan, occupied = cand_plan, cand_occ
            mq, vsum = cand_mq, cand_vsum
            current_score = cand_score
            if (cand_score, sorted(cand_plan)) < (best_score, best_plan):
                best_score = cand_score
                best_plan = sorted(cand_plan)
        if config.record_trace:
            trace.append(
                {
                    "chain": chain,
                    "iteration": it,
                    "temperature": frac_to_str(temperature),
                    "score": frac_to_str(Fraction(cand_score, scale)),
                    "accepted": accepted,
                }
            )
    return solution_from_plan(frozenset(best_plan), house, profile), trace


def anneal(
    house: ModelHouse, profile: Profile, config: AnnealConfig
) -> tuple[Solution, list[dict]]:
    """Simulated annealing from the greedy seed. Returns the best feasible
    solution ever seen plus a per-iteration trace. Restart chains use
    derived seeds; the merge picks the minimum score with a deterministic
    tie-break, so parallel and serial runs agree."""
    init = greedy_init(house, profile)
    chains = max(1, config.restarts)
    if config.iterations <= 0:
        return init, []
    runs: list[tuple[Solution, list[dict]]]
    if config.parallel and chains > 1:
        with ThreadPoolExecutor(max_workers=min(chains, 8)) as pool:
            futures = [
                pool.submit(_run_chain, house, profile, config, c, init)
                for c in range(chains)
            ]
            runs = [f.result() for f in futures]
    else:
        runs = [_run_chain(house, profile, config, c, init) for c in range(chains)]

    best, _ = min(runs, key=lambda r: (r[0].score(profile), sorted(r[0].plan)))
    init_score = init.score(profile)
    if (init_score, sorted(init.plan)) < (best.score(profile), sorted(best.plan)):
        best = init
    trace = [entry for _, t in runs for entry in t]
    return best, trace


def exhaustive_search(
    house: ModelHouse, profile: Profile, cap: int = 16
) -> Solution:
    """Enumerate every feasible subset of alternatives and return the
    score-minimal one (ties to the lexicographically least plan)."""
    alt_ids = house.sorted_alt_ids()
    if len(alt_ids) > cap:
        raise TooLarge(f"{len(alt_ids)} alternatives exceeds cap {cap}")
    best = empty_solution(profile)
    best_key = (best.score(profile), sorted(best.plan))

    def recurse(idx: int, sol: Solution):
        nonlocal best, best_key
        key = (sol.score(profile), sorted(sol.plan))
        if key < best_key:
            best, best_key = sol, key
        for j in range(idx, len(alt_ids)):
            if can_add(sol, alt_ids[j], house):
                recurse(j + 1, _with_added(sol, alt_ids[j], house, profile))

    recurse(0, best)
    return best


def plan_to_obj(sol: Solution, profile: Profile) -> dict:
    return {
        "plan": sorted(sol.plan),
        "score": frac_to_str(sol.score(profile)),
        "metric": frac_to_str(sol.cached_metric),
        "dacc_sum": frac_to_str(sol.cached_dacc_sum),
    }


def serialize_plan(sol: Solution, profile: Profile) -> bytes:
    return canonical_bytes(plan_to_obj(sol, profile))


def trace_to_jsonl(trace: list[dict]) -> bytes:
    lines = [json.dumps(entry, sort_keys=True) for entry in trace]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
