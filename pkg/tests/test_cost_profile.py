import random
from fractions import Fraction

import pytest

from blockswap import cost_profile as cp
from blockswap import model_house as mh
from blockswap import rewrite as rw
from blockswap import search as se
from blockswap.errors import SchemaViolation, UnknownAlternative

from conftest import make_house, make_profile


def toy_profile(house, teacher_metric, requirement, lam, metrics, dacc):
    return cp.Profile(
        metric_name="flops",
        teacher_metric=Fraction(teacher_metric),
        requirement=Fraction(requirement),
        lam=Fraction(lam),
        subnet_metrics={k: Fraction(v) for k, v in metrics.items()},
        dacc={k: Fraction(v) for k, v in dacc.items()},
    )


@pytest.fixture
def two_alt_setup():
    house = make_house(seed=21, n_t=4, n_p=6)
    tids = sorted(house.teacher_subnets)
    aids = sorted(house.alternatives)
    return house, tids, aids


def test_incremental_metric_arithmetic(two_alt_setup):
    house, tids, aids = two_alt_setup
    pretrained = [
        a for a in aids if house.alternatives[a].origin == "pretrained"
    ][:2]
    assert len(pretrained) == 2
    a1, a2 = pretrained
    metrics = {a1: 30, a2: 20, house.alternatives[a1].target_id: 12,
               house.alternatives[a2].target_id: 9}
    # give every other id a metric so coverage holds
    for k in tids + aids:
        metrics.setdefault(k, 1)
    # teacher 100, A1: 30 replaces 12... reversed: plan adds alt and removes target
    profile = toy_profile(house, 100, 80, 1, metrics, {k: 0 for k in aids})
    got = cp.incremental_metric(profile, [a1, a2], house)
    t1 = house.alternatives[a1].target_id
    t2 = house.alternatives[a2].target_id
    assert got == 100 + (30 - metrics[t1]) + (20 - metrics[t2])


def test_incremental_metric_empty_plan(two_alt_setup):
    house, tids, aids = two_alt_setup
    profile = toy_profile(house, 100, 80, 1, {k: 1 for k in tids + aids}, {k: 0 for k in aids})
    assert cp.incremental_metric(profile, [], house) == 100


def test_identity_alternative_is_metric_neutral(two_alt_setup):
    house, tids, aids = two_alt_setup
    ident = next(a for a in aids if house.alternatives[a].origin == "teacher")
    target = house.alternatives[ident].target_id
    metrics = {k: 1 for k in tids + aids}
    metrics[ident] = 17
    metrics[target] = 17
    profile = toy_profile(house, 100, 80, 1, metrics, {k: 0 for k in aids})
    assert cp.incremental_metric(profile, [ident], house) == 100


def test_unknown_alternative(two_alt_setup):
    house, tids, aids = two_alt_setup
    profile = toy_profile(house, 100, 80, 1, {k: 1 for k in tids + aids}, {k: 0 for k in aids})
    with pytest.raises(UnknownAlternative):
        cp.incremental_metric(profile, ["nope"], house)
    with pytest.raises(UnknownAlternative):
        cp.score(profile, ["nope"], house)


def test_score_examples(two_alt_setup):
    house, tids, aids = two_alt_setup
    a1 = next(a for a in aids if house.alternatives[a].origin == "pretrained")
    t1 = house.alternatives[a1].target_id
    metrics = {k: 1 for k in tids + aids}
    metrics[t1] = 30
    metrics[a1] = 1  # teacher 100 -> plan metric 71
    dacc = {k: Fraction(0) for k in aids}
    dacc[a1] = Fraction(5, 100)
    profile = toy_profile(house, 100, 80, 1, metrics, dacc)
    assert cp.score(profile, [a1], house) == Fraction(105, 100)
    profile = toy_profile(house, 100, 50, 1, metrics, dacc)
    assert cp.score(profile, [a1], house) == Fraction(142, 100) + Fraction(5, 100)


def test_score_empty_plan_at_budget(two_alt_setup):
    house, tids, aids = two_alt_setup
    profile = toy_profile(house, 100, 100, 1, {k: 1 for k in tids + aids}, {k: 0 for k in aids})
    assert cp.score(profile, [], house) == 1


def test_synth_identity_dacc_zero():
    house = make_house(seed=22, n_p=6)
    profile = make_profile(house)
    for aid, alt in house.alternatives.items():
        if alt.origin == "teacher":
            assert profile.dacc[aid] == 0


def test_synth_determinism():
    house = make_house(seed=23, n_p=6)
    a = cp.serialize_profile(make_profile(house, seed=5))
    b = cp.serialize_profile(make_profile(house, seed=5))
    assert a == b


def test_synth_zero_reduction_zero_dacc():
    house = make_house(seed=24, n_p=6)
    profile = make_profile(house)
    for aid, alt in house.alternatives.items():
        if profile.subnet_metrics[aid] >= profile.subnet_metrics[alt.target_id]:
            assert profile.dacc[aid] == 0


def test_profile_roundtrip():
    house = make_house(seed=25, n_p=4)
    profile = make_profile(house)
    data = cp.serialize_profile(profile)
    back = cp.parse_profile(data)
    assert cp.serialize_profile(back) == data


def test_profile_schema_violation():
    with pytest.raises(SchemaViolation):
        cp.parse_profile(b'{"metric_name": "flops"}')


def test_profile_covers_house():
    house = make_house(seed=26, n_p=8, n_expand=4)
    profile = make_profile(house)
    for aid in house.alternatives:
        assert aid in profile.subnet_metrics
        assert aid in profile.dacc
    for tid in house.teacher_subnets:
        assert tid in profile.subnet_metrics


def test_additivity_against_rewrite():
    # incremental evaluation equals the cold layer-cost sum of the
    # rewritten graph whenever metrics are member-layer sums
    rng = random.Random(31)
    checked = 0
    for seed in range(6):
        house = make_house(seed=40 + seed, n_p=8, n_expand=4)
        profile = make_profile(house)
        for _ in range(30):
            sol = se.random_feasible_plan(house, profile, rng)
            student, _ = rw.apply_plan(house, sol.plan)
            cold = sum(l.cost.flops for l in student.layers.values())
            assert cp.incremental_metric(profile, sol.plan, house) == cold
            checked += 1
    assert checked == 180


def test_score_monotonicity(two_alt_setup):
    house, tids, aids = two_alt_setup
    a1 = next(a for a in aids if house.alternatives[a].origin == "pretrained")
    metrics = {k: 10 for k in tids + aids}
    base_dacc = {k: Fraction(1, 100) for k in aids}
    lo = toy_profile(house, 100, 50, 1, metrics, base_dacc)
    hi_dacc = dict(base_dacc)
    hi_dacc[a1] = Fraction(2, 100)
    hi = toy_profile(house, 100, 50, 1, metrics, hi_dacc)
    assert cp.score(hi, [a1], house) > cp.score(lo, [a1], house)


def test_argmin_invariance_under_scaling():
    house = make_house(seed=27, n_p=8)
    profile = make_profile(house)
    scaled = cp.Profile(
        metric_name=profile.metric_name,
        teacher_metric=profile.teacher_metric * 7,
        requirement=profile.requirement * 7,
        lam=profile.lam,
        subnet_metrics={k: v * 7 for k, v in profile.subnet_metrics.items()},
        dacc=profile.dacc,
    )
    rng = random.Random(33)
    plans = [se.random_feasible_plan(house, profile, rng).plan for _ in range(40)]
    for p1 in plans:
        for p2 in plans:
            s1 = (cp.score(profile, p1, house), cp.score(profile, p2, house))
            s2 = (cp.score(scaled, p1, house), cp.score(scaled, p2, house))
            assert (s1[0] < s1[1]) == (s2[0] < s2[1])
