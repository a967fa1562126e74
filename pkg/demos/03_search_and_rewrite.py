"""Search for a replacement plan under a budget, then rewrite the graph.

A plan is a feasible set of alternatives (their target regions must not
overlap). Its score is max(1, metric/budget) plus a weighted sum of
accuracy-loss estimates, all in exact rational arithmetic. Greedy descent
seeds simulated annealing; a brute-force search provides ground truth at
this scale.
"""

import random
from fractions import Fraction

from blockswap import cost_profile as cp
from blockswap import model_house as mh
from blockswap import search as se
from blockswap.graph_ir import frac_to_str, validate_network
from blockswap.rewrite import apply_plan, render_dot
from blockswap.synth import NetSpec, gen_network, gen_pool

teacher = gen_network(NetSpec(layers=6, edge_prob=0.25, seed=9, name="teacher"))
pool = gen_pool(teacher, 4, (2, 3), seed=10)
rng = random.Random(9)
house = mh.construct(
    teacher, pool, mh.HouseParams(n_t=5, n_p=8, n_expand=3, r=Fraction(3, 5), seed=9), rng
)
house = mh.expand(house, 3, rng=rng)

# A synthetic profile stands in for hardware measurement: metrics are
# layer cost sums, accuracy losses shrink with the cost reduction.
profile = cp.synth_profile(house, requirement=Fraction(5000), seed=9)
print("teacher metric:", frac_to_str(profile.teacher_metric), "budget: 5000")

greedy = se.greedy_init(house, profile)
best, trace = se.anneal(
    house, profile, se.AnnealConfig(iterations=2000, restarts=4, seed=9)
)
optimum = se.exhaustive_search(house, profile)
for name, sol in [("greedy", greedy), ("anneal", best), ("exhaustive", optimum)]:
    print(
        f"{name:>10}: score={frac_to_str(sol.score(profile))} "
        f"plan={sorted(sol.plan)}"
    )
print(f"annealing explored {len(trace)} moves across 4 chains")

# Splice the winning alternatives into the teacher. The induced student
# validates and its cold layer-cost sum equals the incremental metric the
# search optimized.
student, provenance = apply_plan(house, best.plan)
assert validate_network(student) == []
cold = sum(
    (cp.cost_metric(l.cost, "flops") for l in student.layers.values()), Fraction(0)
)
assert cold == best.cached_metric
print(
    f"\nstudent: {len(student.layers)} layers "
    f"({len(teacher.layers)} in teacher), metric {frac_to_str(cold)}"
)
print("replaced layers:", sorted(provenance))

dot = render_dot(student, provenance)
print(f"\nGraphviz rendering ({len(dot.splitlines())} lines); first few:")
for line in dot.splitlines()[:6]:
    print(" ", line)
