"""
Scoring plans
=============

Executability, LCS similarity to a reference plan, and goal correctness
in a small symbolic household.
"""

# %%
from pathlib import Path

from hyperscene.plan_eval import (
    Action,
    SymbolicEnv,
    correctness,
    evaluate_corpus,
    executability,
    execute,
    format_report_csv,
    lcs_score,
)

env = SymbolicEnv.from_dict({
    "objects": {
        "table": {"location": "dining_room", "surface": True},
        "counter": {"location": "kitchen", "surface": True},
        "apple": {"location": "table", "holdable": True},
    },
    "agent": {"location": "door"},
    "goal": [{"pred": "on", "args": ["apple", "counter"]}],
})
A = Action.of
gold = [A("GOTO", "table"), A("PICKUP", "apple"), A("GOTO", "counter"), A("PLACE", "apple", "counter")]

# %%
# This plan forgets to walk to the counter, so it halts at the third action.
plan = [A("GOTO", "table"), A("PICKUP", "apple"), A("PLACE", "apple", "counter"), A("GOTO", "door")]
final, done = execute(env, plan)
print("executed", done, "of", len(plan))
print("executability", executability(plan, env))
print("lcs", lcs_score(plan, gold))
print("goal reached", correctness(final))

# %%
final, _ = execute(env, gold)
print("gold reaches goal:", correctness(final))

# %%
# A directory corpus gives one CSV row per sample and a mean row.
corpus = Path(__file__).parent / "data" / "corpus"
print(format_report_csv(evaluate_corpus(corpus / "plans", corpus / "envs", corpus / "golds")))
