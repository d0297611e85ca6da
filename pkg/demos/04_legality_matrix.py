#!/usr/bin/env python3
"""Judging the catalogue under every built-in legal position.

Prints the verdict matrix: rows are scenarios, columns are positions.
The contrast to look for: the savings account is forbidden descriptively
(a declared proportional increment on a money loan) while the monetized
reconstruction with the same cash profile passes descriptive review and
fails only the functional one - the two readings the analyzer keeps apart.
Evidence is printed for one judgement so the sequence-number references
are visible.

Run:
    python demos/04_legality_matrix.py
"""

from rpsf import BUILTIN_POSITIONS, RoundRobin, instantiate, judge, run

SCENARIOS = [
    ("savings_account_with_interest", {}),
    ("loan_with_interest", {}),
    ("tawarruq_classic", {}),
    ("tawarruq_pi_double_prime", {}),
    ("ina_two_party", {}),
    ("ina_two_party", {"single_contract": True}),
    ("murabaha", {}),
    ("contractus_trinus", {}),
    ("unethical_examples", {}),
]
POSITIONS = ["CONVENTIONAL", "STRICT_DESCRIPTIVE", "STRICT_FUNCTIONAL",
             "MAJORITY", "MALAYSIA"]


def execute(name, params):
    instance = instantiate(name, params)
    progression = run(instance.world, instance.plans, RoundRobin(),
                      horizon=instance.horizon, choices=instance.choice_points)
    return instance, progression


header = f"{'scenario':<38}" + "".join(f"{p[:12]:>14}" for p in POSITIONS)
print(header)
print("-" * len(header))
for name, params in SCENARIOS:
    instance, progression = execute(name, params)
    label = name + (" (single)" if params.get("single_contract") else "")
    row = f"{label:<38}"
    for position_name in POSITIONS:
        judgement = judge(BUILTIN_POSITIONS[position_name], instance, progression)
        row += f"{judgement.verdict.value:>14}"
    print(row)

print("\nEvidence for STRICT_DESCRIPTIVE on the savings account:")
instance, progression = execute("savings_account_with_interest", {})
judgement = judge(BUILTIN_POSITIONS["STRICT_DESCRIPTIVE"], instance, progression)
for reason in judgement.reasons:
    print(f"  rule {reason.rule}: events {list(reason.events)}, "
          f"contracts {list(reason.contracts)}")
    print(f"    {reason.note}")
