#!/usr/bin/env python3
"""Flow-trace equivalence: when does A equal B plus C?

Projects progressions down to their cash movements and compares net
positions exactly. From the saver's perspective the block-granular
monetization is indistinguishable from the savings account; over all
agents the half-cost margin earned by the supplier gives it away. The
effective interest rate extracted from the flows is identical either way.

Run:
    python demos/05_flow_equivalence.py
"""

from rpsf import (
    ALL_AGENTS,
    Quantity,
    RoundRobin,
    effective_interest_rate,
    equivalent,
    instantiate,
    monetary_projection,
    net_positions,
    run,
)


def flows_of(name, **params):
    instance = instantiate(name, params)
    progression = run(instance.world, instance.plans, RoundRobin(),
                      horizon=instance.horizon, choices=instance.choice_points)
    return monetary_projection(progression)


def show(label, trace):
    print(f"{label}:")
    for flow in trace:
        print(f"    day {flow.date:>3}: {flow.payer} -> {flow.payee}  {flow.amount}")
    nets = net_positions(trace)
    for agent in sorted(nets):
        profile = ", ".join(f"{v} @ {d}" for d, v in sorted(nets[agent].items()))
        print(f"    net {agent}: {profile}")


savings = flows_of("savings_account_with_interest")
monetized = flows_of("tawarruq_pi_prime")
show("savings account", savings)
print()
show("block-granular monetization", monetized)

print("\nEquivalence, exact per-(agent, day) nets:")
print("  from X only :", equivalent(monetized, savings, ("X",)))
print("  all agents  :", equivalent(monetized, savings, ALL_AGENTS),
      "  (the supplier's half-cost margin differs)")

print("\nClassic three-party monetization vs the plain loan:")
tawarruq = flows_of("tawarruq_classic")
loan = flows_of("loan_with_interest", c=Quantity(0), c2=Quantity(0))
print("  from X and Y:", equivalent(tawarruq, loan, ("X", "Y")))
print("  all agents  :", equivalent(tawarruq, loan, ALL_AGENTS),
      "  (the intermediary breaks even exactly)")

print("\nEffective annual rate recovered from the flows:")
for label, trace in (("savings", savings), ("monetized", monetized),
                     ("tawarruq", tawarruq)):
    nets = net_positions(trace)["X"]
    outflow = -min(nets.values())
    gain = sum(nets.values(), Quantity(0))
    rate = effective_interest_rate(outflow, outflow + gain, 365)
    print(f"  {label:<10} principal {outflow}, gain {gain}, rate {rate}")
