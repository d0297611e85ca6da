#!/usr/bin/env python3
"""Running the built-in products and reading their progressions.

Two walkthroughs: the classic three-party monetization (an asset makes a
round trip and a loan at ten percent emerges) and the savings account it
reconstructs. Both are executed by the round-robin scheduler; the event
logs, balances, and monetary flows are printed side by side.

Run:
    python demos/03_product_walkthroughs.py
"""

from rpsf import RoundRobin, instantiate, monetary_projection, net_positions, run


def execute(name, **params):
    instance = instantiate(name, params)
    progression = run(instance.world, instance.plans, RoundRobin(),
                      horizon=instance.horizon, choices=instance.choice_points)
    return instance, progression


def walkthrough(name, **params):
    instance, progression = execute(name, **params)
    print(f"\n=== {name} {instance.params if params else ''} ===")
    for event in progression.events:
        action = event.action
        extra = ""
        if action.amount is not None:
            extra += f"  {action.amount}"
        if action.good_id:
            extra += f"  [{action.good_id}]"
        print(f"  {event.seq:>2}. day {event.date:>3}  {action.actor:>4} "
              f"{action.kind.value:<26}{extra}")
    print("  flows:")
    for flow in monetary_projection(progression):
        print(f"    day {flow.date:>3}: {flow.payer} pays {flow.payee} {flow.amount}")
    nets = net_positions(monetary_projection(progression))
    for agent in sorted(nets):
        profile = ", ".join(f"{v} @ day {d}" for d, v in sorted(nets[agent].items()))
        print(f"  net {agent}: {profile}")
    return instance, progression


instance, progression = walkthrough("tawarruq_classic")
good = progression.world.goods["S"]
print(f"\n  The asset started with Z and is owned by {good.owner} again:"
      " a round trip.")
print("  X handed over 100 now and collects 110 in a year - the loan has"
      " been synthesized.")

walkthrough("savings_account_with_interest")
print("\n  Same X profile, produced by a single contract that names the"
      " formula p - c + q*p.")

walkthrough("contractus_trinus")
print("\n  Partnership, profit sale, insurance: three permitted contracts,"
      " ten percent a year.")
