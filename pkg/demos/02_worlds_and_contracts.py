#!/usr/bin/env python3
"""The layered world: ground state, contracts, history, replay.

Builds a two-agent world by hand, walks a loan through its life-cycle
(prepare, sign, transfer, repay), inspects honour status along the way,
and closes with the replay-determinism check: re-applying the history to
the initial snapshot reproduces the final world byte for byte.

Run:
    python demos/02_worlds_and_contracts.py
"""

from rpsf import (
    Action,
    ActionKind,
    ActionTemplate,
    Agent,
    Clause,
    Quantity,
    Reason,
    RepaymentTerms,
    apply_event,
    honour_status,
    make_world,
    replay,
    world_to_json,
)


def q(n, d=1):
    return Quantity(n, d)


def show(world, label):
    balances = ", ".join(f"{name}={world.balance(name)}" for name in sorted(world.accounts))
    print(f"{label:28} day {world.clock:>3}  {balances}")


print("A loan of 100 at 10 percent between lender X and borrower Y.\n")

world = make_world(
    agents=[Agent("X"), Agent("Y")],
    balances={"X": q(100), "Y": q(10)},
)
show(world, "initial endowments")

clauses = (
    Clause("X", ActionTemplate(kind=ActionKind.PAY, actor="X", counterparty="Y",
                               amount=q(100), contract_id="loan"), deadline=0),
    Clause("Y", ActionTemplate(kind=ActionKind.PAY, actor="Y", counterparty="X",
                               amount=q(110), contract_id="loan"), deadline=365),
)
terms = RepaymentTerms(principal=q(100), rate=q(1, 10), fixed_cost=q(0), period=365)

world = apply_event(world, Action(
    kind=ActionKind.PREPARE_CONTRACT, actor="X", counterparty="Y",
    contract_id="loan", parties=("X", "Y"), clauses=clauses, terms=terms), 0)
print(f"\ncontract prepared: stage = {world.contracts['loan'].stage.value}")

for signer in ("X", "Y"):
    world = apply_event(world, Action(kind=ActionKind.SIGN_CONTRACT, actor=signer,
                                      contract_id="loan"), 0)
    print(f"{signer} signs:           stage = {world.contracts['loan'].stage.value}")

world = apply_event(world, Action(
    kind=ActionKind.PAY, actor="X", counterparty="Y", amount=q(100),
    reason=Reason(contract_ids=("loan",))), 0)
show(world, "\nprincipal transferred")
print("honour status mid-term:", honour_status(world.contracts["loan"],
                                                world.history, 100).value)

world = apply_event(world, Action(
    kind=ActionKind.PAY, actor="Y", counterparty="X", amount=q(110),
    reason=Reason(contract_ids=("loan",))), 365)
show(world, "repaid with increment")
print("honour status at term: ", honour_status(world.contracts["loan"],
                                                world.history, 365).value)

print("\nWhat if the repayment never happened? Judged one day past the deadline:")
truncated = world.history[:-1]
print("honour status day 366: ", honour_status(world.contracts["loan"],
                                                truncated, 366).value)

print("\nReplaying the full history from the initial snapshot...")
initial = make_world(agents=[Agent("X"), Agent("Y")],
                     balances={"X": q(100), "Y": q(10)})
replayed = replay(initial, world.history)
print("byte-identical to the final world:",
      world_to_json(replayed) == world_to_json(world))
