"""Flow projection, equivalence relation, and the bounded synthesis search."""

import random

import pytest

from rpsf.engine import BoundExceeded, Progression, RoundRobin, run
from rpsf.money import Quantity
from rpsf.scenarios import instance_from_dict, instantiate
from rpsf.synthesis import (
    ALL_AGENTS,
    Flow,
    canonical,
    equivalent,
    monetary_projection,
    net_positions,
    synthesize,
    witness_scenario,
)
from rpsf.world import ActionKind


def q(n, d=1):
    return Quantity(n, d)


def run_default(name, **params):
    instance = instantiate(name, params)
    progression = run(instance.world, instance.plans, RoundRobin(),
                      horizon=instance.horizon, choices=instance.choice_points)
    return instance, progression


def savings_target():
    _, progression = run_default("savings_account_with_interest")
    return monetary_projection(progression)


class TestProjection:
    def test_tawarruq_three_legs(self):
        _, progression = run_default("tawarruq_classic")
        trace = monetary_projection(progression)
        assert [(f.payer, f.payee, str(f.amount), f.date) for f in trace] == [
            ("X", "Z", "100", 0), ("Z", "Y", "100", 0), ("Y", "X", "110", 365)]

    def test_empty_progression(self):
        instance = instantiate("tawarruq_classic")
        empty = Progression(events=(), world=instance.world)
        assert monetary_projection(empty) == ()

    def test_pi_prime_x_entries(self):
        # hand-computed legs: pay p'=1020 for the portion, 20 rebated at
        # once, 1048 deferred to day 365
        _, progression = run_default("tawarruq_pi_prime")
        trace = monetary_projection(progression)
        x_legs = sorted((f.payer, f.payee, str(f.amount), f.date)
                        for f in trace if "X" in (f.payer, f.payee))
        assert x_legs == [("X", "Z", "1020", 0), ("Y", "X", "1048", 365),
                          ("Y", "X", "20", 0)]
        nets = net_positions(trace)
        assert nets["X"] == {0: q(-1000), 365: q(1048)}

    def test_conservation_of_net_positions(self):
        for name in ("tawarruq_classic", "murabaha", "contractus_trinus"):
            _, progression = run_default(name)
            nets = net_positions(monetary_projection(progression))
            by_date = {}
            for per_day in nets.values():
                for d, v in per_day.items():
                    by_date[d] = by_date.get(d, q(0)) + v
            assert all(v == q(0) for v in by_date.values())


class TestEquivalence:
    def test_tawarruq_equals_plain_loan_for_the_parties(self):
        _, tawarruq = run_default("tawarruq_classic")
        _, loan = run_default("loan_with_interest", p=q(100), i=q(10), c=q(0), c2=q(0))
        a, b = monetary_projection(tawarruq), monetary_projection(loan)
        assert equivalent(a, b, ("X", "Y"))
        # the intermediary breaks even exactly, so even the all-agents net
        # positions coincide; only the raw legs differ (three vs two)
        assert equivalent(a, b, ALL_AGENTS)
        assert len(a) == 3 and len(b) == 2

    def test_reflexive(self):
        trace = savings_target()
        assert equivalent(trace, trace, ALL_AGENTS)
        assert equivalent(trace, trace, ("X",))

    def test_pi_prime_against_savings(self):
        _, pi_prime = run_default("tawarruq_pi_prime")
        a = monetary_projection(pi_prime)
        b = savings_target()
        assert equivalent(a, b, ("X",))
        assert not equivalent(a, b, ALL_AGENTS)  # the c/2 margin to Z differs

    def test_equivalence_relation_properties(self):
        rng = random.Random(77)
        agents = ["X", "Y", "Z"]
        for _ in range(100):
            base = [
                Flow(*rng.sample(agents, 2), q(rng.randint(1, 50)), rng.choice([0, 10]))
                for _ in range(rng.randint(0, 6))
            ]
            a = canonical(base)
            shuffled = base[:]
            rng.shuffle(shuffled)
            b = canonical(shuffled)
            # zero-net noise: a payment and its exact refund
            payer, payee = rng.sample(agents, 2)
            amount, day = q(rng.randint(1, 30)), rng.choice([0, 10])
            c = canonical(list(b) + [Flow(payer, payee, amount, day),
                                     Flow(payee, payer, amount, day)])
            for perspective in (ALL_AGENTS, ("X",), ("X", "Y")):
                assert equivalent(a, a, perspective)
                assert equivalent(a, b, perspective)
                assert equivalent(b, c, perspective)
                assert equivalent(a, c, perspective)
                assert equivalent(c, a, perspective)

    def test_inequivalence_is_detected(self):
        a = canonical([Flow("X", "Y", q(10), 0)])
        b = canonical([Flow("X", "Y", q(10), 1)])
        assert not equivalent(a, b, ("X",))
        assert not equivalent(a, b, ALL_AGENTS)


class TestSynthesize:
    def test_empty_target_found_with_empty_sequence(self):
        result = synthesize((), ["spot-sale"], bound=2)
        assert result.found
        assert result.witnesses[0].actions == ()

    def test_savings_target_needs_a_credit_sale(self):
        target = savings_target()
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=4, perspective=("X",))
        assert result.found
        assert result.witnesses
        for witness in result.witnesses:
            assert any(a.kind == ActionKind.BUY_ON_CREDIT for a in witness.actions)

    def test_spot_sales_cannot_defer_payment(self):
        target = savings_target()
        result = synthesize(target, ["spot-sale"], agents=("X", "Y", "Z"),
                            bound=4, perspective=("X",))
        assert not result.found
        assert result.explored > 1

    def test_monetization_witness_shape_is_rediscovered(self):
        target = savings_target()
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=4, perspective=("X",))
        shapes = {tuple(a.kind for a in w.actions if a.kind != ActionKind.PAY)
                  for w in result.witnesses}
        assert (ActionKind.PREPARE_GOOD, ActionKind.SPOT_SALE,
                ActionKind.BUY_ON_CREDIT, ActionKind.SPOT_SALE) in shapes

    def test_witness_self_check(self):
        target = savings_target()
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=4, perspective=("X",))
        for witness in result.witnesses:
            assert equivalent(monetary_projection(witness.progression), target, ("X",))

    def test_goods_round_trip_in_every_witness(self):
        target = savings_target()
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=4, perspective=("X",))
        for witness in result.witnesses:
            world = witness.progression.world
            prepared = {a.good_id: a.actor for a in witness.actions
                        if a.kind == ActionKind.PREPARE_GOOD}
            for gid, owner in prepared.items():
                assert world.goods[gid].owner == owner

    def test_all_agents_perspective_finds_two_party_round_trip(self):
        _, loan = run_default("loan_with_interest", p=q(100), i=q(10), c=q(0), c2=q(0))
        target = monetary_projection(loan)
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=3, perspective=ALL_AGENTS)
        assert result.found
        shapes = {tuple(a.kind for a in w.actions if a.kind != ActionKind.PAY)
                  for w in result.witnesses}
        # the same-item sale-repurchase shape: spot out, credit back
        assert (ActionKind.PREPARE_GOOD, ActionKind.SPOT_SALE,
                ActionKind.BUY_ON_CREDIT) in shapes
        for witness in result.witnesses:
            assert equivalent(monetary_projection(witness.progression), target,
                              ALL_AGENTS)

    def test_bound_over_desk_scale_rejected(self):
        with pytest.raises(BoundExceeded):
            synthesize((), ["spot-sale"], bound=9)

    def test_every_witness_scenario_is_rerunnable(self):
        target = savings_target()
        result = synthesize(
            target, ["spot-sale", "credit-sale", "prepare-good"],
            agents=("X", "Y", "Z"), bound=5, perspective=("X",))
        assert result.witnesses
        for index in range(len(result.witnesses)):
            payload = witness_scenario(result, index)
            loaded = instance_from_dict(payload)
            progression = run(loaded.world, loaded.plans, RoundRobin(),
                              horizon=loaded.horizon)
            assert equivalent(monetary_projection(progression), target, ("X",))

    def test_grounding_is_disclosed(self):
        result = synthesize(savings_target(), ["spot-sale"], bound=2)
        assert result.grounding["amounts"] == ["1000", "1048"]
        assert result.grounding["settlement_dates"] == [365]
        assert "agent_symmetry" in result.grounding
