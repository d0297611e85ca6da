"""Legal positions: detectors, judgements, evidence, scaling invariance."""

import random

import pytest

from rpsf.engine import Plan, RoundRobin, run
from rpsf.legality import (
    BUILTIN_POSITIONS,
    CONVENTIONAL,
    MAJORITY,
    MALAYSIA,
    NonpositivePrincipal,
    STRICT_DESCRIPTIVE,
    STRICT_FUNCTIONAL,
    Verdict,
    ZeroDuration,
    detect_ina,
    detect_riba,
    effective_interest_rate,
    judge,
    position_from_dict,
)
from rpsf.money import Quantity
from rpsf.scenarios import ScenarioInstance, instantiate, scenario_names
from rpsf.synthesis import monetary_projection, net_positions
from rpsf.world import (
    Action,
    ActionKind,
    Agent,
    Good,
    make_world,
)
from rpsf.engine import Do


def q(n, d=1):
    return Quantity(n, d)


def run_default(name, **params):
    instance = instantiate(name, params)
    progression = run(instance.world, instance.plans, RoundRobin(),
                      horizon=instance.horizon, choices=instance.choice_points)
    return instance, progression


class TestDetectRiba:
    def test_linked_pair_yields_one_finding(self):
        _, progression = run_default("loan_with_interest", p=q(100), i=q(10),
                                     c=q(0), c2=q(0))
        world = progression.world
        findings = detect_riba(world.contracts, world.history)
        assert len(findings) == 1
        finding = findings[0]
        assert finding.principal == q(100)
        assert finding.repayment == q(110)
        assert finding.increment == q(10)
        assert finding.duration == 365
        assert finding.link == "loan"

    def test_zero_rate_fixed_costs_only_yield_nothing(self):
        _, progression = run_default("loan_with_interest", p=q(100), i=q(0),
                                     c=q(2), c2=q(0))
        world = progression.world
        assert detect_riba(world.contracts, world.history) == []

    def test_tawarruq_has_no_descriptive_findings(self):
        # no single contract links X's payment to Y's repayment; the credit
        # leg is a sale of the asset
        _, progression = run_default("tawarruq_classic")
        world = progression.world
        assert detect_riba(world.contracts, world.history) == []

    def test_savings_account_finding_cites_both_transfers(self):
        _, progression = run_default("savings_account_with_interest")
        world = progression.world
        findings = detect_riba(world.contracts, world.history)
        assert len(findings) == 1
        seqs = findings[0].events
        kinds = [world.history[s - 1].action.kind for s in seqs]
        assert kinds == [ActionKind.PAY, ActionKind.PAY]


class TestDetectIna:
    def test_separate_contracts_flagged_but_not_single(self):
        _, progression = run_default("ina_two_party")
        findings = detect_ina(progression.world.history)
        assert len(findings) == 1
        finding = findings[0]
        assert (finding.good_id, finding.seller, finding.buyer) == ("S", "Y", "X")
        assert finding.single_contract is False

    def test_single_contract_flag(self):
        _, progression = run_default("ina_two_party", single_contract=True)
        findings = detect_ina(progression.world.history)
        assert len(findings) == 1
        assert findings[0].single_contract is True

    def test_tawarruq_round_trip_with_intermediary_is_clean(self):
        _, progression = run_default("tawarruq_classic")
        assert detect_ina(progression.world.history) == []

    def test_no_sales_no_findings(self):
        _, progression = run_default("loan_with_interest")
        assert detect_ina(progression.world.history) == []


class TestEffectiveRate:
    def test_ten_percent_per_year(self):
        assert effective_interest_rate(q(100), q(110), 365) == q(1, 10)

    def test_no_gain_no_rate(self):
        assert effective_interest_rate(q(77), q(77), 123) == q(0)

    def test_annualization(self):
        # half-year doubling of the period halves the required gain
        assert effective_interest_rate(q(100), q(105), 365 // 2) == \
            q(5, 100) * q(365) / q(182)

    def test_contractus_trinus_net_rate(self):
        _, progression = run_default("contractus_trinus")
        nets = net_positions(monetary_projection(progression))
        gain = sum((v for v in nets["A"].values()), q(0))
        principal = q(100)
        assert effective_interest_rate(principal, principal + gain, 365) == q(1, 10)

    def test_errors(self):
        with pytest.raises(NonpositivePrincipal):
            effective_interest_rate(q(0), q(10), 10)
        with pytest.raises(ZeroDuration):
            effective_interest_rate(q(10), q(11), 0)

    def test_rate_recovers_q_exactly(self):
        rng = random.Random(31)
        for _ in range(200):
            principal = Quantity(rng.randint(1, 10**6), rng.randint(1, 50))
            rate = Quantity(rng.randint(0, 400), rng.randint(1, 400))
            repayment = principal * (q(1) + rate)
            assert effective_interest_rate(principal, repayment, 365) == rate


class TestJudgements:
    def test_judgement_is_deterministic(self):
        instance, progression = run_default("savings_account_with_interest")
        first = judge(STRICT_DESCRIPTIVE, instance, progression)
        second = judge(STRICT_DESCRIPTIVE, instance, progression)
        assert first == second

    def test_haram_evidence_cites_existing_events(self):
        for name in scenario_names():
            instance, progression = run_default(name)
            for position in BUILTIN_POSITIONS.values():
                judgement = judge(position, instance, progression)
                if judgement.verdict != Verdict.HALAL:
                    assert judgement.reasons
                for reason in judgement.reasons:
                    for seq in reason.events:
                        assert 1 <= seq <= len(progression.world.history)
                    for cid in reason.contracts:
                        assert cid in progression.world.contracts

    def test_unethical_examples_flagged_descriptively(self):
        instance, progression = run_default("unethical_examples")
        judgement = judge(STRICT_DESCRIPTIVE, instance, progression)
        assert judgement.verdict == Verdict.HARAM

    def test_functional_and_descriptive_disagree_on_monetization(self):
        instance, progression = run_default("tawarruq_pi_double_prime")
        descriptive = judge(STRICT_DESCRIPTIVE, instance, progression)
        functional = judge(STRICT_FUNCTIONAL, instance, progression)
        assert descriptive.verdict == Verdict.HALAL
        assert functional.verdict == Verdict.HARAM

    def test_scaling_invariance(self):
        """Multiplying all monetary parameters by a positive rational leaves
        every built-in verdict unchanged."""
        cases = [
            ("savings_account_with_interest",
             lambda k: {"p": q(1000) * k, "c": q(2) * k}),
            ("tawarruq_classic", lambda k: {"p": q(100) * k, "i": q(10) * k}),
            ("ina_two_party", lambda k: {"p": q(100) * k, "i": q(10) * k}),
            ("loan_with_interest", lambda k: {"p": q(100) * k, "i": q(10) * k}),
        ]
        scales = [q(3), q(7, 2), q(1, 4)]
        for name, params_of in cases:
            base_instance, base_progression = run_default(name)
            for position in BUILTIN_POSITIONS.values():
                want = judge(position, base_instance, base_progression).verdict
                for k in scales:
                    instance, progression = run_default(name, **params_of(k))
                    got = judge(position, instance, progression).verdict
                    assert got == want, (name, position.name, str(k))

    def test_undecided_on_unvalued_goods(self):
        world = make_world(
            agents=[Agent("X"), Agent("Y")],
            balances={"X": q(100), "Y": q(120)},
            goods=[Good(good_id="mystery", kind="asset", owner="Y", market_value=None)],
        )
        plans = (
            Plan("Y", (
                Do(Action(kind=ActionKind.SPOT_SALE, actor="Y", counterparty="X",
                          amount=q(100), good_id="mystery")),
                Do(Action(kind=ActionKind.BUY_ON_CREDIT, actor="Y", counterparty="X",
                          amount=q(110), down_payment=q(110), due_date=10,
                          good_id="mystery", contract_id="settle")),
            )),
        )
        instance = ScenarioInstance(name="unvalued", params={}, world=world,
                                    plans=plans, principals=("X", "Y"), horizon=10)
        progression = run(world, plans, RoundRobin(), horizon=10)
        judgement = judge(MAJORITY, instance, progression)
        assert judgement.verdict == Verdict.UNDECIDED
        assert judgement.reasons[0].rule == "good-valuation-missing"

    def test_custom_position_from_rule_list(self):
        position = position_from_dict({
            "name": "NO_ROUND_TRIPS",
            "mode": "descriptive",
            "rules": [{"detector": "ina", "verdict": "haram", "name": "round-trip"}],
        })
        instance, progression = run_default("ina_two_party")
        assert judge(position, instance, progression).verdict == Verdict.HARAM
        instance, progression = run_default("savings_account_with_interest")
        assert judge(position, instance, progression).verdict == Verdict.HALAL

    def test_conventional_permits_every_builtin(self):
        for name in scenario_names():
            instance, progression = run_default(name)
            assert judge(CONVENTIONAL, instance, progression).verdict == Verdict.HALAL
