"""Engine: scheduling, fairness, determinism, exhaustive interleavings."""

import math

import pytest

from rpsf.engine import (
    Branch,
    BoundExceeded,
    DeadlockDetected,
    Do,
    Exhaustive,
    HorizonExceeded,
    Plan,
    RoundRobin,
    SeededRandom,
    Stop,
    WaitFor,
    enumerate_interleavings,
    run,
)
from rpsf.money import Quantity
from rpsf.world import (
    Action,
    ActionKind,
    ActionTemplate,
    AfterEvent,
    Agent,
    BalanceAtLeast,
    ByDate,
    make_world,
    world_to_json,
)


def q(n, d=1):
    return Quantity(n, d)


def chat(agent: str, count: int) -> Plan:
    """A plan of `count` independent log-only steps, all distinct."""
    return Plan(agent, tuple(
        Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor=agent,
                  message=f"{agent}-{k}"))
        for k in range(count)
    ))


def wait_for(**pattern):
    if "kind" in pattern:
        pattern["kind"] = ActionKind(pattern["kind"])
    return WaitFor(AfterEvent(ActionTemplate(**pattern)))


@pytest.fixture
def trio():
    return make_world(agents=[Agent("A"), Agent("B"), Agent("C")],
                      balances={"A": q(100), "B": q(100), "C": q(100)})


class TestRun:
    def test_empty_plan_set(self, trio):
        progression = run(trio, [], RoundRobin())
        assert progression.events == ()
        assert progression.world is trio

    def test_deadlock_reports_blocking_triggers(self, trio):
        plans = [
            Plan("A", (wait_for(kind="acknowledge-receipt", actor="B"),
                       Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="A")))),
            Plan("B", (wait_for(kind="acknowledge-receipt", actor="A"),
                       Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="B")))),
        ]
        with pytest.raises(DeadlockDetected) as exc:
            run(trio, plans, RoundRobin())
        assert set(exc.value.blocked) == {"A", "B"}
        assert "waiting on" in str(exc.value)

    def test_horizon_exceeded(self, trio):
        plans = [Plan("A", (WaitFor(ByDate(100)),
                            Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="A"))))]
        with pytest.raises(HorizonExceeded):
            run(trio, plans, RoundRobin(), horizon=50)

    def test_clock_advances_to_wait_date(self, trio):
        plans = [Plan("A", (WaitFor(ByDate(30)),
                            Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="A"))))]
        progression = run(trio, plans, RoundRobin(), horizon=365)
        assert progression.events[0].date == 30
        assert progression.world.clock == 30

    def test_per_plan_order_preserved(self, trio):
        plans = [chat("A", 4), chat("B", 3), chat("C", 2)]
        progression = run(trio, plans, RoundRobin())
        for agent in ("A", "B", "C"):
            messages = [e.action.message for e in progression.events
                        if e.action.actor == agent]
            assert messages == sorted(messages, key=lambda m: int(m.split("-")[1]))

    def test_determinism_round_robin(self, trio):
        plans = [chat("A", 3), chat("B", 3)]
        first = run(trio, plans, RoundRobin())
        second = run(trio, plans, RoundRobin())
        assert first.key() == second.key()
        assert world_to_json(first.world) == world_to_json(second.world)

    def test_determinism_seeded_random(self, trio):
        plans = [chat("A", 3), chat("B", 3), chat("C", 3)]
        first = run(trio, plans, SeededRandom(7))
        second = run(trio, plans, SeededRandom(7))
        assert first.key() == second.key()

    def test_seeds_differ(self, trio):
        plans = [chat("A", 4), chat("B", 4), chat("C", 4)]
        keys = {run(trio, plans, SeededRandom(seed)).key() for seed in range(8)}
        assert len(keys) > 1

    def test_exhaustive_strategy_returns_canonical_least(self, trio):
        plans = [chat("A", 2), chat("B", 2)]
        progression = run(trio, plans, Exhaustive())
        all_traces = enumerate_interleavings(trio, plans, bound=10)
        assert progression.key() == all_traces[0].key()

    def test_round_robin_fairness(self, trio):
        """Each runnable plan steps exactly once per scheduler cycle."""
        plans = [chat("A", 5), chat("B", 5), chat("C", 5)]
        progression = run(trio, plans, RoundRobin())
        per_cycle: dict[int, list[str]] = {}
        for event, cycle in zip(progression.events, progression.schedule):
            per_cycle.setdefault(cycle, []).append(event.action.actor)
        for cycle, actors in per_cycle.items():
            assert len(actors) == len(set(actors))
        # no runnable plan is starved: all three act in every full cycle
        full_cycles = [actors for actors in per_cycle.values() if len(actors) == 3]
        assert len(full_cycles) == 5

    def test_branch_takes_ground_state_at_the_step(self, trio):
        plans = [
            Plan("A", (Do(Action(kind=ActionKind.PAY, actor="A", counterparty="B",
                                 amount=q(60))),)),
            Plan("B", (wait_for(kind="pay", actor="A"),
                       Branch(BalanceAtLeast("B", q(150)),
                              (Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="B",
                                         message="rich")),),
                              (Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="B",
                                         message="poor")),)))),
        ]
        progression = run(trio, plans, RoundRobin())
        assert progression.events[-1].action.message == "rich"

    def test_stop_truncates(self, trio):
        plans = [Plan("A", (Stop(), Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT,
                                              actor="A"))))]
        progression = run(trio, plans, RoundRobin())
        assert progression.events == ()


def count_merges(lengths) -> int:
    """Brute-force oracle: count interleavings by recursive merging."""
    lengths = tuple(lengths)
    if all(n == 0 for n in lengths):
        return 1
    total = 0
    for i, n in enumerate(lengths):
        if n > 0:
            total += count_merges(lengths[:i] + (n - 1,) + lengths[i + 1:])
    return total


class TestEnumerate:
    @pytest.mark.parametrize("lengths", [(2, 2), (3, 2), (1, 1, 1), (2, 2, 2),
                                         (3, 3, 2), (4, 4)])
    def test_multinomial_counts(self, lengths):
        world = make_world(agents=[Agent(f"P{i}") for i in range(len(lengths))])
        plans = [chat(f"P{i}", n) for i, n in enumerate(lengths)]
        traces = enumerate_interleavings(world, plans, bound=sum(lengths))
        total = sum(lengths)
        formula = math.factorial(total)
        for n in lengths:
            formula //= math.factorial(n)
        assert len(traces) == formula
        assert count_merges(lengths) == formula

    def test_single_plan_single_trace(self):
        world = make_world(agents=[Agent("A")])
        traces = enumerate_interleavings(world, [chat("A", 4)], bound=10)
        assert len(traces) == 1

    def test_bound_rejected(self):
        world = make_world(agents=[Agent("A"), Agent("B")])
        with pytest.raises(BoundExceeded):
            enumerate_interleavings(world, [chat("A", 5), chat("B", 5)], bound=9)

    def test_canonical_order_and_dedup(self):
        world = make_world(agents=[Agent("A"), Agent("B")])
        plans = [chat("A", 2), chat("B", 2)]
        first = enumerate_interleavings(world, plans, bound=8)
        second = enumerate_interleavings(world, plans, bound=8)
        assert [p.key() for p in first] == [p.key() for p in second]
        assert len({p.key() for p in first}) == len(first)

    def test_round_robin_trace_is_among_enumerated(self):
        world = make_world(agents=[Agent("A"), Agent("B")])
        plans = [chat("A", 2), chat("B", 2)]
        rr = run(world, plans, RoundRobin())
        keys = {p.key() for p in enumerate_interleavings(world, plans, bound=8)}
        assert rr.key() in keys

    def test_waits_restrict_the_space(self):
        world = make_world(agents=[Agent("A"), Agent("B")])
        plans = [
            chat("A", 2),
            Plan("B", (wait_for(kind="acknowledge-receipt", actor="A", message="A-1"),
                       Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="B",
                                 message="B-0")))),
        ]
        traces = enumerate_interleavings(world, plans, bound=8)
        # B's step must follow both of A's: the only order is A-0 A-1 B-0
        assert len(traces) == 1
        assert [e.action.message for e in traces[0].events] == ["A-0", "A-1", "B-0"]

    def test_choice_points_are_branched_over(self):
        from rpsf.world import ChoiceIs

        world = make_world(agents=[Agent("A")])
        plans = [Plan("A", (Branch(ChoiceIs("flag"),
                                   (Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT,
                                              actor="A", message="yes")),),
                                   (Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT,
                                              actor="A", message="no")),)),))]
        traces = enumerate_interleavings(world, plans, bound=4,
                                         choice_points={"flag": True})
        messages = sorted(t.events[0].action.message for t in traces)
        assert messages == ["no", "yes"]

    def test_deadlocked_maximal_traces_are_included(self):
        world = make_world(agents=[Agent("A"), Agent("B")])
        plans = [
            Plan("A", (Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="A",
                                 message="go")),
                       wait_for(kind="acknowledge-receipt", actor="B", message="never"))),
            Plan("B", (wait_for(kind="acknowledge-receipt", actor="A", message="go"),
                       Do(Action(kind=ActionKind.ACKNOWLEDGE_RECEIPT, actor="B",
                                 message="done")))),
        ]
        traces = enumerate_interleavings(world, plans, bound=8)
        # B finishes, A stays blocked forever: still one maximal trace
        assert len(traces) == 1
        assert [e.action.message for e in traces[0].events] == ["go", "done"]
