"""Deterministic execution of per-agent plans under interleaving strategies.

Each agent follows a sequential plan (do / wait-for / branch / stop); the
joint behaviour is their interleaving. Modeled threads are data, not
execution threads: the engine is logically sequential and every strategy is
deterministic given its inputs.

Time: events are stamped with the engine clock. Plans schedule future
activity with by-date wait steps; the clock advances to the earliest such
date only when no plan can act, so day-0 activity always completes before
later-dated activity starts.

Strategies:

  RoundRobin    -- agents cycle in name order; every runnable plan takes
                   exactly one step per cycle, so no agent is starved.
  SeededRandom  -- uniformly random runnable plan each turn, from a fixed
                   seed.
  Exhaustive    -- all maximal interleavings (see enumerate_interleavings);
                   run() under this strategy returns the canonically least
                   progression of that set.

Richer scheduling disciplines would slot in as further ScheduleStrategy
variants; the three above cover deterministic replay, randomized probing,
and complete desk-scale exploration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .world import (
    Action,
    ByDate,
    Condition,
    Event,
    Trigger,
    WorldState,
    action_from_dict,
    action_to_dict,
    condition_from_dict,
    condition_to_dict,
    eval_condition,
    event_to_dict,
    apply_event,
    trigger_fired,
    trigger_from_dict,
    trigger_to_dict,
)


class EngineError(Exception):
    pass


class DeadlockDetected(EngineError):
    """All unfinished plans are blocked; names each agent's unmet trigger."""

    def __init__(self, blocked: Mapping[str, Trigger]):
        self.blocked = dict(blocked)
        detail = "; ".join(
            f"{agent} waiting on {trigger_to_dict(trigger)}"
            for agent, trigger in sorted(self.blocked.items())
        )
        super().__init__(f"deadlock: {detail}")


class HorizonExceeded(EngineError):
    pass


class BoundExceeded(EngineError):
    pass


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Do:
    action: Action


@dataclass(frozen=True, slots=True)
class WaitFor:
    trigger: Trigger


@dataclass(frozen=True, slots=True)
class Branch:
    condition: Condition
    then_steps: tuple["PlanStep", ...]
    else_steps: tuple["PlanStep", ...] = ()


@dataclass(frozen=True, slots=True)
class Stop:
    pass


PlanStep = Do | WaitFor | Branch | Stop


@dataclass(frozen=True, slots=True)
class Plan:
    agent: str
    steps: tuple[PlanStep, ...]


@dataclass(frozen=True, slots=True)
class Progression:
    """An executed trace: the events in order plus the final world.

    ``schedule`` records, per event, the scheduler cycle in which it was
    taken (round-robin only); diagnostics for the fairness invariant.
    """

    events: tuple[Event, ...]
    world: WorldState
    schedule: tuple[int, ...] = ()

    def key(self) -> tuple:
        return tuple(
            (e.date, _freeze(action_to_dict(e.action))) for e in self.events
        )


def _freeze(value):
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


# strategies ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class RoundRobin:
    pass


@dataclass(frozen=True, slots=True)
class SeededRandom:
    seed: int


@dataclass(frozen=True, slots=True)
class Exhaustive:
    pass


ScheduleStrategy = RoundRobin | SeededRandom | Exhaustive


# ---------------------------------------------------------------------------
# plan cursors
# ---------------------------------------------------------------------------

class _Cursor:
    """Mutable view over one plan's remaining steps.

    Branches are resolved the moment they reach the head (against the then-
    current ground state); stops truncate the plan.
    """

    __slots__ = ("agent", "steps")

    def __init__(self, agent: str, steps: Sequence[PlanStep]):
        self.agent = agent
        self.steps = list(steps)

    def clone(self) -> "_Cursor":
        return _Cursor(self.agent, self.steps)

    def settle(self, world: WorldState, choices: Mapping[str, bool]) -> None:
        """Resolve branches/satisfied waits/stops until a Do or a block."""
        while self.steps:
            head = self.steps[0]
            if isinstance(head, Stop):
                self.steps = []
            elif isinstance(head, Branch):
                taken = head.then_steps if eval_condition(head.condition, world, choices) else head.else_steps
                self.steps = list(taken) + self.steps[1:]
            elif isinstance(head, WaitFor):
                if trigger_fired(head.trigger, world.history, world.clock, world, choices):
                    self.steps = self.steps[1:]
                else:
                    return
            else:
                return

    def head(self) -> Optional[PlanStep]:
        return self.steps[0] if self.steps else None

    def finished(self) -> bool:
        return not self.steps


def _validate_plans(world: WorldState, plans: Iterable[Plan]) -> list[Plan]:
    ordered = sorted(plans, key=lambda p: p.agent)
    seen = set()
    for plan in ordered:
        if plan.agent in seen:
            raise EngineError(f"two plans for agent {plan.agent!r}")
        seen.add(plan.agent)
        if plan.agent not in world.agents:
            raise EngineError(f"plan for unknown agent {plan.agent!r}")
    return ordered


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def run(
    world: WorldState,
    plans: Iterable[Plan],
    strategy: ScheduleStrategy = RoundRobin(),
    horizon: int = 3650,
    choices: Mapping[str, bool] | None = None,
) -> Progression:
    """Execute plans to completion, the horizon, or deadlock.

    Identical inputs give identical progressions, event for event. A blocked
    plan is skipped, never aborted; deadlock is declared only when no plan
    can step and no by-date wait can release one within the horizon.
    """
    if horizon < world.clock:
        raise EngineError(f"horizon {horizon} precedes world clock {world.clock}")
    choices = dict(choices or {})
    ordered = _validate_plans(world, plans)
    if isinstance(strategy, Exhaustive):
        traces = enumerate_interleavings(world, ordered, bound=_total_steps(ordered), choices=choices)
        if not traces:
            return Progression(events=(), world=world)
        return traces[0]

    cursors = [_Cursor(p.agent, p.steps) for p in ordered]
    rng = random.Random(strategy.seed) if isinstance(strategy, SeededRandom) else None
    start = len(world.history)
    schedule: list[int] = []
    cycle = 0

    while True:
        cycle += 1
        stepped = False
        if rng is None:
            # round-robin: give each plan (name order) one chance per cycle
            for cursor in cursors:
                cursor.settle(world, choices)
                head = cursor.head()
                if isinstance(head, Do):
                    world = apply_event(world, head.action, world.clock)
                    cursor.steps = cursor.steps[1:]
                    schedule.append(cycle)
                    stepped = True
        else:
            runnable = []
            for cursor in cursors:
                cursor.settle(world, choices)
                if isinstance(cursor.head(), Do):
                    runnable.append(cursor)
            if runnable:
                chosen = rng.choice(runnable)
                head = chosen.head()
                world = apply_event(world, head.action, world.clock)
                chosen.steps = chosen.steps[1:]
                schedule.append(cycle)
                stepped = True

        if stepped:
            continue

        # nothing moved: settle, then finish, release a by-date wait,
        # or report deadlock
        for cursor in cursors:
            cursor.settle(world, choices)
        if all(c.finished() for c in cursors):
            break
        wake_dates = []
        blocked: dict[str, Trigger] = {}
        for cursor in cursors:
            head = cursor.head()
            if isinstance(head, WaitFor):
                blocked[cursor.agent] = head.trigger
                if isinstance(head.trigger, ByDate) and head.trigger.day > world.clock:
                    wake_dates.append(head.trigger.day)
        if wake_dates:
            wake = min(wake_dates)
            if wake > horizon:
                raise HorizonExceeded(
                    f"next scheduled activity at day {wake} exceeds horizon {horizon}"
                )
            world = WorldState(
                agents=world.agents,
                accounts=world.accounts,
                goods=world.goods,
                contracts=world.contracts,
                history=world.history,
                clock=wake,
                overdraft_allowed=world.overdraft_allowed,
            )
            continue
        raise DeadlockDetected(blocked)

    return Progression(
        events=world.history[start:],
        world=world,
        schedule=tuple(schedule),
    )


def _total_steps(plans: Sequence[Plan]) -> int:
    def count(steps: Sequence[PlanStep]) -> int:
        total = 0
        for step in steps:
            total += 1
            if isinstance(step, Branch):
                total += max(count(step.then_steps), count(step.else_steps))
        return total

    return sum(count(p.steps) for p in plans)


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

def enumerate_interleavings(
    world: WorldState,
    plans: Iterable[Plan],
    bound: int,
    choices: Mapping[str, bool] | None = None,
    choice_points: Mapping[str, bool] | None = None,
) -> tuple[Progression, ...]:
    """All maximal progressions over every interleaving of the plans.

    Per-plan order and wait triggers are respected; the clock advances only
    when no plan is enabled. Declared boolean choice points are branched
    over both values. Traces that end with every plan finished and traces
    that end blocked (maximal but stuck) are both included. Duplicates are
    removed and the result is in canonical (event-key) order.

    Rejects inputs whose total step count exceeds ``bound``.
    """
    ordered = _validate_plans(world, plans)
    total = _total_steps(ordered)
    if total > bound:
        raise BoundExceeded(f"plans hold {total} steps, bound is {bound}")

    fixed = dict(choices or {})
    points = dict(choice_points or {})
    assignments: list[dict[str, bool]] = []
    names = sorted(points)
    for mask in range(2 ** len(names)):
        assignment = dict(fixed)
        for i, name in enumerate(names):
            assignment[name] = bool(mask >> i & 1)
        assignments.append(assignment)

    seen: dict[tuple, Progression] = {}
    start = len(world.history)
    for assignment in assignments:
        stack: list[tuple[WorldState, list[_Cursor]]] = [
            (world, [_Cursor(p.agent, p.steps) for p in ordered])
        ]
        while stack:
            state, cursors = stack.pop()
            for cursor in cursors:
                cursor.settle(state, assignment)
            enabled = [i for i, c in enumerate(cursors) if isinstance(c.head(), Do)]
            if not enabled:
                wake_dates = [
                    c.head().trigger.day
                    for c in cursors
                    if isinstance(c.head(), WaitFor) and isinstance(c.head().trigger, ByDate)
                    and c.head().trigger.day > state.clock
                ]
                if wake_dates:
                    advanced = WorldState(
                        agents=state.agents,
                        accounts=state.accounts,
                        goods=state.goods,
                        contracts=state.contracts,
                        history=state.history,
                        clock=min(wake_dates),
                        overdraft_allowed=state.overdraft_allowed,
                    )
                    stack.append((advanced, [c.clone() for c in cursors]))
                    continue
                progression = Progression(events=state.history[start:], world=state)
                seen.setdefault(progression.key(), progression)
                continue
            # reversed so the lowest-named agent is explored first
            for i in reversed(enabled):
                next_cursors = [c.clone() for c in cursors]
                head = next_cursors[i].head()
                assert isinstance(head, Do)
                next_state = apply_event(state, head.action, state.clock)
                next_cursors[i].steps = next_cursors[i].steps[1:]
                stack.append((next_state, next_cursors))

    return tuple(seen[k] for k in sorted(seen))


# ---------------------------------------------------------------------------
# plan serialization (scenario files, witness output)
# ---------------------------------------------------------------------------

def step_to_dict(step: PlanStep) -> dict:
    if isinstance(step, Do):
        return {"do": action_to_dict(step.action)}
    if isinstance(step, WaitFor):
        return {"wait_for": trigger_to_dict(step.trigger)}
    if isinstance(step, Branch):
        return {
            "branch": {
                "condition": condition_to_dict(step.condition),
                "then": [step_to_dict(s) for s in step.then_steps],
                "else": [step_to_dict(s) for s in step.else_steps],
            }
        }
    if isinstance(step, Stop):
        return {"stop": True}
    raise TypeError(f"unknown plan step {step!r}")


def step_from_dict(data: Mapping) -> PlanStep:
    if "do" in data:
        return Do(action_from_dict(data["do"]))
    if "wait_for" in data:
        return WaitFor(trigger_from_dict(data["wait_for"]))
    if "branch" in data:
        d = data["branch"]
        return Branch(
            condition=condition_from_dict(d["condition"]),
            then_steps=tuple(step_from_dict(s) for s in d.get("then", [])),
            else_steps=tuple(step_from_dict(s) for s in d.get("else", [])),
        )
    if data.get("stop"):
        return Stop()
    raise ValueError(f"cannot parse plan step {data!r}")


def plan_to_dict(plan: Plan) -> dict:
    return {"agent": plan.agent, "steps": [step_to_dict(s) for s in plan.steps]}


def plan_from_dict(data: Mapping) -> Plan:
    return Plan(agent=data["agent"], steps=tuple(step_from_dict(s) for s in data.get("steps", [])))


def progression_to_dict(progression: Progression, include_world: bool = False) -> dict:
    from .world import world_to_dict

    out: dict = {"events": [event_to_dict(e) for e in progression.events]}
    if include_world:
        out["final_world"] = world_to_dict(progression.world, include_history=False)
    return out
