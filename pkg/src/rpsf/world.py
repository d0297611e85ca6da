"""Layered world state for financial products put into effect.

A world snapshot has four conceptual levels:

  ground    -- agents, one account per agent, goods and their owners;
  contracts -- contract records at stages of their life-cycle;
  plans     -- per-agent future behaviour (lives with the engine, which
               consumes plans in order; see engine.py);
  history   -- the gap-free, system-wide numbered event log, from which
               the ground and contract levels can be replayed exactly.

State transitions happen only through :func:`apply_event`, a pure function
from (world, action, date) to a new world. Money is conserved by
construction: every cash movement debits one account and credits another.

Action vocabulary
-----------------
Twelve speech-act/transfer kinds (promises to pay / accept payment / buy on
condition / insure / manage funds, payment, receipt, acknowledgement, credit
purchase, expectation, entitlement justification, denomination exchange)
plus composite kinds: spot sale, inform, contract preparation and signing,
good preparation and its request. Promise kinds produce signed contracts.
Actions may carry ethical annotations (chance-contingency, undisclosed
information, coercion); annotations are author-supplied, never inferred.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .money import Quantity, ZERO, parse_quantity


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class WorldError(Exception):
    """Base class for invalid transitions."""


class ValidationError(WorldError):
    """An action is missing required parameters or violates a basic bound."""


class InsufficientFunds(WorldError):
    """A payer's balance cannot cover a cash movement (overdraft disabled)."""


class NotOwner(WorldError):
    """An agent tried to sell or hand over a good it does not own."""


class StageViolation(WorldError):
    """A contract operation was attempted outside its legal life-cycle stage."""


class UnknownReference(WorldError):
    """An action referenced an agent, good, contract or event that does not exist."""


# ---------------------------------------------------------------------------
# ground-level domain types
# ---------------------------------------------------------------------------

class Role(str, Enum):
    PERSON = "person"
    BANK = "bank"
    BROKER = "broker"
    COMPANY = "company"


@dataclass(frozen=True, slots=True)
class Agent:
    name: str
    role: Role = Role.PERSON


@dataclass(frozen=True, slots=True)
class Account:
    owner: str
    balance: Quantity


@dataclass(frozen=True, slots=True)
class Good:
    """A tradeable non-money asset.

    ``market_value`` is the value of the prepared portion; it must be a
    multiple of ``block_size`` (goods come in fixed-size blocks and the
    preparer may refuse to partition them). Trade prices around that value
    are free: margins and fees are not block-constrained. ``market_value``
    of None marks an unvalued good, which some legal positions treat as
    missing information.
    """

    good_id: str
    kind: str
    owner: str
    market_value: Optional[Quantity]
    block_size: Quantity = Quantity(1)
    is_money: bool = False


@dataclass(frozen=True, slots=True)
class Reason:
    """Structured justification: free text plus references into the world.

    Rule engines match on the referenced contract ids only; the text is
    carried for the record (worlds may keep descriptions or references).
    """

    text: str = ""
    contract_ids: tuple[str, ...] = ()
    event_refs: tuple[int, ...] = ()


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------

class ActionKind(str, Enum):
    PROMISE_PAY = "promise-pay"
    PROMISE_ACCEPT_PAYMENT = "promise-accept-payment"
    PAY = "pay"
    RECEIVE_PAYMENT = "receive-payment"
    ACKNOWLEDGE_RECEIPT = "acknowledge-receipt"
    PROMISE_BUY_ON_CONDITION = "promise-buy-on-condition"
    BUY_ON_CREDIT = "buy-on-credit"
    ASSERT_EXPECTATION = "assert-expectation"
    JUSTIFY_ENTITLEMENT = "justify-entitlement"
    PROMISE_INSURANCE_PAYOUT = "promise-insurance-payout"
    PROMISE_MANAGE_FUNDS = "promise-manage-funds"
    EXCHANGE_DENOMINATIONS = "exchange-denominations"
    SPOT_SALE = "spot-sale"
    INFORM = "inform"
    SIGN_CONTRACT = "sign-contract"
    PREPARE_CONTRACT = "prepare-contract"
    PREPARE_GOOD = "prepare-good"
    REQUEST_PREPARE_GOOD = "request-prepare-good"


PROMISE_KINDS = frozenset(
    {
        ActionKind.PROMISE_PAY,
        ActionKind.PROMISE_ACCEPT_PAYMENT,
        ActionKind.PROMISE_BUY_ON_CONDITION,
        ActionKind.PROMISE_INSURANCE_PAYOUT,
        ActionKind.PROMISE_MANAGE_FUNDS,
    }
)


class EthicalTag(str, Enum):
    CONTINGENT_ON_CHANCE = "contingent-on-chance"
    UNDISCLOSED_INFORMATION = "undisclosed-information"
    COERCION = "coercion"


class SigningMode(str, Enum):
    INITIATOR_ONLY = "initiator-only"
    BOTH_PARTIES = "both-parties"


@dataclass(frozen=True, slots=True)
class GoodSpec:
    """Payload of a prepare-good action."""

    kind: str
    market_value: Optional[Quantity]
    block_size: Quantity = Quantity(1)
    is_money: bool = False


@dataclass(frozen=True, slots=True)
class ActionTemplate:
    """A pattern over actions; unset fields match anything.

    Used both for contract clauses (the obliged action) and for wait
    triggers (the enabling event).
    """

    kind: Optional[ActionKind] = None
    actor: Optional[str] = None
    counterparty: Optional[str] = None
    amount: Optional[Quantity] = None
    good_id: Optional[str] = None
    contract_id: Optional[str] = None
    message: Optional[str] = None

    def matches(self, action: "Action") -> bool:
        if self.kind is not None and action.kind != self.kind:
            return False
        if self.actor is not None and action.actor != self.actor:
            return False
        if self.counterparty is not None and action.counterparty != self.counterparty:
            return False
        if self.amount is not None and action.amount != self.amount:
            return False
        if self.good_id is not None and action.good_id != self.good_id:
            return False
        if self.message is not None and action.message != self.message:
            return False
        if self.contract_id is not None:
            if action.contract_id == self.contract_id:
                return True
            refs = action.reason.contract_ids if action.reason else ()
            return self.contract_id in refs
        return True


# triggers ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Always:
    pass


@dataclass(frozen=True, slots=True)
class AfterEvent:
    pattern: ActionTemplate


@dataclass(frozen=True, slots=True)
class ByDate:
    day: int


@dataclass(frozen=True, slots=True)
class ConditionMet:
    condition: "Condition"


Trigger = Always | AfterEvent | ByDate | ConditionMet


# conditions over the ground state (serialisable, no lambdas) ----------------

@dataclass(frozen=True, slots=True)
class ChoiceIs:
    name: str
    value: bool = True


@dataclass(frozen=True, slots=True)
class BalanceAtLeast:
    agent: str
    amount: Quantity


@dataclass(frozen=True, slots=True)
class OwnsGood:
    agent: str
    good_id: str


@dataclass(frozen=True, slots=True)
class ContractInStage:
    contract_id: str
    stage: "Stage"


Condition = ChoiceIs | BalanceAtLeast | OwnsGood | ContractInStage


def eval_condition(cond: Condition, world: "WorldState", choices: Mapping[str, bool]) -> bool:
    if isinstance(cond, ChoiceIs):
        return bool(choices.get(cond.name, False)) == cond.value
    if isinstance(cond, BalanceAtLeast):
        return world.balance(cond.agent) >= cond.amount
    if isinstance(cond, OwnsGood):
        good = world.goods.get(cond.good_id)
        return good is not None and good.owner == cond.agent
    if isinstance(cond, ContractInStage):
        contract = world.contracts.get(cond.contract_id)
        return contract is not None and contract.stage == cond.stage
    raise TypeError(f"unknown condition {cond!r}")


# ---------------------------------------------------------------------------
# contracts
# ---------------------------------------------------------------------------

class Stage(str, Enum):
    DRAFTED = "drafted"
    PREPARED = "prepared"
    PARTIALLY_SIGNED = "partially-signed"
    ACTIVE = "active"
    PARTIALLY_HONOURED = "partially-honoured"
    HONOURED = "honoured"
    BREACHED = "breached"


_STAGE_NEXT: dict[Stage, frozenset[Stage]] = {
    Stage.DRAFTED: frozenset({Stage.PREPARED}),
    Stage.PREPARED: frozenset({Stage.PARTIALLY_SIGNED}),
    Stage.PARTIALLY_SIGNED: frozenset({Stage.ACTIVE}),
    Stage.ACTIVE: frozenset({Stage.PARTIALLY_HONOURED, Stage.HONOURED, Stage.BREACHED}),
    Stage.PARTIALLY_HONOURED: frozenset({Stage.HONOURED, Stage.BREACHED}),
    Stage.HONOURED: frozenset(),
    Stage.BREACHED: frozenset(),
}


def stage_transition_allowed(current: Stage, target: Stage) -> bool:
    return target == current or target in _STAGE_NEXT[current]


@dataclass(frozen=True, slots=True)
class Clause:
    """A conditional obligation inside a contract.

    The obligation activates once its trigger has fired (an always trigger
    is active from the start; a by-date trigger activates on that day); it
    is discharged by a history event matching the obliged action, no later
    than the deadline when one is set. A clause whose after-event trigger
    never fired is dormant: it neither blocks honouring nor breaches.
    """

    obliged_party: str
    obliged_action: ActionTemplate
    trigger: Trigger = field(default_factory=Always)
    deadline: Optional[int] = None


@dataclass(frozen=True, slots=True)
class RepaymentTerms:
    """Declared repayment formula of a money-loan contract.

    principal - fixed_cost + rate * principal, repayable after ``period``
    days. Declaring a positive rate ties the increment causally to the
    principal, which is what the structural interest detector looks for.
    """

    principal: Quantity
    rate: Quantity
    fixed_cost: Quantity = ZERO
    period: int = 0

    def repayment(self) -> Quantity:
        return self.principal - self.fixed_cost + self.rate * self.principal


@dataclass(frozen=True, slots=True)
class ContractRecord:
    contract_id: str
    parties: frozenset[str]
    initiator: str
    clauses: tuple[Clause, ...]
    references: frozenset[str] = frozenset()
    signatures: frozenset[str] = frozenset()
    stage: Stage = Stage.DRAFTED
    terms: Optional[RepaymentTerms] = None


# ---------------------------------------------------------------------------
# actions and events
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Action:
    """One agent action; parameter relevance depends on the kind.

    Conventions: for PAY the actor pays the counterparty; for
    RECEIVE_PAYMENT the actor receives from the counterparty; for SPOT_SALE
    the actor is the seller and the counterparty the buyer; for
    BUY_ON_CREDIT the actor is the buyer, ``amount`` the total price,
    ``down_payment`` the part settled at once and ``due_date`` the day the
    remainder falls due (an active payment contract is generated under
    ``contract_id``). Promise kinds produce contracts; PREPARE_CONTRACT
    carries explicit parties/clauses; PREPARE_GOOD carries a good
    specification.
    """

    kind: ActionKind
    actor: str
    counterparty: Optional[str] = None
    amount: Optional[Quantity] = None
    down_payment: Optional[Quantity] = None
    due_date: Optional[int] = None
    good_id: Optional[str] = None
    contract_id: Optional[str] = None
    reason: Optional[Reason] = None
    channel: Optional[str] = None
    message: Optional[str] = None
    tags: frozenset[EthicalTag] = frozenset()
    signing: SigningMode = SigningMode.BOTH_PARTIES
    trigger: Optional[Trigger] = None
    on_credit: bool = False
    parties: tuple[str, ...] = ()
    clauses: tuple[Clause, ...] = ()
    references: tuple[str, ...] = ()
    terms: Optional[RepaymentTerms] = None
    good_spec: Optional[GoodSpec] = None


@dataclass(frozen=True, slots=True)
class Event:
    seq: int
    date: int
    action: Action
    delta: str = ""


HistoryLog = tuple[Event, ...]


# ---------------------------------------------------------------------------
# world state
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class WorldState:
    """Immutable snapshot of ground + contract + history levels.

    Never mutated in place; apply_event returns a fresh snapshot, so
    snapshots are safe to share across concurrent evaluation contexts.
    """

    agents: Mapping[str, Agent] = field(default_factory=dict)
    accounts: Mapping[str, Quantity] = field(default_factory=dict)
    goods: Mapping[str, Good] = field(default_factory=dict)
    contracts: Mapping[str, ContractRecord] = field(default_factory=dict)
    history: HistoryLog = ()
    clock: int = 0
    overdraft_allowed: bool = False

    def balance(self, agent: str) -> Quantity:
        return self.accounts.get(agent, ZERO)

    def account(self, agent: str) -> Account:
        if agent not in self.agents:
            raise UnknownReference(f"unknown agent {agent!r}")
        return Account(owner=agent, balance=self.accounts.get(agent, ZERO))

    def total_money(self) -> Quantity:
        total = ZERO
        for value in self.accounts.values():
            total = total + value
        return total

    def next_seq(self) -> int:
        return len(self.history) + 1


def make_world(
    agents: Sequence[Agent],
    balances: Mapping[str, Quantity] | None = None,
    goods: Sequence[Good] = (),
    contracts: Sequence[ContractRecord] = (),
    overdraft_allowed: bool = False,
) -> WorldState:
    """Assemble an initial snapshot, checking uniqueness and references."""
    agent_map: dict[str, Agent] = {}
    for agent in agents:
        if agent.name in agent_map:
            raise ValidationError(f"duplicate agent {agent.name!r}")
        agent_map[agent.name] = agent
    account_map = {name: ZERO for name in agent_map}
    for name, amount in (balances or {}).items():
        if name not in agent_map:
            raise UnknownReference(f"balance for unknown agent {name!r}")
        if amount < ZERO and not overdraft_allowed:
            raise ValidationError(f"negative opening balance for {name!r}")
        account_map[name] = amount
    good_map: dict[str, Good] = {}
    for good in goods:
        if good.good_id in good_map:
            raise ValidationError(f"duplicate good {good.good_id!r}")
        if good.owner not in agent_map:
            raise UnknownReference(f"good {good.good_id!r} owned by unknown agent")
        _check_good_value(good.market_value, good.block_size, good.good_id)
        good_map[good.good_id] = good
    contract_map: dict[str, ContractRecord] = {}
    for contract in contracts:
        if contract.contract_id in contract_map:
            raise ValidationError(f"duplicate contract {contract.contract_id!r}")
        for ref in contract.references:
            if ref not in contract_map:
                raise UnknownReference(
                    f"contract {contract.contract_id!r} references unknown {ref!r}"
                )
        contract_map[contract.contract_id] = contract
    return WorldState(
        agents=agent_map,
        accounts=account_map,
        goods=good_map,
        contracts=contract_map,
        overdraft_allowed=overdraft_allowed,
    )


def _check_good_value(value: Optional[Quantity], block: Quantity, good_id: str) -> None:
    if value is not None and value < ZERO:
        raise ValidationError(f"good {good_id!r} has negative market value")
    if block <= ZERO:
        raise ValidationError(f"good {good_id!r} has nonpositive block size")
    if value is not None and (value / block).den != 1:
        raise ValidationError(
            f"good {good_id!r}: market value {value} is not a multiple of block size {block}"
        )


# ---------------------------------------------------------------------------
# the transition function
# ---------------------------------------------------------------------------

def apply_event(world: WorldState, action: Action, date: int) -> WorldState:
    """Apply one action at the given date, returning the successor world.

    Raises InsufficientFunds / NotOwner / StageViolation / UnknownReference /
    ValidationError; on success the event gets the next gap-free sequence
    number and total money across accounts is unchanged except by explicit
    opening endowments (payments and sales are zero-sum by construction).
    """
    if date < world.clock:
        raise ValidationError(f"event date {date} precedes world clock {world.clock}")
    _validate_common(world, action)

    accounts = dict(world.accounts)
    goods = dict(world.goods)
    contracts = dict(world.contracts)
    seq = world.next_seq()
    deltas: list[str] = []

    def move_cash(payer: str, payee: str, amount: Quantity) -> None:
        if amount < ZERO:
            raise ValidationError("cash movements must be nonnegative")
        if not world.overdraft_allowed and accounts[payer] < amount:
            raise InsufficientFunds(
                f"{payer} holds {accounts[payer]}, cannot pay {amount}"
            )
        if amount == ZERO:
            return
        accounts[payer] = accounts[payer] - amount
        accounts[payee] = accounts[payee] + amount
        deltas.append(f"{payer} -{amount}; {payee} +{amount}")

    def move_good(good_id: str, seller: str, buyer: str) -> None:
        good = goods.get(good_id)
        if good is None:
            raise UnknownReference(f"unknown good {good_id!r}")
        if good.owner != seller:
            raise NotOwner(f"{seller} does not own {good_id} (owner: {good.owner})")
        goods[good_id] = replace(good, owner=buyer)
        deltas.append(f"{good_id} owner: {seller} -> {buyer}")

    def add_contract(record: ContractRecord) -> None:
        if record.contract_id in contracts:
            raise ValidationError(f"contract id {record.contract_id!r} already exists")
        for ref in record.references:
            if ref not in contracts:
                raise UnknownReference(f"reference to unknown contract {ref!r}")
        contracts[record.contract_id] = record
        deltas.append(f"contract {record.contract_id} {record.stage.value}")

    kind = action.kind
    if kind == ActionKind.PAY:
        _need(action, "counterparty", "amount")
        move_cash(action.actor, action.counterparty, action.amount)
    elif kind == ActionKind.RECEIVE_PAYMENT:
        _need(action, "counterparty", "amount")
        move_cash(action.counterparty, action.actor, action.amount)
    elif kind == ActionKind.SPOT_SALE:
        _need(action, "counterparty", "amount", "good_id")
        move_good(action.good_id, action.actor, action.counterparty)
        move_cash(action.counterparty, action.actor, action.amount)
    elif kind == ActionKind.BUY_ON_CREDIT:
        _need(action, "counterparty", "amount", "due_date")
        if action.good_id is None:
            raise ValidationError("buy-on-credit requires a good")
        if action.due_date < date:
            raise ValidationError("credit due date precedes the sale date")
        down = action.down_payment or ZERO
        if down > action.amount:
            raise ValidationError("down payment exceeds the credit price")
        move_good(action.good_id, action.counterparty, action.actor)
        if down > ZERO:
            move_cash(action.actor, action.counterparty, down)
        remainder = action.amount - down
        settle_id = action.contract_id or f"credit-{seq}"
        refs = frozenset(action.reason.contract_ids) if action.reason else frozenset()
        add_contract(
            ContractRecord(
                contract_id=settle_id,
                parties=frozenset({action.actor, action.counterparty}),
                initiator=action.actor,
                clauses=(
                    Clause(
                        obliged_party=action.actor,
                        obliged_action=ActionTemplate(
                            kind=ActionKind.PAY,
                            actor=action.actor,
                            counterparty=action.counterparty,
                            amount=remainder,
                            contract_id=settle_id,
                        ),
                        deadline=action.due_date,
                    ),
                ),
                references=refs,
                signatures=frozenset({action.actor, action.counterparty}),
                stage=Stage.ACTIVE,
            )
        )
    elif kind in PROMISE_KINDS:
        record = promise_to_contract(action, action.signing, contract_id=action.contract_id or f"promise-{seq}")
        add_contract(record)
    elif kind == ActionKind.PREPARE_CONTRACT:
        _need(action, "contract_id")
        parties = action.parties or ((action.actor, action.counterparty) if action.counterparty else (action.actor,))
        for clause in action.clauses:
            if clause.obliged_party not in parties:
                raise ValidationError(
                    f"clause obliges {clause.obliged_party!r}, not a party to {action.contract_id!r}"
                )
        add_contract(
            ContractRecord(
                contract_id=action.contract_id,
                parties=frozenset(parties),
                initiator=action.actor,
                clauses=action.clauses,
                references=frozenset(action.references),
                stage=Stage.PREPARED,
                terms=action.terms,
            )
        )
    elif kind == ActionKind.SIGN_CONTRACT:
        _need(action, "contract_id")
        record = contracts.get(action.contract_id)
        if record is None:
            raise UnknownReference(f"unknown contract {action.contract_id!r}")
        if action.actor not in record.parties:
            raise ValidationError(f"{action.actor} is not a party to {action.contract_id}")
        if record.stage not in (Stage.PREPARED, Stage.PARTIALLY_SIGNED):
            raise StageViolation(
                f"contract {action.contract_id} is {record.stage.value}, not signable"
            )
        if action.actor in record.signatures:
            raise StageViolation(f"{action.actor} already signed {action.contract_id}")
        signatures = record.signatures | {action.actor}
        stage = Stage.ACTIVE if signatures == record.parties else Stage.PARTIALLY_SIGNED
        contracts[action.contract_id] = replace(record, signatures=signatures, stage=stage)
        deltas.append(f"contract {action.contract_id} {stage.value}")
    elif kind == ActionKind.PREPARE_GOOD:
        _need(action, "good_id")
        if action.good_spec is None:
            raise ValidationError("prepare-good requires a good specification")
        if action.good_id in goods:
            raise ValidationError(f"good id {action.good_id!r} already exists")
        spec = action.good_spec
        _check_good_value(spec.market_value, spec.block_size, action.good_id)
        goods[action.good_id] = Good(
            good_id=action.good_id,
            kind=spec.kind,
            owner=action.actor,
            market_value=spec.market_value,
            block_size=spec.block_size,
            is_money=spec.is_money,
        )
        deltas.append(f"{action.good_id} prepared by {action.actor}")
    elif kind == ActionKind.EXCHANGE_DENOMINATIONS:
        # an equal-total swap of coins and notes moves no net cash
        _need(action, "counterparty", "amount")
    elif kind == ActionKind.REQUEST_PREPARE_GOOD:
        _need(action, "counterparty", "good_id")
    elif kind in (
        ActionKind.ASSERT_EXPECTATION,
        ActionKind.JUSTIFY_ENTITLEMENT,
        ActionKind.INFORM,
    ):
        # log-only speech acts directed at a counterparty
        _need(action, "counterparty")
    elif kind == ActionKind.ACKNOWLEDGE_RECEIPT:
        # broadcast to all agents involved; the source is optional context
        _need(action)
    else:  # pragma: no cover - exhaustive over ActionKind
        raise ValidationError(f"unhandled action kind {kind}")

    event = Event(seq=seq, date=date, action=action, delta="; ".join(deltas))
    return WorldState(
        agents=world.agents,
        accounts=accounts,
        goods=goods,
        contracts=contracts,
        history=world.history + (event,),
        clock=date,
        overdraft_allowed=world.overdraft_allowed,
    )


def _need(action: Action, *fields_: str) -> None:
    for name in fields_:
        if getattr(action, name) is None:
            raise ValidationError(f"{action.kind.value} requires {name}")
    if action.amount is not None and action.amount < ZERO:
        raise ValidationError("sums must be nonnegative")


def _validate_common(world: WorldState, action: Action) -> None:
    if action.actor not in world.agents:
        raise UnknownReference(f"unknown actor {action.actor!r}")
    if action.counterparty is not None and action.counterparty not in world.agents:
        raise UnknownReference(f"unknown counterparty {action.counterparty!r}")
    if action.reason:
        for cid in action.reason.contract_ids:
            if cid not in world.contracts:
                raise UnknownReference(f"reason cites unknown contract {cid!r}")
        for ref in action.reason.event_refs:
            if not 1 <= ref <= len(world.history):
                raise UnknownReference(f"reason cites unknown event {ref}")
    for ref in action.references:
        if ref not in world.contracts:
            raise UnknownReference(f"reference to unknown contract {ref!r}")


# ---------------------------------------------------------------------------
# promises to contracts
# ---------------------------------------------------------------------------

def promise_to_contract(
    promise: Action,
    signing_mode: SigningMode = SigningMode.BOTH_PARTIES,
    contract_id: Optional[str] = None,
) -> ContractRecord:
    """Turn a promise action into the signed contract it produces.

    One clause per promised obligation; stage is PARTIALLY_SIGNED when only
    the initiator signs, ACTIVE when both parties do.
    """
    if promise.kind not in PROMISE_KINDS:
        raise ValidationError(f"{promise.kind.value} is not a promise")
    if promise.counterparty is None:
        raise ValidationError("a promise needs a counterparty")
    cid = contract_id or promise.contract_id
    if cid is None:
        raise ValidationError("promise contract needs an id")
    actor, other = promise.actor, promise.counterparty

    if promise.kind == ActionKind.PROMISE_PAY:
        _need(promise, "amount")
        clauses = (
            Clause(
                obliged_party=actor,
                obliged_action=ActionTemplate(
                    kind=ActionKind.PAY, actor=actor, counterparty=other,
                    amount=promise.amount, contract_id=cid,
                ),
                deadline=promise.due_date,
            ),
        )
    elif promise.kind == ActionKind.PROMISE_ACCEPT_PAYMENT:
        _need(promise, "amount")
        clauses = (
            Clause(
                obliged_party=actor,
                obliged_action=ActionTemplate(
                    kind=ActionKind.RECEIVE_PAYMENT, actor=actor, counterparty=other,
                    amount=promise.amount, contract_id=cid,
                ),
                deadline=promise.due_date,
            ),
        )
    elif promise.kind == ActionKind.PROMISE_BUY_ON_CONDITION:
        _need(promise, "amount")
        if promise.good_id is None:
            raise ValidationError("promise-buy-on-condition requires a good")
        trigger = promise.trigger or AfterEvent(
            ActionTemplate(kind=ActionKind.PREPARE_GOOD, good_id=promise.good_id)
        )
        if promise.on_credit:
            obliged = ActionTemplate(
                kind=ActionKind.BUY_ON_CREDIT, actor=actor, counterparty=other,
                amount=promise.amount, good_id=promise.good_id,
            )
        else:
            # a spot purchase is executed by the seller, so the discharging
            # event has the counterparty as its actor
            obliged = ActionTemplate(
                kind=ActionKind.SPOT_SALE, actor=other, counterparty=actor,
                amount=promise.amount, good_id=promise.good_id,
            )
        clauses = (
            Clause(obliged_party=actor, obliged_action=obliged, trigger=trigger,
                   deadline=promise.due_date),
        )
    elif promise.kind == ActionKind.PROMISE_INSURANCE_PAYOUT:
        _need(promise, "amount")
        premium = promise.down_payment
        if premium is None:
            raise ValidationError("promise-insurance-payout requires a premium (down_payment)")
        clauses = (
            Clause(
                obliged_party=actor,
                obliged_action=ActionTemplate(
                    kind=ActionKind.PAY, actor=actor, counterparty=other,
                    amount=promise.amount, contract_id=cid,
                ),
                trigger=AfterEvent(
                    ActionTemplate(kind=ActionKind.PAY, actor=other,
                                   counterparty=actor, amount=premium)
                ),
                deadline=promise.due_date,
            ),
        )
    else:  # PROMISE_MANAGE_FUNDS
        _need(promise, "amount")
        clauses = (
            Clause(
                obliged_party=actor,
                obliged_action=ActionTemplate(
                    kind=ActionKind.PAY, actor=actor, counterparty=other,
                    amount=promise.amount, contract_id=cid,
                ),
                trigger=AfterEvent(
                    ActionTemplate(kind=ActionKind.PAY, actor=other, counterparty=actor)
                ),
                deadline=promise.due_date,
            ),
        )

    parties = frozenset({actor, other})
    if signing_mode == SigningMode.BOTH_PARTIES:
        signatures, stage = parties, Stage.ACTIVE
    else:
        signatures, stage = frozenset({actor}), Stage.PARTIALLY_SIGNED
    return ContractRecord(
        contract_id=cid,
        parties=parties,
        initiator=actor,
        clauses=clauses,
        references=frozenset(promise.reason.contract_ids) if promise.reason else frozenset(),
        signatures=signatures,
        stage=stage,
        terms=promise.terms,
    )


# ---------------------------------------------------------------------------
# honour status
# ---------------------------------------------------------------------------

def trigger_fired(trigger: Trigger, history: HistoryLog, now: int,
                  world: Optional[WorldState] = None,
                  choices: Mapping[str, bool] | None = None) -> bool:
    if isinstance(trigger, Always):
        return True
    if isinstance(trigger, ByDate):
        return now >= trigger.day
    if isinstance(trigger, AfterEvent):
        return any(trigger.pattern.matches(event.action) for event in history)
    if isinstance(trigger, ConditionMet):
        if world is None:
            return False
        return eval_condition(trigger.condition, world, choices or {})
    raise TypeError(f"unknown trigger {trigger!r}")


def _clause_discharged(clause: Clause, history: HistoryLog) -> bool:
    for event in history:
        if clause.obliged_action.matches(event.action):
            if clause.deadline is None or event.date <= clause.deadline:
                return True
    return False


def honour_status(contract: ContractRecord, history: HistoryLog, now: int) -> Stage:
    """Refined life-cycle status of an active contract against a history.

    Honoured when every live clause has a discharging event; partially
    honoured when some do; breached when a live clause's deadline passed
    undischarged. Clauses whose after-event trigger never fired stay
    dormant and are ignored. The stored stage is returned unchanged when
    nothing has been discharged yet.
    """
    if contract.stage in (Stage.DRAFTED, Stage.PREPARED, Stage.PARTIALLY_SIGNED):
        raise StageViolation(
            f"contract {contract.contract_id} is {contract.stage.value}; honour status "
            "applies to active contracts"
        )
    live: list[Clause] = []
    for clause in contract.clauses:
        if isinstance(clause.trigger, AfterEvent) and not trigger_fired(clause.trigger, history, now):
            continue
        live.append(clause)
    if not live:
        return contract.stage
    discharged = [c for c in live if _clause_discharged(c, history)]
    for clause in live:
        if clause not in discharged and clause.deadline is not None and now > clause.deadline:
            return Stage.BREACHED
    if len(discharged) == len(live):
        return Stage.HONOURED
    if discharged:
        return Stage.PARTIALLY_HONOURED
    return contract.stage


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def replay(initial: WorldState, history: Iterable[Event]) -> WorldState:
    """Re-apply a history from an initial snapshot.

    Replaying a world's own history from its initial state reproduces the
    ground and contract levels exactly; tests compare serialized bytes.
    """
    world = initial
    for event in history:
        world = apply_event(world, event.action, event.date)
    return world


# ---------------------------------------------------------------------------
# serialization (stable field names, exact quantities)
# ---------------------------------------------------------------------------

def _q(value: Optional[Quantity]) -> Optional[str]:
    return None if value is None else str(value)


def template_to_dict(t: ActionTemplate) -> dict:
    out: dict = {}
    if t.kind is not None:
        out["kind"] = t.kind.value
    for name in ("actor", "counterparty", "good_id", "contract_id", "message"):
        value = getattr(t, name)
        if value is not None:
            out[name] = value
    if t.amount is not None:
        out["amount"] = str(t.amount)
    return out


def template_from_dict(data: Mapping) -> ActionTemplate:
    return ActionTemplate(
        kind=ActionKind(data["kind"]) if "kind" in data else None,
        actor=data.get("actor"),
        counterparty=data.get("counterparty"),
        amount=parse_quantity(data["amount"]) if "amount" in data else None,
        good_id=data.get("good_id"),
        contract_id=data.get("contract_id"),
        message=data.get("message"),
    )


def trigger_to_dict(trigger: Trigger) -> dict:
    if isinstance(trigger, Always):
        return {"always": True}
    if isinstance(trigger, ByDate):
        return {"by_date": trigger.day}
    if isinstance(trigger, AfterEvent):
        return {"after_event": template_to_dict(trigger.pattern)}
    if isinstance(trigger, ConditionMet):
        return {"condition": condition_to_dict(trigger.condition)}
    raise TypeError(f"unknown trigger {trigger!r}")


def trigger_from_dict(data: Mapping) -> Trigger:
    if data.get("always"):
        return Always()
    if "by_date" in data:
        return ByDate(int(data["by_date"]))
    if "after_event" in data:
        return AfterEvent(template_from_dict(data["after_event"]))
    if "condition" in data:
        return ConditionMet(condition_from_dict(data["condition"]))
    raise ValueError(f"cannot parse trigger {data!r}")


def condition_to_dict(cond: Condition) -> dict:
    if isinstance(cond, ChoiceIs):
        return {"choice": cond.name, "value": cond.value}
    if isinstance(cond, BalanceAtLeast):
        return {"balance_at_least": {"agent": cond.agent, "amount": str(cond.amount)}}
    if isinstance(cond, OwnsGood):
        return {"owns_good": {"agent": cond.agent, "good_id": cond.good_id}}
    if isinstance(cond, ContractInStage):
        return {"contract_stage": {"contract_id": cond.contract_id, "stage": cond.stage.value}}
    raise TypeError(f"unknown condition {cond!r}")


def condition_from_dict(data: Mapping) -> Condition:
    if "choice" in data:
        return ChoiceIs(data["choice"], bool(data.get("value", True)))
    if "balance_at_least" in data:
        d = data["balance_at_least"]
        return BalanceAtLeast(d["agent"], parse_quantity(d["amount"]))
    if "owns_good" in data:
        d = data["owns_good"]
        return OwnsGood(d["agent"], d["good_id"])
    if "contract_stage" in data:
        d = data["contract_stage"]
        return ContractInStage(d["contract_id"], Stage(d["stage"]))
    raise ValueError(f"cannot parse condition {data!r}")


def clause_to_dict(clause: Clause) -> dict:
    out = {
        "obliged_party": clause.obliged_party,
        "obliged_action": template_to_dict(clause.obliged_action),
        "trigger": trigger_to_dict(clause.trigger),
    }
    if clause.deadline is not None:
        out["deadline"] = clause.deadline
    return out


def clause_from_dict(data: Mapping) -> Clause:
    return Clause(
        obliged_party=data["obliged_party"],
        obliged_action=template_from_dict(data["obliged_action"]),
        trigger=trigger_from_dict(data.get("trigger", {"always": True})),
        deadline=data.get("deadline"),
    )


def terms_to_dict(terms: RepaymentTerms) -> dict:
    return {
        "principal": str(terms.principal),
        "rate": str(terms.rate),
        "fixed_cost": str(terms.fixed_cost),
        "period": terms.period,
    }


def terms_from_dict(data: Mapping) -> RepaymentTerms:
    return RepaymentTerms(
        principal=parse_quantity(data["principal"]),
        rate=parse_quantity(data["rate"]),
        fixed_cost=parse_quantity(data.get("fixed_cost", "0")),
        period=int(data.get("period", 0)),
    )


def contract_to_dict(record: ContractRecord) -> dict:
    out = {
        "contract_id": record.contract_id,
        "parties": sorted(record.parties),
        "initiator": record.initiator,
        "clauses": [clause_to_dict(c) for c in record.clauses],
        "references": sorted(record.references),
        "signatures": sorted(record.signatures),
        "stage": record.stage.value,
    }
    if record.terms is not None:
        out["terms"] = terms_to_dict(record.terms)
    return out


def contract_from_dict(data: Mapping) -> ContractRecord:
    return ContractRecord(
        contract_id=data["contract_id"],
        parties=frozenset(data["parties"]),
        initiator=data["initiator"],
        clauses=tuple(clause_from_dict(c) for c in data.get("clauses", [])),
        references=frozenset(data.get("references", [])),
        signatures=frozenset(data.get("signatures", [])),
        stage=Stage(data.get("stage", "drafted")),
        terms=terms_from_dict(data["terms"]) if "terms" in data else None,
    )


def good_to_dict(good: Good) -> dict:
    return {
        "good_id": good.good_id,
        "kind": good.kind,
        "owner": good.owner,
        "market_value": _q(good.market_value),
        "block_size": str(good.block_size),
        "is_money": good.is_money,
    }


def good_from_dict(data: Mapping) -> Good:
    return Good(
        good_id=data["good_id"],
        kind=data.get("kind", "asset"),
        owner=data["owner"],
        market_value=parse_quantity(data["market_value"]) if data.get("market_value") else None,
        block_size=parse_quantity(data.get("block_size", "1")),
        is_money=bool(data.get("is_money", False)),
    )


def reason_to_dict(reason: Reason) -> dict:
    out: dict = {}
    if reason.text:
        out["text"] = reason.text
    if reason.contract_ids:
        out["contract_ids"] = list(reason.contract_ids)
    if reason.event_refs:
        out["event_refs"] = list(reason.event_refs)
    return out


def reason_from_dict(data: Mapping) -> Reason:
    return Reason(
        text=data.get("text", ""),
        contract_ids=tuple(data.get("contract_ids", ())),
        event_refs=tuple(data.get("event_refs", ())),
    )


def action_to_dict(action: Action) -> dict:
    out: dict = {"kind": action.kind.value, "actor": action.actor}
    if action.counterparty is not None:
        out["counterparty"] = action.counterparty
    if action.amount is not None:
        out["amount"] = str(action.amount)
    if action.down_payment is not None:
        out["down_payment"] = str(action.down_payment)
    if action.due_date is not None:
        out["due_date"] = action.due_date
    if action.good_id is not None:
        out["good_id"] = action.good_id
    if action.contract_id is not None:
        out["contract_id"] = action.contract_id
    if action.reason is not None:
        out["reason"] = reason_to_dict(action.reason)
    if action.channel is not None:
        out["channel"] = action.channel
    if action.message is not None:
        out["message"] = action.message
    if action.tags:
        out["tags"] = sorted(tag.value for tag in action.tags)
    if action.signing != SigningMode.BOTH_PARTIES:
        out["signing"] = action.signing.value
    if action.trigger is not None:
        out["trigger"] = trigger_to_dict(action.trigger)
    if action.on_credit:
        out["on_credit"] = True
    if action.parties:
        out["parties"] = list(action.parties)
    if action.clauses:
        out["clauses"] = [clause_to_dict(c) for c in action.clauses]
    if action.references:
        out["references"] = list(action.references)
    if action.terms is not None:
        out["terms"] = terms_to_dict(action.terms)
    if action.good_spec is not None:
        spec = action.good_spec
        out["good_spec"] = {
            "kind": spec.kind,
            "market_value": _q(spec.market_value),
            "block_size": str(spec.block_size),
            "is_money": spec.is_money,
        }
    return out


def action_from_dict(data: Mapping) -> Action:
    spec = None
    if "good_spec" in data:
        d = data["good_spec"]
        spec = GoodSpec(
            kind=d.get("kind", "asset"),
            market_value=parse_quantity(d["market_value"]) if d.get("market_value") else None,
            block_size=parse_quantity(d.get("block_size", "1")),
            is_money=bool(d.get("is_money", False)),
        )
    return Action(
        kind=ActionKind(data["kind"]),
        actor=data["actor"],
        counterparty=data.get("counterparty"),
        amount=parse_quantity(data["amount"]) if "amount" in data else None,
        down_payment=parse_quantity(data["down_payment"]) if "down_payment" in data else None,
        due_date=data.get("due_date"),
        good_id=data.get("good_id"),
        contract_id=data.get("contract_id"),
        reason=reason_from_dict(data["reason"]) if "reason" in data else None,
        channel=data.get("channel"),
        message=data.get("message"),
        tags=frozenset(EthicalTag(t) for t in data.get("tags", [])),
        signing=SigningMode(data.get("signing", "both-parties")),
        trigger=trigger_from_dict(data["trigger"]) if "trigger" in data else None,
        on_credit=bool(data.get("on_credit", False)),
        parties=tuple(data.get("parties", ())),
        clauses=tuple(clause_from_dict(c) for c in data.get("clauses", [])),
        references=tuple(data.get("references", ())),
        terms=terms_from_dict(data["terms"]) if "terms" in data else None,
        good_spec=spec,
    )


def event_to_dict(event: Event) -> dict:
    return {
        "seq": event.seq,
        "date": event.date,
        "action": action_to_dict(event.action),
        "delta": event.delta,
    }


def event_from_dict(data: Mapping) -> Event:
    return Event(
        seq=int(data["seq"]),
        date=int(data["date"]),
        action=action_from_dict(data["action"]),
        delta=data.get("delta", ""),
    )


def world_to_dict(world: WorldState, include_history: bool = True) -> dict:
    out = {
        "clock": world.clock,
        "overdraft_allowed": world.overdraft_allowed,
        "agents": [
            {"name": a.name, "role": a.role.value}
            for a in sorted(world.agents.values(), key=lambda a: a.name)
        ],
        "accounts": [
            {"owner": name, "balance": str(world.accounts[name])}
            for name in sorted(world.accounts)
        ],
        "goods": [good_to_dict(world.goods[g]) for g in sorted(world.goods)],
        "contracts": [contract_to_dict(world.contracts[c]) for c in sorted(world.contracts)],
    }
    if include_history:
        out["history"] = [event_to_dict(e) for e in world.history]
    return out


def world_to_json(world: WorldState, include_history: bool = True) -> str:
    return json.dumps(world_to_dict(world, include_history), indent=2, sort_keys=False)
