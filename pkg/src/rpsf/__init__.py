"""Reduced product set finance: a deterministic multi-agent simulator and
legality analyzer for composed financial products.

Layers: exact rational money (``money``), the layered world state and
action vocabulary (``world``), plan execution and interleaving enumeration
(``engine``), the built-in product catalogue (``scenarios``), pluggable
legal positions (``legality``), flow-trace equivalence and bounded
synthesis search (``synthesis``), and a command-line driver (``cli``).
"""

from .money import Quantity, ZERO, ONE, add, compare, inverse, multiply, negate, parse_quantity, subtract, total_div
from .world import (
    Action,
    ActionKind,
    ActionTemplate,
    AfterEvent,
    Agent,
    Always,
    ByDate,
    Clause,
    ConditionMet,
    ContractRecord,
    EthicalTag,
    Event,
    Good,
    GoodSpec,
    InsufficientFunds,
    NotOwner,
    Reason,
    RepaymentTerms,
    Role,
    SigningMode,
    Stage,
    StageViolation,
    UnknownReference,
    ValidationError,
    WorldError,
    WorldState,
    apply_event,
    honour_status,
    make_world,
    promise_to_contract,
    replay,
    world_to_dict,
    world_to_json,
)
from .engine import (
    BoundExceeded,
    Branch,
    DeadlockDetected,
    Do,
    EngineError,
    Exhaustive,
    HorizonExceeded,
    Plan,
    Progression,
    RoundRobin,
    SeededRandom,
    Stop,
    WaitFor,
    enumerate_interleavings,
    run,
)
from .scenarios import (
    ParameterViolation,
    ScenarioInstance,
    ScenarioSpec,
    UnknownScenario,
    instantiate,
    load_scenario_file,
    scenario_names,
)
from .legality import (
    BUILTIN_POSITIONS,
    CONVENTIONAL,
    Judgement,
    LegalPosition,
    MAJORITY,
    MALAYSIA,
    Mode,
    NonpositivePrincipal,
    RibaFinding,
    Rule,
    STRICT_DESCRIPTIVE,
    STRICT_FUNCTIONAL,
    Verdict,
    ZeroDuration,
    detect_ina,
    detect_riba,
    effective_interest_rate,
    judge,
)
from .synthesis import (
    ALL_AGENTS,
    Flow,
    FlowTrace,
    SynthesisResult,
    Witness,
    equivalent,
    monetary_projection,
    net_positions,
    synthesize,
    witness_scenario,
)

__version__ = "0.1.0"
