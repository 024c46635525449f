"""State abstraction: event -> StateKey at one of three refinement levels.

L1 keeps the activity only. L2 adds the case-level item type and
goods-receipt flag. L3 further adds a five-way bin of absolute cumulative
net worth and a human/system actor class derived from the resource field.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .errors import MissingAttribute
from .eventlog import Case, EventLog, EventRecord
from .util import percentile


class AbstractionLevel(Enum):
    L1 = "l1"
    L2 = "l2"
    L3 = "l3"


VALUE_BINS = ("zero", "low", "mid", "high", "very_high")

HUMAN = "human"
SYSTEM = "system"


class StateKey(NamedTuple):
    activity: str
    item_type: Optional[str] = None
    gr_flag: Optional[str] = None
    value_bin: Optional[str] = None
    actor_class: Optional[str] = None


# Actions are next-activity labels; a plain string keeps keys light.
ActionKey = str


def state_sort_key(s: StateKey) -> tuple:
    return tuple("" if f is None else f for f in s)


@dataclass(frozen=True)
class ActorRule:
    """Resource strings matching the pattern classify as system actors."""

    system_prefixes: tuple[str, ...] = ("batch",)
    system_values: tuple[str, ...] = ("none",)
    empty_is_system: bool = True
    system_regex: Optional[str] = None

    def classify(self, resource: str) -> str:
        r = resource.strip().lower()
        if not r:
            return SYSTEM if self.empty_is_system else HUMAN
        if r in self.system_values:
            return SYSTEM
        if any(r.startswith(p) for p in self.system_prefixes):
            return SYSTEM
        if self.system_regex is not None and re.search(self.system_regex, resource, re.IGNORECASE):
            return SYSTEM
        return HUMAN


DEFAULT_ACTOR_RULE = ActorRule()


def classify_actor(resource: str, rule: ActorRule = DEFAULT_ACTOR_RULE) -> str:
    return rule.classify(resource)


@dataclass(frozen=True)
class ValueBinning:
    """Edges partitioning nonzero |V| into low/mid/high/very_high.

    Edges belong to the lower bin: low is (0, q_low], mid is (q_low, q_mid],
    high is (q_mid, q_high], very_high is (q_high, inf). |V| = 0 is always
    the zero bin.
    """

    q_low: float
    q_mid: float
    q_high: float

    def __post_init__(self):
        if not (0.0 < self.q_low <= self.q_mid <= self.q_high):
            raise ValueError(f"edges must satisfy 0 < q_low <= q_mid <= q_high, got {self}")

    def assign(self, value: float) -> str:
        v = abs(value)
        if v == 0.0:
            return "zero"
        if v <= self.q_low:
            return "low"
        if v <= self.q_mid:
            return "mid"
        if v <= self.q_high:
            return "high"
        return "very_high"


def fit_value_binning(log: EventLog) -> ValueBinning:
    """Edges at the 25th/75th/95th percentiles of nonzero |V| over all events.

    Degenerate logs (no nonzero values) collapse all edges to a tiny positive
    number so that every event still bins to zero.
    """
    nonzero = sorted(abs(e.cumulative_net_worth) for e in log.iter_events()
                     if e.cumulative_net_worth != 0.0)
    if not nonzero:
        tiny = math.ulp(0.0)
        return ValueBinning(tiny, tiny, tiny)
    return ValueBinning(
        q_low=percentile(nonzero, 25.0),
        q_mid=percentile(nonzero, 75.0),
        q_high=percentile(nonzero, 95.0),
    )


def case_attributes(case: Case, defaults: Optional[dict] = None) -> tuple[str, str]:
    """Case-level (item_type, gr_flag), taken from the first event carrying each."""
    item_type = gr_flag = None
    for event in case.events:
        if item_type is None and event.case_attrs.get("item_type"):
            item_type = event.case_attrs["item_type"]
        if gr_flag is None and event.case_attrs.get("gr_flag"):
            gr_flag = event.case_attrs["gr_flag"]
        if item_type is not None and gr_flag is not None:
            break
    defaults = defaults or {}
    if item_type is None:
        item_type = defaults.get("item_type")
        if item_type is None:
            raise MissingAttribute("item_type", case.case_id)
    if gr_flag is None:
        gr_flag = defaults.get("gr_flag")
        if gr_flag is None:
            raise MissingAttribute("gr_flag", case.case_id)
    return item_type, gr_flag


def abstract_state(event: EventRecord, case: Case, level: AbstractionLevel,
                   bins: Optional[ValueBinning] = None,
                   actor_rule: ActorRule = DEFAULT_ACTOR_RULE,
                   attr_defaults: Optional[dict] = None) -> StateKey:
    """Map one event (with its case context) to a StateKey at the given level."""
    if level is AbstractionLevel.L1:
        return StateKey(activity=event.activity)
    item_type, gr_flag = case_attributes(case, attr_defaults)
    if level is AbstractionLevel.L2:
        return StateKey(activity=event.activity, item_type=item_type, gr_flag=gr_flag)
    if bins is None:
        raise ValueError("L3 abstraction requires a fitted ValueBinning")
    return StateKey(
        activity=event.activity,
        item_type=item_type,
        gr_flag=gr_flag,
        value_bin=bins.assign(event.cumulative_net_worth),
        actor_class=actor_rule.classify(event.resource),
    )


@dataclass(frozen=True)
class Abstractor:
    """A fully configured event -> StateKey mapping, fixed for one audit run."""

    level: AbstractionLevel
    bins: Optional[ValueBinning] = None
    actor_rule: ActorRule = DEFAULT_ACTOR_RULE
    attr_defaults: Optional[tuple[tuple[str, str], ...]] = None

    def _defaults(self) -> Optional[dict]:
        return dict(self.attr_defaults) if self.attr_defaults else None

    def key(self, event: EventRecord, case: Case) -> StateKey:
        return abstract_state(event, case, self.level, self.bins,
                              self.actor_rule, self._defaults())

    def case_keys(self, case: Case) -> list[StateKey]:
        return [self.key(e, case) for e in case.events]

    @classmethod
    def fit(cls, log: EventLog, level: AbstractionLevel,
            actor_rule: ActorRule = DEFAULT_ACTOR_RULE,
            attr_defaults: Optional[dict] = None) -> "Abstractor":
        """Fit value bins on the given log (only consulted at L3)."""
        bins = fit_value_binning(log) if level is AbstractionLevel.L3 else None
        return cls(level=level, bins=bins, actor_rule=actor_rule,
                   attr_defaults=tuple(sorted(attr_defaults.items())) if attr_defaults else None)
