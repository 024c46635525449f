"""Count tables and the empirical policy / kernel / occupancy views.

Every derived probability is a ratio of integer counts computed at query
time, so repeated runs on the same log are bit-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .abstraction import AbstractionLevel, Abstractor, StateKey
from .errors import UnknownState
from .eventlog import EventLog


@dataclass
class CountModel:
    """N(s), N(s,a), N(s,a,s') plus the value sums the risk weights need."""

    level: AbstractionLevel
    n_cases: int = 0
    n_events: int = 0
    n_decisions: int = 0
    n_s: dict = field(default_factory=dict)            # StateKey -> visits over ALL events
    n_s_dec: dict = field(default_factory=dict)        # StateKey -> nonterminal visits
    n_sa: dict = field(default_factory=dict)           # StateKey -> {action: count}
    n_sas: dict = field(default_factory=dict)          # (StateKey, action) -> {StateKey: count}
    value_sum_s: dict = field(default_factory=dict)    # StateKey -> sum |V_t| over visits
    pair_logv_sum: dict = field(default_factory=dict)  # (StateKey, action) -> sum log1p|V_t|
    max_abs_v: float = 0.0

    def iter_pairs(self) -> Iterable[tuple[StateKey, str, int]]:
        for s, actions in self.n_sa.items():
            for a, c in actions.items():
                yield s, a, c

    @property
    def n_states(self) -> int:
        return len(self.n_s)

    @property
    def n_pairs(self) -> int:
        return sum(len(actions) for actions in self.n_sa.values())

    @property
    def mean_decisions_per_case(self) -> float:
        return self.n_decisions / self.n_cases if self.n_cases else 0.0


def build_counts(log: EventLog, abstractor: Abstractor) -> CountModel:
    """One pass over the log: each consecutive event pair is one decision."""
    m = CountModel(level=abstractor.level, n_cases=log.n_cases)
    for case in log.cases:
        keys = abstractor.case_keys(case)
        for event, s in zip(case.events, keys):
            m.n_events += 1
            m.n_s[s] = m.n_s.get(s, 0) + 1
            v = abs(event.cumulative_net_worth)
            m.value_sum_s[s] = m.value_sum_s.get(s, 0.0) + v
            if v > m.max_abs_v:
                m.max_abs_v = v
        for t in range(len(case.events) - 1):
            s = keys[t]
            a = case.events[t + 1].activity
            s_next = keys[t + 1]
            m.n_decisions += 1
            m.n_s_dec[s] = m.n_s_dec.get(s, 0) + 1
            m.n_sa.setdefault(s, {})
            m.n_sa[s][a] = m.n_sa[s].get(a, 0) + 1
            nxt = m.n_sas.setdefault((s, a), {})
            nxt[s_next] = nxt.get(s_next, 0) + 1
            m.pair_logv_sum[(s, a)] = (m.pair_logv_sum.get((s, a), 0.0)
                                       + math.log1p(abs(case.events[t].cumulative_net_worth)))
    return m


def merge_counts(models: Iterable[CountModel]) -> CountModel:
    """Associative merge, so counts can be built on case shards in parallel."""
    models = list(models)
    if not models:
        raise ValueError("nothing to merge")
    level = models[0].level
    if any(m.level is not level for m in models):
        raise ValueError("cannot merge counts built at different abstraction levels")
    out = CountModel(level=level)
    for m in models:
        out.n_cases += m.n_cases
        out.n_events += m.n_events
        out.n_decisions += m.n_decisions
        out.max_abs_v = max(out.max_abs_v, m.max_abs_v)
        for s, c in m.n_s.items():
            out.n_s[s] = out.n_s.get(s, 0) + c
        for s, c in m.n_s_dec.items():
            out.n_s_dec[s] = out.n_s_dec.get(s, 0) + c
        for s, actions in m.n_sa.items():
            dst = out.n_sa.setdefault(s, {})
            for a, c in actions.items():
                dst[a] = dst.get(a, 0) + c
        for sa, nxts in m.n_sas.items():
            dst = out.n_sas.setdefault(sa, {})
            for s2, c in nxts.items():
                dst[s2] = dst.get(s2, 0) + c
        for s, v in m.value_sum_s.items():
            out.value_sum_s[s] = out.value_sum_s.get(s, 0.0) + v
        for sa, v in m.pair_logv_sum.items():
            out.pair_logv_sum[sa] = out.pair_logv_sum.get(sa, 0.0) + v
    return out


def policy(counts: CountModel, s: StateKey) -> dict:
    """Empirical next-action distribution at s."""
    actions = counts.n_sa.get(s)
    if not actions:
        raise UnknownState(f"no observed decisions at state {s}")
    total = sum(actions.values())
    return {a: c / total for a, c in actions.items()}


def greedy_action(counts: CountModel, s: StateKey) -> str:
    """Most frequent next action, ties broken by ascending label."""
    actions = counts.n_sa.get(s)
    if not actions:
        raise UnknownState(f"no observed decisions at state {s}")
    return min(actions, key=lambda a: (-actions[a], a))


def top_prob(counts: CountModel, s: StateKey) -> float:
    """m(s): probability of the greedy action; 0 for unobserved states."""
    actions = counts.n_sa.get(s)
    if not actions:
        return 0.0
    return max(actions.values()) / sum(actions.values())


def entropy_bits(counts: CountModel, s: StateKey) -> float:
    """Shannon entropy of the next-action distribution, in bits."""
    actions = counts.n_sa.get(s)
    if not actions:
        raise UnknownState(f"no observed decisions at state {s}")
    total = sum(actions.values())
    h = 0.0
    for c in actions.values():
        p = c / total
        h -= p * math.log2(p)
    return max(h, 0.0)


def kernel(counts: CountModel, s: StateKey, a: str) -> dict:
    """Empirical next-state distribution at (s, a)."""
    nxts = counts.n_sas.get((s, a))
    if not nxts:
        raise UnknownState(f"no observed transitions at ({s}, {a})")
    total = sum(nxts.values())
    return {s2: c / total for s2, c in nxts.items()}


@dataclass(frozen=True)
class OccupancyMeasure:
    d_state: dict    # StateKey -> N(s)/n_events, all events
    d_sa: dict       # (StateKey, action) -> N(s,a)/n_decisions
    d_visits: dict   # StateKey -> nonterminal visits per case
    mean_decisions: float


def occupancy(counts: CountModel) -> OccupancyMeasure:
    if counts.n_events == 0:
        raise UnknownState("empty count model")
    d_state = {s: c / counts.n_events for s, c in counts.n_s.items()}
    d_sa = {(s, a): c / counts.n_decisions for s, a, c in counts.iter_pairs()} \
        if counts.n_decisions else {}
    d_visits = {s: c / counts.n_cases for s, c in counts.n_s_dec.items()}
    return OccupancyMeasure(d_state=d_state, d_sa=d_sa, d_visits=d_visits,
                            mean_decisions=counts.mean_decisions_per_case)


# -- JSON artifact -----------------------------------------------------------

def _key_out(s: StateKey) -> list:
    return list(s)


def _key_in(fields: list) -> StateKey:
    return StateKey(*fields)


def counts_to_json(counts: CountModel) -> str:
    doc = {
        "level": counts.level.value,
        "n_cases": counts.n_cases,
        "n_events": counts.n_events,
        "n_decisions": counts.n_decisions,
        "max_abs_v": counts.max_abs_v,
        "n_s": sorted(([_key_out(s), c] for s, c in counts.n_s.items())),
        "n_s_dec": sorted(([_key_out(s), c] for s, c in counts.n_s_dec.items())),
        "n_sa": sorted(([_key_out(s), a, c] for s, a, c in counts.iter_pairs())),
        "n_sas": sorted(([_key_out(s), a, _key_out(s2), c]
                         for (s, a), nxts in counts.n_sas.items()
                         for s2, c in nxts.items())),
        "value_sum_s": sorted(([_key_out(s), v] for s, v in counts.value_sum_s.items())),
        "pair_logv_sum": sorted(([_key_out(s), a, v]
                                 for (s, a), v in counts.pair_logv_sum.items())),
    }
    return json.dumps(doc, sort_keys=True, default=str)


def counts_from_json(text: str) -> CountModel:
    doc = json.loads(text)
    m = CountModel(level=AbstractionLevel(doc["level"]),
                   n_cases=doc["n_cases"], n_events=doc["n_events"],
                   n_decisions=doc["n_decisions"], max_abs_v=doc["max_abs_v"])
    for k, c in doc["n_s"]:
        m.n_s[_key_in(k)] = c
    for k, c in doc["n_s_dec"]:
        m.n_s_dec[_key_in(k)] = c
    for k, a, c in doc["n_sa"]:
        m.n_sa.setdefault(_key_in(k), {})[a] = c
    for k, a, k2, c in doc["n_sas"]:
        m.n_sas.setdefault((_key_in(k), a), {})[_key_in(k2)] = c
    for k, v in doc["value_sum_s"]:
        m.value_sum_s[_key_in(k)] = v
    for k, a, v in doc["pair_logv_sum"]:
        m.pair_logv_sum[(_key_in(k), a)] = v
    return m


def save_counts(counts: CountModel, path: str | Path) -> None:
    Path(path).write_text(counts_to_json(counts), encoding="utf-8")


def load_counts(path: str | Path) -> CountModel:
    return counts_from_json(Path(path).read_text(encoding="utf-8"))
