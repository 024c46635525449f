"""Synthetic event-log generation from a fully specified ground-truth process.

Generated logs are the oracle fixtures for every estimator: the true policy,
kernel, values, and actors are known, and generation is deterministic given
the seed. Logs round-trip exactly through the canonical CSV schema.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from .errors import NonterminatingProcess
from .eventlog import Case, EventLog, EventRecord, SchemaMapping

#: Schema of CSV files written by the generator (and re-ingestable as-is).
CANONICAL_SCHEMA = SchemaMapping(
    case_id="case_id",
    activity="activity",
    timestamp="timestamp",
    event_index="event_index",
    resource="resource",
    net_worth="net_worth",
    item_type="item_type",
    gr_flag="gr_flag",
    timestamp_format="%Y-%m-%d %H:%M:%S",
)

_EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class ValueSampler:
    """|V| sampler: point mass at zero with probability zero_prob, else log-normal."""

    zero_prob: float = 1.0
    mu: float = 3.0
    sigma: float = 1.0

    def sample(self, rng: random.Random) -> float:
        if rng.random() < self.zero_prob:
            return 0.0
        return round(rng.lognormvariate(self.mu, self.sigma), 2)


@dataclass(frozen=True)
class StateSpec:
    activity: str
    item_type: str = "Standard"
    gr_flag: str = "true"
    resource: str = "user_001"
    values: ValueSampler = field(default_factory=ValueSampler)


@dataclass
class GroundTruthProcess:
    """States, true policy, true kernel, start distribution, termination cap.

    A state with no policy entry is absorbing. Kernel rows must send action a
    to a state whose activity equals a, matching the action-as-next-activity
    convention of the estimators.
    """

    states: dict                    # name -> StateSpec
    policy: dict                    # name -> {action: prob}; absent/empty => absorbing
    kernel: dict                    # (name, action) -> {next_name: prob}
    start: dict                     # name -> prob
    max_case_length: int = 200

    def __post_init__(self):
        self._check_dist(self.start, "start distribution")
        for s, row in self.policy.items():
            if row:
                self._check_dist(row, f"policy at {s}")
                for a in row:
                    krow = self.kernel.get((s, a))
                    if not krow:
                        raise ValueError(f"no kernel row for ({s}, {a})")
                    self._check_dist(krow, f"kernel at ({s}, {a})")
                    for s2 in krow:
                        if self.states[s2].activity != a:
                            raise ValueError(
                                f"kernel ({s}, {a}) -> {s2} breaks the "
                                f"action-as-next-activity convention")

    @staticmethod
    def _check_dist(dist: dict, what: str) -> None:
        if abs(sum(dist.values()) - 1.0) > 1e-9:
            raise ValueError(f"{what} does not sum to 1")
        if any(p < 0 for p in dist.values()):
            raise ValueError(f"{what} has negative probabilities")

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthProcess":
        states = {}
        for name, sd in d["states"].items():
            vs = sd.get("values", {})
            states[name] = StateSpec(
                activity=sd["activity"],
                item_type=sd.get("item_type", "Standard"),
                gr_flag=sd.get("gr_flag", "true"),
                resource=sd.get("resource", "user_001"),
                values=ValueSampler(zero_prob=vs.get("zero_prob", 1.0),
                                    mu=vs.get("mu", 3.0), sigma=vs.get("sigma", 1.0)),
            )
        kernel = {}
        for key, row in d.get("kernel", {}).items():
            s, a = key.split("|", 1) if isinstance(key, str) else key
            kernel[(s, a)] = dict(row)
        return cls(states=states, policy={s: dict(r) for s, r in d.get("policy", {}).items()},
                   kernel=kernel, start=dict(d["start"]),
                   max_case_length=d.get("max_case_length", 200))


def _draw(rng: random.Random, dist: dict) -> str:
    r = rng.random()
    acc = 0.0
    items = sorted(dist.items())
    for k, p in items:
        acc += p
        if r < acc:
            return k
    return items[-1][0]


def generate(process: GroundTruthProcess, n_cases: int, seed: int,
             case_start_stride_s: int = 1) -> EventLog:
    """Deterministic log: per-case RNG streams, strictly increasing clocks."""
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    width = max(4, len(str(n_cases - 1)))
    cases = []
    for i in range(n_cases):
        rng = random.Random(f"{seed}:{i}")  # independent per-case streams
        case_id = f"case_{i:0{width}d}"
        start_time = _EPOCH + timedelta(seconds=i * case_start_stride_s)
        name = _draw(rng, process.start)
        events = []
        step = 0
        while True:
            spec = process.states[name]
            events.append(EventRecord(
                case_id=case_id,
                activity=spec.activity,
                timestamp=start_time + timedelta(seconds=step),
                event_index=step,
                resource=spec.resource,
                cumulative_net_worth=spec.values.sample(rng),
                case_attrs={"item_type": spec.item_type, "gr_flag": spec.gr_flag},
            ))
            row = process.policy.get(name)
            if not row:
                break
            if step + 1 >= process.max_case_length:
                raise NonterminatingProcess(
                    f"case {case_id} exceeded cap {process.max_case_length}")
            action = _draw(rng, row)
            name = _draw(rng, process.kernel[(name, action)])
            step += 1
        cases.append(Case(case_id=case_id, events=tuple(events)))
    return EventLog(cases=tuple(cases), schema=CANONICAL_SCHEMA)


def write_csv(log: EventLog, path: str | Path) -> None:
    """Write a log in the canonical schema (re-ingestable byte-for-byte)."""
    s = CANONICAL_SCHEMA
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=s.csv_delimiter)
        w.writerow([s.case_id, s.activity, s.timestamp, s.event_index,
                    s.resource, s.net_worth, s.item_type, s.gr_flag])
        for case in log.cases:
            for e in case.events:
                w.writerow([
                    e.case_id, e.activity,
                    e.timestamp.astimezone(timezone.utc).strftime(s.timestamp_format),
                    e.event_index, e.resource, repr(e.cumulative_net_worth),
                    e.case_attrs.get("item_type", ""), e.case_attrs.get("gr_flag", ""),
                ])
