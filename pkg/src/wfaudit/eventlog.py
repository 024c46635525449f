"""Event-log ingestion, ordering, descriptive statistics, and chronological splitting.

A log is a list of cases; each case is an ordered list of events. Ordering
within a case is by (timestamp, event_index); the event_index is taken from
the source when a column is mapped and synthesized from file row order
otherwise, so a total order always exists.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from statistics import median
from typing import Iterable, Optional

from .errors import DegenerateSplit, EmptyLog, MissingColumn, ParseError
from .util import percentile


@dataclass(frozen=True)
class SchemaMapping:
    """Maps CSV column names onto the canonical event fields."""

    case_id: str = "case_id"
    activity: str = "activity"
    timestamp: str = "timestamp"
    event_index: Optional[str] = None
    resource: Optional[str] = None
    net_worth: Optional[str] = None
    item_type: Optional[str] = None
    gr_flag: Optional[str] = None
    timestamp_format: str = "%Y-%m-%d %H:%M:%S"
    csv_delimiter: str = ","
    extra_case_columns: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "SchemaMapping":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown schema keys: {sorted(unknown)}")
        if "extra_case_columns" in d:
            d = dict(d, extra_case_columns=tuple(d["extra_case_columns"]))
        return cls(**d)


#: Column layout of the public BPI Challenge 2019 CSV export.
BPI2019_SCHEMA = SchemaMapping(
    case_id="case concept:name",
    activity="event concept:name",
    timestamp="event time:timestamp",
    event_index="eventID ",
    resource="event User",
    net_worth="event Cumulative net worth (EUR)",
    item_type="case Item Type",
    gr_flag="case GR-Based Inv. Verif.",
    timestamp_format="%Y-%m-%d %H:%M:%S%z",
    csv_delimiter=",",
)


@dataclass(frozen=True)
class EventRecord:
    case_id: str
    activity: str
    timestamp: datetime
    event_index: int
    resource: str = ""
    cumulative_net_worth: float = 0.0
    case_attrs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Case:
    case_id: str
    events: tuple[EventRecord, ...]

    @property
    def completion_time(self) -> datetime:
        return self.events[-1].timestamp

    @property
    def n_decisions(self) -> int:
        """Number of nonterminal decisions (length minus one)."""
        return len(self.events) - 1


@dataclass(frozen=True)
class EventLog:
    cases: tuple[Case, ...]
    schema: Optional[SchemaMapping] = None

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    @property
    def n_events(self) -> int:
        return sum(len(c.events) for c in self.cases)

    @property
    def n_decisions(self) -> int:
        return sum(c.n_decisions for c in self.cases)

    def iter_events(self) -> Iterable[EventRecord]:
        for case in self.cases:
            yield from case.events


@dataclass(frozen=True)
class LogStats:
    n_cases: int
    n_events: int
    n_activities: int
    mean_case_len: float
    median_case_len: float
    p99_case_len: float
    max_case_len: int
    selfloop_transition_rate: float
    selfloop_case_rate: float
    start_activity_shares: dict

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["start_activity_shares"] = dict(sorted(self.start_activity_shares.items()))
        return d


def _parse_timestamp(raw: str, fmt: str, row: int, column: str) -> datetime:
    try:
        ts = datetime.strptime(raw.strip(), fmt)
    except ValueError as exc:
        raise ParseError(row, column, str(exc)) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_value(raw: str) -> float:
    raw = (raw or "").strip()
    if not raw:
        return 0.0
    return float(raw)


def ingest_csv(path: str | Path, schema: SchemaMapping) -> EventLog:
    """Read a UTF-8 CSV event log, group by case, and order events.

    Events within a case sort by (timestamp, event_index); cases sort by
    case_id. Missing net worth parses as 0, missing resource as "".
    """
    path = Path(path)
    groups: dict[str, list[EventRecord]] = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh, delimiter=schema.csv_delimiter)
        header = reader.fieldnames or []
        for col in (schema.case_id, schema.activity, schema.timestamp):
            if col not in header:
                raise MissingColumn(col)
        for opt in (schema.event_index, schema.resource, schema.net_worth,
                    schema.item_type, schema.gr_flag, *schema.extra_case_columns):
            if opt is not None and opt not in header:
                raise MissingColumn(opt)

        for rowno, row in enumerate(reader, start=2):
            case_id = (row[schema.case_id] or "").strip()
            if not case_id:
                raise ParseError(rowno, schema.case_id, "empty case id")
            activity = (row[schema.activity] or "").strip()
            if not activity:
                raise ParseError(rowno, schema.activity, "empty activity")
            ts = _parse_timestamp(row[schema.timestamp] or "", schema.timestamp_format,
                                  rowno, schema.timestamp)
            if schema.event_index is not None:
                try:
                    idx = int((row[schema.event_index] or "").strip())
                except ValueError:
                    # non-numeric source ids keep file order as tie-break
                    idx = rowno
            else:
                idx = rowno
            try:
                value = _parse_value(row[schema.net_worth]) if schema.net_worth else 0.0
            except ValueError as exc:
                raise ParseError(rowno, schema.net_worth, str(exc)) from None
            resource = (row[schema.resource] or "").strip() if schema.resource else ""
            attrs: dict[str, str] = {}
            if schema.item_type is not None:
                attrs["item_type"] = (row[schema.item_type] or "").strip()
            if schema.gr_flag is not None:
                attrs["gr_flag"] = (row[schema.gr_flag] or "").strip()
            for col in schema.extra_case_columns:
                attrs[col] = (row[col] or "").strip()
            groups.setdefault(case_id, []).append(EventRecord(
                case_id=case_id, activity=activity, timestamp=ts, event_index=idx,
                resource=resource, cumulative_net_worth=value, case_attrs=attrs))

    if not groups:
        raise EmptyLog(f"{path} has no event rows")

    cases = []
    for case_id in sorted(groups):
        events = sorted(groups[case_id], key=lambda e: (e.timestamp, e.event_index))
        cases.append(Case(case_id=case_id, events=tuple(events)))
    return EventLog(cases=tuple(cases), schema=schema)


def compute_log_stats(log: EventLog) -> LogStats:
    """Descriptive statistics: case-length distribution, self-loops, start shares."""
    if log.n_cases == 0:
        raise EmptyLog("log has no cases")
    lengths = sorted(len(c.events) for c in log.cases)
    activities: set[str] = set()
    starts: Counter[str] = Counter()
    n_transitions = 0
    n_selfloop_transitions = 0
    n_selfloop_cases = 0
    for case in log.cases:
        starts[case.events[0].activity] += 1
        looped = False
        for prev, nxt in zip(case.events, case.events[1:]):
            n_transitions += 1
            if prev.activity == nxt.activity:
                n_selfloop_transitions += 1
                looped = True
        if looped:
            n_selfloop_cases += 1
        activities.update(e.activity for e in case.events)
    n_cases = log.n_cases
    return LogStats(
        n_cases=n_cases,
        n_events=sum(lengths),
        n_activities=len(activities),
        mean_case_len=sum(lengths) / n_cases,
        median_case_len=float(median(lengths)),
        p99_case_len=percentile(lengths, 99.0),
        max_case_len=lengths[-1],
        selfloop_transition_rate=(n_selfloop_transitions / n_transitions) if n_transitions else 0.0,
        selfloop_case_rate=n_selfloop_cases / n_cases,
        start_activity_shares={a: c / n_cases for a, c in starts.items()},
    )


def chronological_split(log: EventLog, train_fraction: float) -> tuple[EventLog, EventLog]:
    """Split whole cases by completion time; earliest cases go to train.

    Ties in completion time break by case_id ascending. The train side gets
    ceil(train_fraction * n_cases) cases.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if log.n_cases < 2:
        raise DegenerateSplit("need at least 2 cases to split")
    ordered = sorted(log.cases, key=lambda c: (c.completion_time, c.case_id))
    k = -(-log.n_cases * train_fraction // 1)  # ceil
    k = int(k)
    if k == 0 or k == log.n_cases:
        raise DegenerateSplit("split leaves one side empty")
    train = sorted(ordered[:k], key=lambda c: c.case_id)
    test = sorted(ordered[k:], key=lambda c: c.case_id)
    return (EventLog(cases=tuple(train), schema=log.schema),
            EventLog(cases=tuple(test), schema=log.schema))
