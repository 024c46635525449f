"""Run configuration: schema mapping, abstraction settings, gate/cost grids.

A config file is TOML or JSON with optional sections `schema`, `abstraction`,
`gate`, and `cost`. CLI flags override config values, which override the
built-in defaults.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .abstraction import AbstractionLevel, ActorRule, ValueBinning
from .eventlog import BPI2019_SCHEMA, SchemaMapping


def load_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return json.loads(text)
    return tomli.loads(text)


def schema_from_config(doc: dict) -> Optional[SchemaMapping]:
    sec = doc.get("schema")
    if sec is None:
        return None
    if isinstance(sec, str):
        return resolve_schema(sec)
    return SchemaMapping.from_dict(sec)


def resolve_schema(spec: Optional[str]) -> SchemaMapping:
    """A schema flag is either the `bpi2019` preset or a config-file path."""
    if spec is None or spec == "canonical":
        from .synth import CANONICAL_SCHEMA
        return CANONICAL_SCHEMA
    if spec == "bpi2019":
        return BPI2019_SCHEMA
    doc = load_config(spec)
    got = schema_from_config(doc)
    if got is None:
        # allow a bare mapping file without a [schema] section
        got = SchemaMapping.from_dict(doc)
    return got


def actor_rule_from_config(doc: dict) -> ActorRule:
    sec = (doc.get("abstraction") or {}).get("actor") or {}
    if not sec:
        return ActorRule()
    return ActorRule(
        system_prefixes=tuple(sec.get("system_prefixes", ("batch",))),
        system_values=tuple(sec.get("system_values", ("none",))),
        empty_is_system=sec.get("empty_is_system", True),
        system_regex=sec.get("system_regex"),
    )


def bins_from_config(doc: dict) -> Optional[ValueBinning]:
    edges = (doc.get("abstraction") or {}).get("bin_edges")
    if not edges:
        return None
    q_low, q_mid, q_high = edges
    return ValueBinning(q_low=q_low, q_mid=q_mid, q_high=q_high)


def level_from_str(s: str) -> AbstractionLevel:
    try:
        return AbstractionLevel(s.lower())
    except ValueError:
        raise ValueError(f"unknown abstraction level {s!r} (expected l1, l2, or l3)") from None


def load_exception_set(path: str | Path) -> frozenset:
    """Newline-delimited activity names; blank lines and # comments ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(ln.strip() for ln in lines
                     if ln.strip() and not ln.strip().startswith("#"))
