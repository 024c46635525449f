"""Greedy gated agent on a held-out log, plus the theoretical surrogates.

The agent escalates wherever the gate fires and otherwise plays the most
frequent next action from the training counts; correctness compares that
action with the activity actually observed next in the held-out trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .abstraction import Abstractor, StateKey
from .audit import GateConfig, RiskWeights, gate_escalates
from .errors import AbstractionMismatch
from .eventlog import EventLog
from .model import CountModel, greedy_action, top_prob


@dataclass(frozen=True)
class DecisionRecord:
    case_id: str
    step: int
    state: StateKey
    escalated: bool
    greedy: Optional[str]     # None when escalated
    observed: str
    correct: Optional[bool]   # defined only for autonomous decisions


@dataclass(frozen=True)
class CaseOutcome:
    case_id: str
    n_decisions: int
    touches: int
    all_autonomous: bool
    zero_touch_success: bool
    safe_success: bool


@dataclass(frozen=True)
class AgentRun:
    cfg: GateConfig
    decisions: tuple[DecisionRecord, ...]
    cases: tuple[CaseOutcome, ...]

    @property
    def touches_per_case(self) -> float:
        return sum(c.touches for c in self.cases) / len(self.cases)

    @property
    def c0_test(self) -> float:
        return sum(c.zero_touch_success for c in self.cases) / len(self.cases)

    @property
    def r_safe_test(self) -> float:
        return sum(c.safe_success for c in self.cases) / len(self.cases)

    @property
    def case_autonomy(self) -> float:
        return sum(c.all_autonomous for c in self.cases) / len(self.cases)

    @property
    def m_step_test(self) -> Optional[float]:
        """Realized accuracy over autonomous decisions; None if none exist."""
        n = ok = 0
        for d in self.decisions:
            if not d.escalated:
                n += 1
                ok += bool(d.correct)
        return ok / n if n else None

    @property
    def autonomous_errors_per_case(self) -> float:
        errs = sum(1 for d in self.decisions if not d.escalated and not d.correct)
        return errs / len(self.cases)

    def correctness_series(self) -> list[int]:
        """Per-decision 0/1 series; escalated steps count as correct (handled)."""
        return [1 if (d.escalated or d.correct) else 0 for d in self.decisions]


def run_agent(test_log: EventLog, train_counts: CountModel, weights: RiskWeights,
              cfg: GateConfig, abstractor: Abstractor) -> AgentRun:
    """Replay every held-out case step by step through the gate."""
    if abstractor.level is not train_counts.level:
        raise AbstractionMismatch(
            f"abstractor level {abstractor.level} != counts level {train_counts.level}")
    verdict_cache: dict[StateKey, bool] = {}
    greedy_cache: dict[StateKey, str] = {}
    decisions: list[DecisionRecord] = []
    cases: list[CaseOutcome] = []
    for case in test_log.cases:
        keys = abstractor.case_keys(case)
        touches = 0
        zero_touch = True
        safe = True
        for t in range(len(case.events) - 1):
            s = keys[t]
            observed = case.events[t + 1].activity
            esc = verdict_cache.get(s)
            if esc is None:
                esc = gate_escalates(train_counts, weights, cfg, s)
                verdict_cache[s] = esc
            if esc:
                touches += 1
                zero_touch = False
                decisions.append(DecisionRecord(case.case_id, t, s, True, None,
                                                observed, None))
            else:
                a = greedy_cache.get(s)
                if a is None:
                    a = greedy_action(train_counts, s)
                    greedy_cache[s] = a
                correct = a == observed
                if not correct:
                    zero_touch = False
                    safe = False
                decisions.append(DecisionRecord(case.case_id, t, s, False, a,
                                                observed, correct))
        cases.append(CaseOutcome(
            case_id=case.case_id,
            n_decisions=len(case.events) - 1,
            touches=touches,
            all_autonomous=touches == 0,
            zero_touch_success=zero_touch,
            safe_success=safe,
        ))
    return AgentRun(cfg=cfg, decisions=tuple(decisions), cases=tuple(cases))


def surrogates(test_log: EventLog, train_counts: CountModel, weights: RiskWeights,
               cfg: GateConfig, abstractor: Abstractor) -> tuple[float, float]:
    """(zero-touch, safe-completion) product surrogates over held-out cases.

    Each nonterminal step contributes m(s) when autonomous and 1 when gated
    to the safe product, and (1 - G) * m(s) to the zero-touch product;
    states unseen in training have m(s) = 0 and always gate.
    """
    verdict_cache: dict[StateKey, bool] = {}
    m_cache: dict[StateKey, float] = {}
    c0_sum = 0.0
    safe_sum = 0.0
    for case in test_log.cases:
        keys = abstractor.case_keys(case)
        c0 = 1.0
        safe = 1.0
        for s in keys[:-1]:
            esc = verdict_cache.get(s)
            if esc is None:
                esc = gate_escalates(train_counts, weights, cfg, s)
                verdict_cache[s] = esc
            if esc:
                c0 = 0.0
            else:
                m = m_cache.get(s)
                if m is None:
                    m = top_prob(train_counts, s)
                    m_cache[s] = m
                c0 *= m
                safe *= m
        c0_sum += c0
        safe_sum += safe
    n = test_log.n_cases
    return c0_sum / n, safe_sum / n


def m_step_theory(test_log: EventLog, train_counts: CountModel, weights: RiskWeights,
                  cfg: GateConfig, abstractor: Abstractor) -> Optional[float]:
    """Mean m(s) over autonomous held-out decisions (decision-weighted)."""
    verdict_cache: dict[StateKey, bool] = {}
    total = 0.0
    n = 0
    for case in test_log.cases:
        keys = abstractor.case_keys(case)
        for s in keys[:-1]:
            esc = verdict_cache.get(s)
            if esc is None:
                esc = gate_escalates(train_counts, weights, cfg, s)
                verdict_cache[s] = esc
            if not esc:
                total += top_prob(train_counts, s)
                n += 1
    return total / n if n else None


@dataclass(frozen=True)
class ValidationSummary:
    cfg: GateConfig
    m_step_theory: Optional[float]
    m_step_test: Optional[float]
    c0_theory: float
    c0_test: float
    r_safe_theory: float
    r_safe_test: float
    case_autonomy: float
    touches_per_case: float


@dataclass(frozen=True)
class ValidationReport:
    summaries: tuple[ValidationSummary, ...]
    mean_abs_step_gap: Optional[float]
    max_abs_step_gap: Optional[float]


def validate(test_log: EventLog, train_counts: CountModel, weights: RiskWeights,
             h0_grid: Sequence[float], tau: int, w0: float,
             abstractor: Abstractor) -> ValidationReport:
    """Agent runs and surrogates across an entropy-threshold grid."""
    if not h0_grid:
        raise ValueError("h0 grid must be non-empty")
    summaries = []
    gaps = []
    for h0 in h0_grid:
        cfg = GateConfig(tau=tau, h0=h0, w0=w0)
        run = run_agent(test_log, train_counts, weights, cfg, abstractor)
        c0_th, safe_th = surrogates(test_log, train_counts, weights, cfg, abstractor)
        m_th = m_step_theory(test_log, train_counts, weights, cfg, abstractor)
        m_te = run.m_step_test
        if m_th is not None and m_te is not None:
            gaps.append(abs(m_th - m_te))
        summaries.append(ValidationSummary(
            cfg=cfg, m_step_theory=m_th, m_step_test=m_te,
            c0_theory=c0_th, c0_test=run.c0_test,
            r_safe_theory=safe_th, r_safe_test=run.r_safe_test,
            case_autonomy=run.case_autonomy,
            touches_per_case=run.touches_per_case,
        ))
    return ValidationReport(
        summaries=tuple(summaries),
        mean_abs_step_gap=sum(gaps) / len(gaps) if gaps else None,
        max_abs_step_gap=max(gaps) if gaps else None,
    )
