"""Oversight-cost identity and the reliability-cost frontier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .abstraction import Abstractor
from .agent import run_agent, surrogates
from .audit import GateConfig, RiskWeights, gate_escalates
from .eventlog import EventLog
from .model import CountModel, OccupancyMeasure


@dataclass(frozen=True)
class CostParams:
    c_autonomous: float = 1.0
    c_human: float = 10.0
    error_penalty: float = 0.0

    def __post_init__(self):
        if not self.c_human > self.c_autonomous >= 0.0:
            raise ValueError("costs must satisfy c_human > c_autonomous >= 0")
        if self.error_penalty < 0.0:
            raise ValueError("error penalty must be >= 0")


def expected_cost(occ: OccupancyMeasure, escalated: set, params: CostParams) -> float:
    """Per-case cost: autonomous baseline plus the escalation premium.

    `escalated` is the set of states the gate flags; the premium weights the
    per-case visit count of each flagged state.
    """
    gated_visits = sum(v for s, v in occ.d_visits.items() if s in escalated)
    return (params.c_autonomous * occ.mean_decisions
            + (params.c_human - params.c_autonomous) * gated_visits)


def cost_with_error(base: float, autonomous_errors_per_case: float,
                    error_penalty: float) -> float:
    return base + error_penalty * autonomous_errors_per_case


@dataclass(frozen=True)
class FrontierPoint:
    cfg: GateConfig
    touches_per_case: float
    safe_completion: float
    safe_completion_surrogate: float
    zero_touch: float
    cost_per_case: float
    cost_with_error: float


def sweep_frontier(test_log: EventLog, train_counts: CountModel, weights: RiskWeights,
                   grid: Sequence[GateConfig], params: CostParams,
                   abstractor: Abstractor,
                   test_occ: OccupancyMeasure) -> list[FrontierPoint]:
    """One frontier point per gate config, sorted by touches per case.

    `test_occ` is the empirical occupancy of the evaluation log at the same
    abstraction, so cost and touches agree exactly.
    """
    if not grid:
        raise ValueError("gate grid must be non-empty")
    points = []
    for cfg in grid:
        run = run_agent(test_log, train_counts, weights, cfg, abstractor)
        _, safe_th = surrogates(test_log, train_counts, weights, cfg, abstractor)
        escalated = {s for s in test_occ.d_visits
                     if gate_escalates(train_counts, weights, cfg, s)}
        base = expected_cost(test_occ, escalated, params)
        points.append(FrontierPoint(
            cfg=cfg,
            touches_per_case=run.touches_per_case,
            safe_completion=run.r_safe_test,
            safe_completion_surrogate=safe_th,
            zero_touch=run.c0_test,
            cost_per_case=base,
            cost_with_error=cost_with_error(base, run.autonomous_errors_per_case,
                                            params.error_penalty),
        ))
    points.sort(key=lambda p: (p.touches_per_case, p.cfg.tau, p.cfg.h0, p.cfg.w0))
    return points
