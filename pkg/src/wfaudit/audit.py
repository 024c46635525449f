"""Blind masses, risk weights, the escalation gate, and autonomy shares.

The gate escalates a state when historical support is thin (N(s) < tau),
branching entropy is high (H > h0), or value risk is high (w > w0);
boundary values stay autonomous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .abstraction import Abstractor, StateKey, state_sort_key
from .errors import LengthMismatch
from .eventlog import EventLog
from .model import CountModel, OccupancyMeasure, entropy_bits

#: Exception-sensitive activities used by the pairwise risk score.
DEFAULT_EXCEPTION_SET = frozenset({
    "Change Approval for Purchase Order",
    "Change Delivery Indicator",
    "Change Final Invoice Indicator",
    "Change Price",
    "Change Quantity",
    "Change Rejection Indicator",
    "Change Storage Location",
    "Change payment term",
    "Delete Purchase Order Item",
    "Remove Payment Block",
    "Set Payment Block",
    "Cancel Goods Receipt",
    "Cancel Invoice Receipt",
    "Cancel Subsequent Invoice",
    "Vendor creates debit memo",
    "Block Purchase Order Item",
    "Reactivate Purchase Order Item",
    "Update Order Confirmation",
})


@dataclass(frozen=True)
class GateConfig:
    tau: int
    h0: float
    w0: float

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.h0 < 0:
            raise ValueError("h0 must be >= 0")
        if not 0.0 <= self.w0 <= 1.0:
            raise ValueError("w0 must lie in [0, 1]")


@dataclass(frozen=True)
class RiskWeights:
    w_state: dict                    # StateKey -> [0, 1]
    w_sa: dict                       # (StateKey, action) -> [0, 1]
    exception_set: frozenset

    def pair_weight(self, s: StateKey, a: str) -> float:
        """Weight for a pair; unseen pairs get the exception term only."""
        got = self.w_sa.get((s, a))
        if got is not None:
            return got
        return 0.4 if a in self.exception_set else 0.0


def risk_weights(counts: CountModel,
                 exception_set: Iterable[str] = DEFAULT_EXCEPTION_SET) -> RiskWeights:
    """Log-value state weights and blended value/exception pair weights.

    w(s) normalizes log(1 + mean |V| at s) by the max over states; the pair
    value term normalizes log(1 + |V_t|) by the max over all events.
    """
    exception_set = frozenset(exception_set)
    mean_v = {s: counts.value_sum_s.get(s, 0.0) / n for s, n in counts.n_s.items()}
    max_log_state = max((math.log1p(v) for v in mean_v.values()), default=0.0)
    w_state = {}
    for s, v in mean_v.items():
        w_state[s] = math.log1p(v) / max_log_state if max_log_state > 0.0 else 0.0

    max_log_event = math.log1p(counts.max_abs_v)
    w_sa = {}
    for s, a, n in counts.iter_pairs():
        if max_log_event > 0.0:
            value_term = 0.6 * counts.pair_logv_sum[(s, a)] / n / max_log_event
        else:
            value_term = 0.0
        w_sa[(s, a)] = value_term + (0.4 if a in exception_set else 0.0)
    return RiskWeights(w_state=w_state, w_sa=w_sa, exception_set=exception_set)


def gate_escalates(counts: CountModel, weights: RiskWeights, cfg: GateConfig,
                   s: StateKey, nonterminal: bool = True) -> bool:
    """True when the state must be escalated to a human."""
    if counts.n_s.get(s, 0) < cfg.tau:
        return True
    if weights.w_state.get(s, 0.0) > cfg.w0:
        return True
    if s in counts.n_sa:
        return entropy_bits(counts, s) > cfg.h0
    # no observed decisions: entropy undefined, so any decision escalates
    return nonterminal


@dataclass(frozen=True)
class BlindMassCurve:
    thresholds: tuple[int, ...]
    state_mass: tuple[float, ...]
    sa_mass: tuple[float, ...]
    sa_risk_mass: tuple[float, ...]


def blind_mass_curve(counts: CountModel, occ: OccupancyMeasure, weights: RiskWeights,
                     thresholds: Sequence[int],
                     reference: Optional[CountModel] = None) -> BlindMassCurve:
    """Occupancy-weighted mass below each support threshold.

    Support counts come from `reference` when given (train/test audits) and
    from `counts` itself otherwise; occupancy always comes from `occ`.
    """
    thresholds = list(thresholds)
    if any(t < 1 for t in thresholds) or thresholds != sorted(thresholds):
        raise ValueError("thresholds must be >= 1 and ascending")
    ref = reference if reference is not None else counts
    state_mass, sa_mass, sa_risk_mass = [], [], []
    for tau in thresholds:
        b_state = sum(d for s, d in occ.d_state.items() if ref.n_s.get(s, 0) < tau)
        b_sa = 0.0
        b_risk = 0.0
        for (s, a), d in occ.d_sa.items():
            if ref.n_sa.get(s, {}).get(a, 0) < tau:
                b_sa += d
                b_risk += d * weights.pair_weight(s, a)
        state_mass.append(b_state)
        sa_mass.append(b_sa)
        sa_risk_mass.append(b_risk)
    return BlindMassCurve(tuple(thresholds), tuple(state_mass),
                          tuple(sa_mass), tuple(sa_risk_mass))


@dataclass(frozen=True)
class AutonomyShares:
    a_event: float
    a_case: float


def autonomy_shares(log: EventLog, counts: CountModel, weights: RiskWeights,
                    cfg: GateConfig, abstractor: Abstractor) -> AutonomyShares:
    """Share of nonterminal decisions, and of whole cases, left autonomous.

    Single-event cases have no decisions and count as fully autonomous.
    """
    verdict_cache: dict[StateKey, bool] = {}
    n_dec = 0
    n_auto = 0
    n_auto_cases = 0
    for case in log.cases:
        keys = abstractor.case_keys(case)
        case_auto = True
        for s in keys[:-1]:
            esc = verdict_cache.get(s)
            if esc is None:
                esc = gate_escalates(counts, weights, cfg, s)
                verdict_cache[s] = esc
            n_dec += 1
            if esc:
                case_auto = False
            else:
                n_auto += 1
        if case_auto:
            n_auto_cases += 1
    a_event = n_auto / n_dec if n_dec else 1.0
    return AutonomyShares(a_event=a_event, a_case=n_auto_cases / log.n_cases)


@dataclass(frozen=True)
class CoverageDecomposition:
    overall: float
    supported_mean: Optional[float]
    blind_mean: Optional[float]
    blind_mass: float

    def identity_gap(self) -> float:
        """|overall - ((1-B)*supported + B*blind)|, skipping empty sides."""
        total = 0.0
        if self.supported_mean is not None:
            total += (1.0 - self.blind_mass) * self.supported_mean
        if self.blind_mean is not None:
            total += self.blind_mass * self.blind_mean
        return abs(self.overall - total)


def coverage_decomposition(log: EventLog, counts: CountModel,
                           correctness: Sequence[int], tau: int,
                           abstractor: Abstractor) -> CoverageDecomposition:
    """Split mean correctness across supported vs under-supported pairs.

    `correctness` must align with the log's nonterminal decisions in case
    order; support is N(s, a) >= tau in `counts`.
    """
    if len(correctness) != log.n_decisions:
        raise LengthMismatch(
            f"correctness series has {len(correctness)} entries, "
            f"log has {log.n_decisions} decisions")
    sup_sum = sup_n = blind_sum = blind_n = 0
    i = 0
    for case in log.cases:
        keys = abstractor.case_keys(case)
        for t in range(len(case.events) - 1):
            s, a = keys[t], case.events[t + 1].activity
            c = correctness[i]
            i += 1
            if counts.n_sa.get(s, {}).get(a, 0) >= tau:
                sup_sum += c
                sup_n += 1
            else:
                blind_sum += c
                blind_n += 1
    total_n = sup_n + blind_n
    overall = (sup_sum + blind_sum) / total_n if total_n else 1.0
    return CoverageDecomposition(
        overall=overall,
        supported_mean=sup_sum / sup_n if sup_n else None,
        blind_mean=blind_sum / blind_n if blind_n else None,
        blind_mass=blind_n / total_n if total_n else 0.0,
    )


@dataclass(frozen=True)
class GatewayBandReport:
    states: tuple[StateKey, ...]
    n_states: int
    decision_share: float
    case_share: float


def gateway_band_analysis(test_log: EventLog, counts: CountModel, weights: RiskWeights,
                          cfg: GateConfig, band: tuple[float, float],
                          abstractor: Abstractor) -> GatewayBandReport:
    """Supported, low-risk states in the entropy band (h_lo, h_hi].

    Reports how many held-out decisions those states absorb and what share
    of held-out cases visits at least one of them.
    """
    h_lo, h_hi = band
    if not h_lo < h_hi:
        raise ValueError("band must satisfy h_lo < h_hi")
    members = set()
    for s in counts.n_sa:
        if counts.n_s.get(s, 0) < cfg.tau:
            continue
        if weights.w_state.get(s, 0.0) > cfg.w0:
            continue
        h = entropy_bits(counts, s)
        if h_lo < h <= h_hi:
            members.add(s)
    n_dec = 0
    n_in = 0
    n_cases_touched = 0
    for case in test_log.cases:
        keys = abstractor.case_keys(case)
        touched = False
        for s in keys[:-1]:
            n_dec += 1
            if s in members:
                n_in += 1
                touched = True
        if touched:
            n_cases_touched += 1
    return GatewayBandReport(
        states=tuple(sorted(members, key=state_sort_key)),
        n_states=len(members),
        decision_share=n_in / n_dec if n_dec else 0.0,
        case_share=n_cases_touched / test_log.n_cases if test_log.n_cases else 0.0,
    )
