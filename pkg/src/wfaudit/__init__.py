"""Event-log audit of where autonomous workflow execution is statistically justified."""

from .abstraction import (AbstractionLevel, Abstractor, ActorRule, StateKey,
                          ValueBinning, abstract_state, classify_actor,
                          fit_value_binning)
from .agent import AgentRun, ValidationReport, run_agent, surrogates, validate
from .audit import (DEFAULT_EXCEPTION_SET, AutonomyShares, BlindMassCurve,
                    GateConfig, RiskWeights, autonomy_shares, blind_mass_curve,
                    coverage_decomposition, gate_escalates,
                    gateway_band_analysis, risk_weights)
from .economics import CostParams, FrontierPoint, expected_cost, sweep_frontier
from .eventlog import (BPI2019_SCHEMA, Case, EventLog, EventRecord, LogStats,
                       SchemaMapping, chronological_split, compute_log_stats,
                       ingest_csv)
from .model import (CountModel, OccupancyMeasure, build_counts, entropy_bits,
                    greedy_action, kernel, load_counts, merge_counts, occupancy,
                    policy, save_counts, top_prob)
from .synth import CANONICAL_SCHEMA, GroundTruthProcess, StateSpec, ValueSampler, generate, write_csv

__version__ = "0.1.0"
