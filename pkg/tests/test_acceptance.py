"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

The dataset-backed criteria need the public BPI Challenge 2019 CSV export.
Point WFAUDIT_BPI2019 at the file (or place it at data/bpi2019.csv); when it
is absent those criteria are skipped, everything else runs on synthetic logs.

Run with: pytest tests/test_acceptance.py -s
"""

import os
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from conftest import chain_process, hub_process, random_process
from oracle import (o_agent, o_autonomy_shares, o_blind_masses, o_entropy,
                    o_expected_cost, o_fit_edges, o_n_s, o_n_sa, o_policy,
                    o_surrogates)
from wfaudit.abstraction import AbstractionLevel, Abstractor, StateKey
from wfaudit.agent import run_agent, surrogates, validate
from wfaudit.audit import (DEFAULT_EXCEPTION_SET, GateConfig, autonomy_shares,
                           blind_mass_curve, coverage_decomposition,
                           gate_escalates, gateway_band_analysis, risk_weights)
from wfaudit.economics import CostParams, expected_cost
from wfaudit.errors import MissingColumn
from wfaudit.eventlog import (BPI2019_SCHEMA, chronological_split,
                              compute_log_stats, ingest_csv)
from wfaudit.model import build_counts, entropy_bits, occupancy, policy
from wfaudit.synth import generate

L1 = Abstractor(level=AbstractionLevel.L1)


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


# -- BPI 2019 dataset criteria ----------------------------------------------

def _bpi_path():
    env = os.environ.get("WFAUDIT_BPI2019")
    if env and Path(env).is_file():
        return Path(env)
    default = Path(__file__).resolve().parent.parent / "data" / "bpi2019.csv"
    if default.is_file():
        return default
    return None

BPI_MISSING = _bpi_path() is None
needs_bpi = pytest.mark.skipif(
    BPI_MISSING, reason="BPI 2019 CSV not present (set WFAUDIT_BPI2019 or "
                        "put it at data/bpi2019.csv)")

_bpi_cache = {}


def _bpi_log():
    if "log" not in _bpi_cache:
        path = _bpi_path()
        try:
            _bpi_cache["log"] = ingest_csv(path, BPI2019_SCHEMA)
        except MissingColumn:
            # some exports drop the trailing space in the event-id header
            from dataclasses import replace
            _bpi_cache["log"] = ingest_csv(path, replace(BPI2019_SCHEMA,
                                                         event_index="eventID"))
    return _bpi_cache["log"]


def _bpi_l3():
    if "l3" not in _bpi_cache:
        log = _bpi_log()
        abstr = Abstractor.fit(log, AbstractionLevel.L3)
        counts = build_counts(log, abstr)
        _bpi_cache["l3"] = (abstr, counts, risk_weights(counts))
    return _bpi_cache["l3"]


def _bpi_split():
    if "split" not in _bpi_cache:
        train, test = chronological_split(_bpi_log(), 0.8)
        abstr = Abstractor.fit(train, AbstractionLevel.L3)
        counts = build_counts(train, abstr)
        _bpi_cache["split"] = (train, test, abstr, counts, risk_weights(counts))
    return _bpi_cache["split"]


@needs_bpi
def test_bpi_descriptive_reproduction():
    with criterion("BPI 2019 descriptive statistics"):
        start = time.monotonic()
        log = _bpi_log()
        stats = compute_log_stats(log)
        elapsed = time.monotonic() - start
        assert stats.n_cases == 251_734
        assert stats.n_events == 1_595_923
        assert stats.n_activities == 42
        assert stats.mean_case_len == pytest.approx(6.34, abs=0.01)
        assert stats.selfloop_transition_rate == pytest.approx(0.157, abs=0.002)
        assert stats.start_activity_shares["Create Purchase Order Item"] == \
            pytest.approx(0.794, abs=0.005)
        assert elapsed < 120, f"ingest + stats took {elapsed:.0f}s"


@needs_bpi
def test_bpi_table2_reproduction():
    with criterion("BPI 2019 blind-mass table (all three levels)"):
        log = _bpi_log()
        l1 = build_counts(log, L1)
        w1 = risk_weights(l1)
        curve1 = blind_mass_curve(l1, occupancy(l1), w1, [200, 1000])
        assert l1.n_states == 42
        assert l1.n_pairs == 498
        assert curve1.state_mass[0] == pytest.approx(0.0004, abs=0.0002)
        assert curve1.sa_mass[0] == pytest.approx(0.0077, abs=0.0005)
        assert curve1.sa_mass[1] == pytest.approx(0.0324, abs=0.002)

        l2_abstr = Abstractor.fit(log, AbstractionLevel.L2)
        l2 = build_counts(log, l2_abstr)
        assert abs(l2.n_states - 190) <= 15

        _, l3, w3 = _bpi_l3()
        assert abs(l3.n_states - 668) <= 60
        curve3 = blind_mass_curve(l3, occupancy(l3), w3, [1000])
        assert curve3.sa_mass[0] == pytest.approx(0.1253, abs=0.02)
        assert curve3.sa_risk_mass[0] == pytest.approx(0.0505, abs=0.01)


@needs_bpi
def test_bpi_autonomy_envelope():
    with criterion("BPI 2019 autonomy envelope at tau=50, w0=0.6"):
        log = _bpi_log()
        abstr, counts, weights = _bpi_l3()
        at_20 = autonomy_shares(log, counts, weights,
                                GateConfig(tau=50, h0=2.0, w0=0.6), abstr)
        at_15 = autonomy_shares(log, counts, weights,
                                GateConfig(tau=50, h0=1.5, w0=0.6), abstr)
        assert at_20.a_event == pytest.approx(0.722, abs=0.03)
        assert at_20.a_case == pytest.approx(0.496, abs=0.05)
        assert at_15.a_event == pytest.approx(0.533, abs=0.03)
        assert at_15.a_case == pytest.approx(0.071, abs=0.03)


@needs_bpi
def test_bpi_agent_validation():
    with criterion("BPI 2019 held-out agent validation"):
        _, test, abstr, counts, weights = _bpi_split()
        grid = [1.0 + 0.25 * i for i in range(9)]  # 1.0 .. 3.0
        report = validate(test, counts, weights, grid, tau=50, w0=0.6,
                          abstractor=abstr)
        at = {s.cfg.h0: s for s in report.summaries}
        assert at[2.0].m_step_test == pytest.approx(0.637, abs=0.03)
        assert at[2.0].r_safe_test == pytest.approx(0.496, abs=0.04)
        assert at[2.0].c0_test == pytest.approx(0.161, abs=0.03)
        assert at[2.0].touches_per_case == pytest.approx(2.26, abs=0.2)
        assert report.mean_abs_step_gap == pytest.approx(0.034, abs=0.015)

        band = gateway_band_analysis(test, counts, weights,
                                     GateConfig(tau=50, h0=2.0, w0=0.6),
                                     (1.5, 2.0), abstr)
        assert abs(band.n_states - 33) <= 8
        assert band.decision_share == pytest.approx(0.134, abs=0.03)
        assert band.case_share == pytest.approx(0.691, abs=0.05)


# -- Synthetic criteria (no dataset required) --------------------------------

def test_property_suite_runs_fast():
    with criterion("property suite on 100 randomized logs (< 30 s)"):
        start = time.monotonic()

        for seed in range(100):
            log = generate(random_process(random.Random(seed), n_states=6),
                           15, seed=seed)
            counts = build_counts(log, L1)
            occ = occupancy(counts)
            weights = risk_weights(counts)
            curve = blind_mass_curve(counts, occ, weights, [1, 2, 4, 8, 16])
            assert curve.state_mass[0] == 0.0
            assert curve.sa_mass[0] == 0.0
            assert curve.sa_risk_mass[0] == 0.0
            for series in (curve.state_mass, curve.sa_mass, curve.sa_risk_mass):
                assert list(series) == sorted(series)
            for risk, plain in zip(curve.sa_risk_mass, curve.sa_mass):
                assert risk <= plain + 1e-12
            for s in counts.n_sa:
                assert abs(sum(policy(counts, s).values()) - 1.0) <= 1e-12

        # agent-side identities on a handful of random splits
        params = CostParams(c_autonomous=1.0, c_human=6.0)
        for seed in range(5):
            log = generate(random_process(random.Random(200 + seed), n_states=7),
                           60, seed=seed)
            train, test = chronological_split(log, 0.8)
            counts = build_counts(train, L1)
            weights = risk_weights(counts)
            test_occ = occupancy(build_counts(test, L1))
            for cfg in (GateConfig(tau=2, h0=0.8, w0=0.8),
                        GateConfig(tau=1, h0=100.0, w0=1.0)):
                run = run_agent(test, counts, weights, cfg, L1)
                dec = coverage_decomposition(test, counts, run.correctness_series(),
                                             cfg.tau, L1)
                assert dec.identity_gap() <= 1e-12
                c0_th, safe_th = surrogates(test, counts, weights, cfg, L1)
                assert c0_th <= safe_th + 1e-12
                assert run.c0_test <= run.r_safe_test + 1e-12
                escalated = {s for s in test_occ.d_visits
                             if gate_escalates(counts, weights, cfg, s)}
                cost = expected_cost(test_occ, escalated, params)
                assert params.c_autonomous * test_occ.mean_decisions - 1e-9 <= cost
                assert cost <= params.c_human * test_occ.mean_decisions + 1e-9
                gated_visits = sum(v for s, v in test_occ.d_visits.items()
                                   if s in escalated)
                assert abs(gated_visits - run.touches_per_case) <= 1e-12

        # gate monotonicity over a 3x3x3 grid
        log = generate(random_process(random.Random(321), n_states=6), 40, seed=1)
        counts = build_counts(log, L1)
        weights = risk_weights(counts)
        grid = [(t, h, v) for t in (1, 3, 10) for h in (0.3, 0.9, 2.0)
                for v in (0.2, 0.6, 1.0)]
        verdicts = {g: {s: gate_escalates(counts, weights,
                                          GateConfig(tau=g[0], h0=g[1], w0=g[2]), s)
                        for s in counts.n_s}
                    for g in grid}
        for (t1, h1, v1) in grid:
            for (t2, h2, v2) in grid:
                if t2 <= t1 and h2 >= h1 and v2 >= v1:
                    for s in counts.n_s:
                        # loosening every clause never turns autonomous into escalate
                        if not verdicts[(t1, h1, v1)][s]:
                            assert not verdicts[(t2, h2, v2)][s]

        elapsed = time.monotonic() - start
        assert elapsed < 30, f"property suite took {elapsed:.1f}s"


def test_oracle_equivalence():
    with criterion("oracle equivalence on 20 randomized logs (1e-9)"):
        levels = [AbstractionLevel.L1, AbstractionLevel.L2, AbstractionLevel.L3]
        for seed in range(20):
            rng = random.Random(1000 + seed)
            log = generate(random_process(rng, n_states=rng.randint(4, 7)),
                           rng.randint(8, 30), seed=seed)
            level = levels[seed % 3]
            abstr = Abstractor.fit(log, level)
            counts = build_counts(log, abstr)
            occ = occupancy(counts)
            weights = risk_weights(counts)
            lv = level.value
            edges = o_fit_edges(log)

            assert {tuple(s): c for s, c in counts.n_s.items()} == o_n_s(log, lv, edges)
            assert {(tuple(s), a): c for s, acts in counts.n_sa.items()
                    for a, c in acts.items()} == o_n_sa(log, lv, edges)
            for s in counts.n_sa:
                want = o_policy(log, lv, edges, tuple(s))
                got = policy(counts, s)
                assert {a: p for a, p in got.items()} == pytest.approx(want, abs=1e-9)
                assert entropy_bits(counts, s) == pytest.approx(
                    o_entropy(log, lv, edges, tuple(s)), abs=1e-9)

            tau = rng.choice([1, 2, 3, 5])
            curve = blind_mass_curve(counts, occ, weights, [tau])
            want = o_blind_masses(log, lv, edges, DEFAULT_EXCEPTION_SET, tau)
            assert curve.state_mass[0] == pytest.approx(want[0], abs=1e-9)
            assert curve.sa_mass[0] == pytest.approx(want[1], abs=1e-9)
            assert curve.sa_risk_mass[0] == pytest.approx(want[2], abs=1e-9)

            cfg = GateConfig(tau=tau, h0=rng.uniform(0.2, 1.5),
                             w0=rng.uniform(0.2, 1.0))
            shares = autonomy_shares(log, counts, weights, cfg, abstr)
            want_shares = o_autonomy_shares(log, log, lv, edges,
                                            DEFAULT_EXCEPTION_SET,
                                            cfg.tau, cfg.h0, cfg.w0)
            assert shares.a_event == pytest.approx(want_shares[0], abs=1e-9)
            assert shares.a_case == pytest.approx(want_shares[1], abs=1e-9)

            escalated = {s for s in occ.d_visits
                         if gate_escalates(counts, weights, cfg, s)}
            cost = expected_cost(occ, escalated, CostParams(1.0, 9.0))
            want_cost = o_expected_cost(log, log, lv, edges, DEFAULT_EXCEPTION_SET,
                                        cfg.tau, cfg.h0, cfg.w0, 1.0, 9.0)
            assert cost == pytest.approx(want_cost, abs=1e-9)

            if log.n_cases >= 4:
                train, test = chronological_split(log, 0.75)
                tr_abstr = Abstractor.fit(train, level)
                tr_counts = build_counts(train, tr_abstr)
                tr_weights = risk_weights(tr_counts)
                tr_edges = o_fit_edges(train)
                run = run_agent(test, tr_counts, tr_weights, cfg, tr_abstr)
                want_run = o_agent(test, train, lv, tr_edges,
                                   DEFAULT_EXCEPTION_SET, cfg.tau, cfg.h0, cfg.w0)
                assert run.c0_test == pytest.approx(want_run["c0_test"], abs=1e-9)
                assert run.r_safe_test == pytest.approx(want_run["r_safe_test"], abs=1e-9)
                assert run.touches_per_case == pytest.approx(
                    want_run["touches_per_case"], abs=1e-9)
                if want_run["m_step_test"] is None:
                    assert run.m_step_test is None
                else:
                    assert run.m_step_test == pytest.approx(
                        want_run["m_step_test"], abs=1e-9)
                c0, safe = surrogates(test, tr_counts, tr_weights, cfg, tr_abstr)
                want_s = o_surrogates(test, train, lv, tr_edges,
                                      DEFAULT_EXCEPTION_SET, cfg.tau, cfg.h0, cfg.w0)
                assert c0 == pytest.approx(want_s[0], abs=1e-9)
                assert safe == pytest.approx(want_s[1], abs=1e-9)


def test_estimator_consistency_fixtures():
    with criterion("estimator consistency (hub and deterministic chain)"):
        hub_log = generate(hub_process(), 10_000, seed=6)
        counts = build_counts(hub_log, L1)
        pol = policy(counts, StateKey("Hub"))
        assert abs(pol["X"] - 0.5) <= 0.02
        assert abs(pol["Y"] - 0.5) <= 0.02
        assert abs(entropy_bits(counts, StateKey("Hub")) - 1.0) <= 0.05

        chain_log = generate(chain_process(), 200, seed=7)
        train, test = chronological_split(chain_log, 0.8)
        ccounts = build_counts(train, L1)
        for s in ccounts.n_sa:
            assert entropy_bits(ccounts, s) == 0.0
        run = run_agent(test, ccounts, risk_weights(ccounts),
                        GateConfig(tau=1, h0=100.0, w0=1.0), L1)
        assert run.c0_test == 1.0
