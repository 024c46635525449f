"""Shared fixtures: hand-built ground-truth processes and a randomized builder."""

import random

import pytest

from wfaudit.synth import GroundTruthProcess, StateSpec, ValueSampler


def chain_process():
    """Deterministic A -> B -> C."""
    return GroundTruthProcess(
        states={
            "A": StateSpec(activity="A"),
            "B": StateSpec(activity="B"),
            "C": StateSpec(activity="C"),
        },
        policy={"A": {"B": 1.0}, "B": {"C": 1.0}},
        kernel={("A", "B"): {"B": 1.0}, ("B", "C"): {"C": 1.0}},
        start={"A": 1.0},
    )


def hub_process(p=0.5):
    """Two-action hub: H branches to X or Y, both absorbing."""
    return GroundTruthProcess(
        states={
            "H": StateSpec(activity="Hub"),
            "X": StateSpec(activity="X"),
            "Y": StateSpec(activity="Y"),
        },
        policy={"H": {"X": p, "Y": 1.0 - p}},
        kernel={("H", "X"): {"X": 1.0}, ("H", "Y"): {"Y": 1.0}},
        start={"H": 1.0},
    )


def selfloop_process(p_loop=0.85):
    """S self-loops with probability p_loop, otherwise exits to E."""
    return GroundTruthProcess(
        states={
            "S": StateSpec(activity="Entry"),
            "E": StateSpec(activity="Exit"),
        },
        policy={"S": {"Entry": p_loop, "Exit": 1.0 - p_loop}},
        kernel={("S", "Entry"): {"S": 1.0}, ("S", "Exit"): {"E": 1.0}},
        start={"S": 1.0},
    )


def random_process(rng: random.Random, n_states: int = 6) -> GroundTruthProcess:
    """Forward-branching process with optional self-loops and varied attributes.

    Transitions only go to higher-indexed states (plus bounded self-loops),
    so every case terminates within the cap.
    """
    item_types = ["Standard", "Consignment", "Service"]
    resources = ["user_01", "user_02", "batch_07", "NONE"]
    states = {}
    for i in range(n_states):
        zero_prob = rng.choice([1.0, 0.6, 0.2])
        states[f"s{i}"] = StateSpec(
            activity=f"Act{i}" if rng.random() < 0.8 else f"Act{rng.randrange(n_states)}",
            item_type=rng.choice(item_types),
            gr_flag=rng.choice(["true", "false"]),
            resource=rng.choice(resources),
            values=ValueSampler(zero_prob=zero_prob, mu=rng.uniform(1.0, 5.0),
                                sigma=rng.uniform(0.2, 1.5)),
        )
    policy = {}
    kernel = {}
    for i in range(n_states - 1):
        name = f"s{i}"
        successors = rng.sample(range(i + 1, n_states),
                                k=min(rng.randint(1, 3), n_states - i - 1))
        weights = [rng.random() + 0.1 for _ in successors]
        if rng.random() < 0.3:
            successors.append(i)  # self-loop
            weights.append(rng.uniform(0.1, 0.5))
        total = sum(weights)
        row = {}
        for j, w in zip(successors, weights):
            a = states[f"s{j}"].activity
            row[a] = row.get(a, 0.0) + w / total
            dst = kernel.setdefault((name, a), {})
            dst[f"s{j}"] = dst.get(f"s{j}", 0.0) + 1.0
        for key in [k for k in kernel if k[0] == name]:
            t = sum(kernel[key].values())
            kernel[key] = {s2: p / t for s2, p in kernel[key].items()}
        policy[name] = row
    # start anywhere in the first half so lengths vary
    start_states = [f"s{i}" for i in range(max(1, n_states // 2))]
    start = {s: 1.0 / len(start_states) for s in start_states}
    return GroundTruthProcess(states=states, policy=policy, kernel=kernel,
                              start=start, max_case_length=200)


@pytest.fixture
def chain():
    return chain_process()


@pytest.fixture
def hub():
    return hub_process()


@pytest.fixture
def selfloop():
    return selfloop_process()
