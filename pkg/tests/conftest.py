import itertools

import numpy as np
import pytest

from beliefsens.model import CaseRecord, ConditionalRow, DiagnosticNetwork, Disease, FindingVariable

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}")


def make_network(priors, findings, table):
    """Build a network from plain lists.

    ``findings`` is a list of state-count ints; ``table[f][d]`` is the row for
    finding f and disease d.
    """
    diseases = tuple(Disease(f"d{i}") for i in range(len(priors)))
    fvars = tuple(FindingVariable(f"f{j}", tuple(f"s{k}" for k in range(n))) for j, n in enumerate(findings))
    rows = [ConditionalRow(f.id, d.id, tuple(table[j][i])) for j, f in enumerate(fvars) for i, d in enumerate(diseases)]
    return DiagnosticNetwork(diseases, tuple(priors), fvars, rows)


def random_network(rng, n_diseases, n_findings, n_states, zero_prob=0.0):
    priors = rng.dirichlet(np.ones(n_diseases))
    table = []
    for _ in range(n_findings):
        block = []
        for _ in range(n_diseases):
            row = rng.dirichlet(np.ones(n_states))
            if zero_prob:
                row = np.where(rng.random(n_states) < zero_prob, 0.0, row)
                row = row / row.sum() if row.sum() > 0 else np.full(n_states, 1.0 / n_states)
            block.append(row.tolist())
        table.append(block)
    return make_network(priors.tolist(), [n_states] * n_findings, table)


def random_case(rng, net, case_id="c", observe_prob=0.7):
    obs = {f.id: f.states[rng.integers(len(f.states))] for f in net.findings if rng.random() < observe_prob}
    gold = net.diseases[rng.integers(len(net.diseases))].id
    return CaseRecord(case_id, obs, gold)


def brute_force_posterior(net, case, priors):
    """P(d | obs) by summing the full joint over every assignment of every finding."""
    joint = np.zeros(len(net.diseases))
    for assignment in itertools.product(*(range(len(f.states)) for f in net.findings)):
        if any(f.id in case.observations and f.states[a] != case.observations[f.id]
               for f, a in zip(net.findings, assignment)):
            continue
        for i, d in enumerate(net.diseases):
            p = priors[i]
            for f, a in zip(net.findings, assignment):
                p *= net.row(f.id, d.id).probs[a]
            joint[i] += p
    total = joint.sum()
    return (joint / total if total > 0 else joint), total


@pytest.fixture
def two_disease_net():
    # P(pos | d0) = 0.8, P(pos | d1) = 0.2 with states (neg, pos)
    return make_network([0.5, 0.5], [2], [[[0.2, 0.8], [0.8, 0.2]]])
