import numpy as np
import pytest

from beliefsens.harness import (
    ExperimentPlan,
    SyntheticSpec,
    baseline_run,
    generate_synthetic_network,
    prior_argmax_accuracy,
    run_experiment,
    sample_cases,
)
from beliefsens.metrics import summarize
from beliefsens.model import CaseRecord, DiagnosticNetwork, PriorMode, validate_case, validate_network
from beliefsens.perturb import (
    RANDOM_NORMAL,
    AdditiveRenormalize,
    LogOddsPreserveCertainty,
    Normal,
    RandomReplace,
    Uniform,
)

from conftest import make_network


@pytest.fixture(scope="module")
def small():
    net = generate_synthetic_network(SyntheticSpec(n_diseases=6, n_findings=8, seed=3))
    return net, sample_cases(net, 20, 4)


def entries(net):
    return [p for r in net.rows() for p in r.probs]


def test_certainty_fraction_one_gives_only_certainties():
    net = generate_synthetic_network(SyntheticSpec(certainty_fraction=1.0, states_per_finding=3, seed=1))
    assert all(p in (0.0, 1.0) for p in entries(net))


def test_certainty_fraction_zero_gives_none():
    net = generate_synthetic_network(SyntheticSpec(certainty_fraction=0.0, concentration=8.0, seed=1))
    assert not any(p in (0.0, 1.0) for p in entries(net))


def test_default_synthetic_network_is_valid():
    net = generate_synthetic_network(SyntheticSpec(n_diseases=20, n_findings=30, states_per_finding=2))
    assert validate_network(net) == []
    assert len(net.diseases) == 20 and len(net.findings) == 30
    share = np.mean([p in (0.0, 1.0) for p in entries(net)])
    assert 0.3 < share < 0.5


def test_synthetic_network_is_seeded():
    a = generate_synthetic_network(SyntheticSpec(seed=5))
    assert a.equals(generate_synthetic_network(SyntheticSpec(seed=5)))
    assert not a.equals(generate_synthetic_network(SyntheticSpec(seed=6)))


@pytest.mark.parametrize("kwargs", [
    {"n_diseases": 1}, {"states_per_finding": 1}, {"certainty_fraction": 1.5}, {"concentration": 0},
])
def test_synthetic_spec_checks(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)


def test_sample_cases_valid_and_seeded(small):
    net, _ = small
    cases = sample_cases(net, 60, 9)
    assert len(cases) == 60
    assert all(validate_case(net, c) == [] for c in cases)
    assert all(len(c.observations) == len(net.findings) for c in cases)
    again = sample_cases(net, 60, 9)
    assert [(c.id, c.gold, c.observations) for c in cases] == [(c.id, c.gold, c.observations) for c in again]


def test_sample_cases_partial_observation(small):
    net, _ = small
    cases = sample_cases(net, 200, 1, observed_fraction=0.5)
    frac = np.mean([len(c.observations) / len(net.findings) for c in cases])
    assert abs(frac - 0.5) < 0.05


def test_deterministic_network_cases_are_signatures():
    net = generate_synthetic_network(SyntheticSpec(n_diseases=5, n_findings=6, certainty_fraction=1.0, seed=2))
    for c in sample_cases(net, 30, 3):
        for f in net.findings:
            probs = net.row(f.id, c.gold).probs
            assert c.observations[f.id] == f.states[probs.index(1.0)]


def test_sample_cases_rejects_zero():
    net = make_network([0.5, 0.5], [2], [[[0.5, 0.5], [0.5, 0.5]]])
    with pytest.raises(ValueError):
        sample_cases(net, 0, 1)


def test_strong_signal_baseline_is_accurate():
    net = generate_synthetic_network(SyntheticSpec(n_diseases=10, n_findings=40, concentration=4.0, seed=11))
    s = summarize(baseline_run(net, sample_cases(net, 100, 12), PriorMode.EXPERT))
    assert s.pct_correct >= 95.0


def test_prior_modes_coincide_for_uniform_stored_priors():
    net = generate_synthetic_network(SyntheticSpec(n_diseases=4, n_findings=5, seed=1))
    flat = DiagnosticNetwork(net.diseases, (0.25,) * 4, net.findings, net.cpt)
    cases = sample_cases(flat, 20, 2)
    a = baseline_run(flat, cases, PriorMode.EXPERT)
    b = baseline_run(flat, cases, PriorMode.UNIFORM)
    assert [o.posterior.probs.tolist() for o in a] == [o.posterior.probs.tolist() for o in b]


def test_baseline_run_empty():
    net = make_network([0.5, 0.5], [2], [[[0.5, 0.5], [0.5, 0.5]]])
    with pytest.raises(ValueError):
        baseline_run(net, [], PriorMode.EXPERT)


def test_baseline_tallies_inconsistent_cases():
    net = make_network([0.5, 0.5], [2], [[[1.0, 0.0], [1.0, 0.0]]])
    outs = baseline_run(net, [CaseRecord("x", {"f0": "s1"}, "d0"), CaseRecord("y", {"f0": "s0"}, "d0")],
                        PriorMode.EXPERT)
    s = summarize(outs)
    assert s.n_inconsistent == 1
    assert s.pct_correct == 50.0
    assert s.conf_correct.count + s.conf_incorrect.count == 1


def test_plan_checks():
    cfg = [LogOddsPreserveCertainty(Normal(0, 0.1))]
    with pytest.raises(ValueError):
        ExperimentPlan(cfg, replicates=0)
    with pytest.raises(ValueError):
        ExperimentPlan([])
    with pytest.raises(ValueError):
        ExperimentPlan(cfg, prior_modes=())


@pytest.mark.parametrize("scheme", [AdditiveRenormalize, LogOddsPreserveCertainty])
def test_zero_noise_reproduces_baseline(small, scheme):
    net, cases = small
    plan = ExperimentPlan([scheme(Normal(0, 0))], 3, (PriorMode.EXPERT, PriorMode.UNIFORM), 1)
    rep = run_experiment(net, cases, plan)
    for mode in plan.prior_modes:
        base, noisy = rep.baseline(mode).summary, rep.row(mode, plan.noise_configs[0]).summary
        assert noisy.pct_correct == pytest.approx(base.pct_correct, abs=1e-9)
        assert noisy.avg_score == pytest.approx(base.avg_score, abs=1e-9)
        assert noisy.conf_correct.mean == pytest.approx(base.conf_correct.mean, abs=1e-9)
        assert rep.row(mode, plan.noise_configs[0]).comparison.pct_better == 0.0


def test_report_shape(small):
    net, cases = small
    configs = [AdditiveRenormalize(Normal(0, s)) for s in (0.01, 0.1)] + [AdditiveRenormalize(Uniform())]
    plan = ExperimentPlan(configs, 5, (PriorMode.EXPERT, PriorMode.UNIFORM), 7)
    rep = run_experiment(net, cases, plan)
    assert len(rep.rows) == 2 * (1 + len(configs))
    for row in rep.rows:
        if row.is_baseline:
            assert row.summary.n_cases == len(cases) and row.comparison is None
        else:
            assert row.summary.n_cases == 5 * len(cases)
            assert len(row.replicates) == 5 and len(row.seeds) == 5
            assert sum(r.n_cases for r in row.replicates) == row.summary.n_cases
            assert row.comparison.epsilon == plan.epsilon


def test_report_is_deterministic_and_job_independent(small):
    net, cases = small
    plan = ExperimentPlan([LogOddsPreserveCertainty(Normal(0, 0.5)), RandomReplace(RANDOM_NORMAL)], 3,
                          (PriorMode.EXPERT,), 5)
    a = run_experiment(net, cases, plan)
    b = run_experiment(net, cases, plan, jobs=2)
    for ra, rb in zip(a.rows, b.rows):
        assert ra.summary == rb.summary
        assert ra.comparison == rb.comparison


def test_config_order_does_not_change_rows(small):
    net, cases = small
    c1, c2 = AdditiveRenormalize(Normal(0, 0.05)), LogOddsPreserveCertainty(Normal(0, 0.3))
    a = run_experiment(net, cases, ExperimentPlan([c1, c2], 2, master_seed=3))
    b = run_experiment(net, cases, ExperimentPlan([c2, c1], 2, master_seed=3))
    for cfg in (c1, c2):
        assert a.row(PriorMode.EXPERT, cfg).summary == b.row(PriorMode.EXPERT, cfg).summary


def test_adding_replicates_keeps_earlier_ones(small):
    net, cases = small
    cfg = AdditiveRenormalize(Normal(0, 0.1))
    a = run_experiment(net, cases, ExperimentPlan([cfg], 2, master_seed=3)).row(PriorMode.EXPERT, cfg)
    b = run_experiment(net, cases, ExperimentPlan([cfg], 4, master_seed=3)).row(PriorMode.EXPERT, cfg)
    assert b.replicates[:2] == a.replicates


def test_prior_argmax_accuracy():
    net = make_network([0.2, 0.5, 0.3], [2], [[[0.5, 0.5]] * 3])
    cases = [CaseRecord(str(i), {}, g) for i, g in enumerate(["d1", "d1", "d0", "d2"])]
    assert prior_argmax_accuracy(net, cases, PriorMode.EXPERT) == 0.5
    assert prior_argmax_accuracy(net, cases, PriorMode.UNIFORM) == 0.25
