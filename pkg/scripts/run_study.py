"""Compare the additive and log-odds schemes side by side on one network.

Prints average quadratic score and accuracy per noise level for both schemes
and both prior modes, plus the random-CPT floor. Uses a synthetic network
unless --network/--cases are given.

    python3 scripts/run_study.py --seed 0 --replicates 5
    python3 scripts/run_study.py --observed-fraction 0.5
"""

import argparse
import time

from beliefsens import formats
from beliefsens.cli import DEFAULT_SIGMAS
from beliefsens.harness import (
    ExperimentPlan,
    SyntheticSpec,
    generate_synthetic_network,
    prior_argmax_accuracy,
    run_experiment,
    sample_cases,
)
from beliefsens.model import PriorMode
from beliefsens.perturb import (
    RANDOM_NORMAL,
    RANDOM_UNIFORM,
    AdditiveRenormalize,
    LogOddsPreserveCertainty,
    Normal,
    RandomReplace,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--network")
    ap.add_argument("--cases")
    ap.add_argument("--seed", type=int, default=0, help="synthetic network seed; cases use seed+1")
    ap.add_argument("--n-cases", type=int, default=60)
    ap.add_argument("--observed-fraction", type=float, default=1.0)
    ap.add_argument("--master-seed", type=int, default=42)
    ap.add_argument("--replicates", type=int, default=5)
    ap.add_argument("--sigmas", default=DEFAULT_SIGMAS)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    if args.network:
        net = formats.load_network(args.network)
        cases = formats.load_cases(args.cases, net)
    else:
        net = generate_synthetic_network(SyntheticSpec(seed=args.seed))
        cases = sample_cases(net, args.n_cases, args.seed + 1, args.observed_fraction)

    sigmas = [float(s) for s in args.sigmas.split(",")]
    additive = [AdditiveRenormalize(Normal(0, s)) for s in sigmas]
    logodds = [LogOddsPreserveCertainty(Normal(0, s)) for s in sigmas]
    random = [RandomReplace(RANDOM_NORMAL), RandomReplace(RANDOM_UNIFORM)]
    modes = (PriorMode.EXPERT, PriorMode.UNIFORM)
    plan = ExperimentPlan(additive + logodds + random, args.replicates, modes, args.master_seed)

    t0 = time.perf_counter()
    rep = run_experiment(net, cases, plan, jobs=args.jobs)
    print(f"{len(net.diseases)} diseases, {len(net.findings)} findings, {len(cases)} cases, "
          f"{args.replicates} replicates, {time.perf_counter() - t0:.1f}s\n")

    for mode in modes:
        base = rep.baseline(mode).summary
        print(f"prior mode: {mode.value}")
        print(f"  {'sigma':>7}  {'additive score':>14} {'acc':>7}  {'log-odds score':>14} {'acc':>7}")
        print(f"  {'0':>7}  {base.avg_score:14.4f} {base.pct_correct:6.1f}%  "
              f"{base.avg_score:14.4f} {base.pct_correct:6.1f}%")
        for s, a, b in zip(sigmas, additive, logodds):
            sa, sb = rep.row(mode, a).summary, rep.row(mode, b).summary
            print(f"  {s:>7g}  {sa.avg_score:14.4f} {sa.pct_correct:6.1f}%  "
                  f"{sb.avg_score:14.4f} {sb.pct_correct:6.1f}%")
        guess = 100 * prior_argmax_accuracy(net, cases, mode)
        for cfg in random:
            s = rep.row(mode, cfg).summary
            print(f"  {rep.row(mode, cfg).label}: score {s.avg_score:.4f}, acc {s.pct_correct:.1f}% "
                  f"(prior-only guess {guess:.1f}%)")
        print()


if __name__ == "__main__":
    main()
