"""Command line entry point: ``beliefsens analyze`` and ``beliefsens generate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import formats
from .harness import ExperimentPlan, SyntheticSpec, generate_synthetic_network, run_experiment, sample_cases
from .metrics import DEFAULT_EPSILON
from .model import PriorMode
from .perturb import (
    RANDOM_NORMAL,
    RANDOM_UNIFORM,
    AdditiveRenormalize,
    LogOddsPreserveCertainty,
    Normal,
    RandomReplace,
    Uniform,
)

EXIT_USAGE = 2
EXIT_INVALID = 3

DEFAULT_SIGMAS = "0.005,0.01,0.025,0.05,0.1,0.25"
SCHEMES = {"additive": AdditiveRenormalize, "logodds": LogOddsPreserveCertainty, "random": RandomReplace}

log = logging.getLogger("beliefsens")


class UsageError(Exception):
    pass


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _uniform_range(text: str | None, default: Uniform) -> Uniform:
    if text is None:
        return default
    vals = _floats(text, "--uniform-range")
    if len(vals) != 2:
        raise UsageError("--uniform-range takes exactly two numbers: lo,hi")
    try:
        return Uniform(*vals)
    except ValueError as exc:
        raise UsageError(f"--uniform-range: {exc}") from None


def build_noise_configs(args) -> list:
    """Turn --scheme/--dist/--sigma/... into the list of noise configurations."""
    cls = SCHEMES[args.scheme]
    random = args.scheme == "random"
    uniform = _uniform_range(args.uniform_range, RANDOM_UNIFORM if random else Uniform())
    if args.dist == "uniform":
        if args.sigma is not None:
            raise UsageError("--sigma applies to --dist normal only")
        return [cls(uniform)]
    mu = args.mu if args.mu is not None else (RANDOM_NORMAL.mu if random else 0.0)
    default_sigma = repr(RANDOM_NORMAL.sigma) if random else DEFAULT_SIGMAS
    sigmas = _floats(args.sigma if args.sigma is not None else default_sigma, "--sigma")
    if not sigmas:
        raise UsageError("--sigma: no values given")
    try:
        configs = [cls(Normal(mu, s)) for s in sigmas]
    except ValueError as exc:
        raise UsageError(f"--sigma: {exc}") from None
    if args.also_uniform_noise:
        configs.append(cls(uniform))
    return configs


def _prior_modes(choice: str) -> tuple[PriorMode, ...]:
    if choice == "both":
        return (PriorMode.EXPERT, PriorMode.UNIFORM)
    return (PriorMode(choice),)


def cmd_analyze(args) -> int:
    configs = build_noise_configs(args)
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    if args.epsilon < 0:
        raise UsageError("--epsilon must be >= 0")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    net = formats.load_network(args.network)
    cases = formats.load_cases(args.cases, net)
    if not cases:
        raise UsageError(f"{args.cases}: no cases")
    plan = ExperimentPlan(
        noise_configs=configs,
        replicates=args.replicates,
        prior_modes=_prior_modes(args.priors),
        master_seed=args.seed,
        epsilon=args.epsilon,
    )
    report = run_experiment(net, cases, plan, jobs=args.jobs)
    header = {"scheme": args.scheme, "dist": args.dist, "network": args.network, "cases_file": args.cases}
    sys.stdout.write(formats.report_to_table(report, header))
    if args.out:
        Path(args.out).write_text(formats.report_to_csv(report), encoding="utf-8", newline="")
        log.info("wrote %s", args.out)
    return 0


def cmd_generate(args) -> int:
    try:
        spec = SyntheticSpec(
            n_diseases=args.diseases,
            n_findings=args.findings,
            states_per_finding=args.states,
            certainty_fraction=args.certainty_fraction,
            concentration=args.concentration,
            prior_concentration=args.prior_concentration,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n_cases < 1:
        raise UsageError("--n-cases must be >= 1")
    if not 0.0 <= args.observed_fraction <= 1.0:
        raise UsageError("--observed-fraction must lie in [0, 1]")
    net = generate_synthetic_network(spec)
    cases = sample_cases(net, args.n_cases, args.seed + 1, args.observed_fraction)
    comment = (
        f"beliefsens generate seed={args.seed} diseases={spec.n_diseases} findings={spec.n_findings} "
        f"states={spec.states_per_finding} certainty_fraction={spec.certainty_fraction} "
        f"concentration={spec.concentration} prior_concentration={spec.prior_concentration}"
    )
    formats.save_network(net, args.network, comment)
    formats.save_cases(cases, args.cases,
                       comment + f" n_cases={args.n_cases} observed_fraction={args.observed_fraction}")
    print(f"wrote {args.network} ({spec.n_diseases} diseases, {spec.n_findings} findings) "
          f"and {args.cases} ({args.n_cases} cases)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefsens", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run a replicated perturbation experiment")
    a.add_argument("--network", required=True)
    a.add_argument("--cases", required=True)
    a.add_argument("--scheme", choices=sorted(SCHEMES), default="logodds")
    a.add_argument("--dist", choices=["normal", "uniform"], default="normal")
    a.add_argument("--sigma", help=f"comma-separated standard deviations (default {DEFAULT_SIGMAS}; "
                                   f"0.15 for --scheme random)")
    a.add_argument("--mu", type=float, help="noise mean (default 0; 0.5 for --scheme random)")
    a.add_argument("--uniform-range", help="lo,hi for uniform draws (default -0.5,0.5; 0,1 for --scheme random)")
    a.add_argument("--also-uniform-noise", action="store_true", help="add one uniform-noise row after the sigma rows")
    a.add_argument("--replicates", type=int, default=5)
    a.add_argument("--seed", type=int, default=0, help="master seed for the perturbations")
    a.add_argument("--priors", choices=["expert", "uniform", "both"], default="expert")
    a.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="minimum gain in gold-disease posterior counted as 'better'")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--out", help="CSV report path")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="write a synthetic network and sampled cases")
    g.add_argument("--network", default="network.json")
    g.add_argument("--cases", default="cases.json")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--diseases", type=int, default=SyntheticSpec.n_diseases)
    g.add_argument("--findings", type=int, default=SyntheticSpec.n_findings)
    g.add_argument("--states", type=int, default=SyntheticSpec.states_per_finding)
    g.add_argument("--certainty-fraction", type=float, default=SyntheticSpec.certainty_fraction)
    g.add_argument("--concentration", type=float, default=SyntheticSpec.concentration)
    g.add_argument("--prior-concentration", type=float, default=SyntheticSpec.prior_concentration)
    g.add_argument("--n-cases", type=int, default=60)
    g.add_argument("--observed-fraction", type=float, default=1.0)
    g.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"beliefsens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except formats.ParseError as exc:
        print(f"beliefsens: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except formats.ValidationFailed as exc:
        print(f"beliefsens: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
