"""Command-line interface.

Exit codes: 0 on success, 2 on invalid input, 3 when the parameters leave no
security margin (g <= 0).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, models, records
from .alphabet import ChannelParams, DEFAULT_ELECT, DEFAULT_EPSILON, DEFAULT_ETA, DEFAULT_X_RATIO
from .fading import Binning, FadingModel
from .montecarlo import MonteCarloConfig, report_json, run_monte_carlo
from .protocol import AdversaryConfig
from .security import NoSecurityError, lambdas, p_min, required_length

EXIT_INVALID = 2
EXIT_NO_SECURITY = 3

_MODEL_KINDS = {"ideal": models.IDEAL_HET, "imperfect": models.IMPERFECT_HET, "use": models.IDEAL_USE}


def _add_detector_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", type=float, default=DEFAULT_ETA, help="detection efficiency (imperfect model)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="preparation variance, SNU")
    p.add_argument("--elect", type=float, default=DEFAULT_ELECT, help="electronic noise variance, SNU")
    p.add_argument("--x-ratio", type=float, default=DEFAULT_X_RATIO,
                   help="x amplitude as a fraction of the p amplitude (imperfect model)")


def _channel(args, T: float) -> ChannelParams:
    if args.model == "ideal":
        return ChannelParams.ideal(T, args.alpha)
    if args.model == "imperfect":
        return ChannelParams.imperfect(T, args.alpha, args.eta, args.epsilon, args.elect, args.x_ratio)
    raise ValueError(f"model {args.model!r} has no heterodyne channel")


def cmd_pmin(args) -> None:
    lam = lambdas(args.alpha)
    print("alpha,p_min,lambda1,lambda2,lambda3,lambda4")
    print(",".join(f"{v:.6g}" for v in (args.alpha, p_min(args.alpha), *lam)))


def cmd_siglen(args) -> None:
    L = required_length(args.g, args.target)
    if args.p_err is None:
        s_a, s_v = f"p_err+{args.g / 4:.6g}", f"p_err+{3 * args.g / 4:.6g}"
    else:
        s_a, s_v = f"{args.p_err + args.g / 4:.6g}", f"{args.p_err + 3 * args.g / 4:.6g}"
    print("L,2L,s_a,s_v")
    print(f"{L},{2 * L},{s_a},{s_v}")


def cmd_costmat(args) -> None:
    recs = records.ingest(args.input)
    binning = Binning(args.bins, args.tmin, args.tmax)
    result = analysis.analyze_bins(recs, args.alpha, binning, args.target, args.min_count, args.parts,
                                   p_min_value=args.p_min)
    analysis.write_report(result, args.out)
    sys.stdout.write(analysis.summary_csv(result))
    if result.out_of_range:
        print(f"{result.out_of_range} record(s) outside the binning range were skipped", file=sys.stderr)


def _parse_policy(text: str):
    if text == "optimal":
        return models.OPTIMAL
    kind, _, val = text.partition(":")
    if kind != "fixed" or not val:
        raise ValueError(f"alpha policy must be fixed:A or optimal, got {text!r}")
    return float(val)


def cmd_curves(args) -> None:
    m = models.ModelKind(_MODEL_KINDS[args.model], args.eta, args.epsilon, args.elect, args.x_ratio)
    policy = None if args.alpha_policy is None else _parse_policy(args.alpha_policy)
    Ts = np.linspace(args.tmin, args.tmax, args.steps)
    sys.stdout.write(models.curve_csv(models.length_curve(m, Ts, args.target, policy)))


def _parse_adversary(text: str) -> AdversaryConfig:
    kind, _, val = text.partition(":")
    try:
        if kind == "honest" and not val:
            return AdversaryConfig.honest()
        if kind == "repudiate":
            p_b, p_c = (float(v) for v in val.split(","))
            return AdversaryConfig.repudiating(p_b, p_c)
        if kind == "forge":
            return AdversaryConfig.forging(float(val))
    except ValueError as exc:
        raise ValueError(f"bad adversary {text!r}: {exc}") from None
    raise ValueError(f"adversary must be honest, repudiate:pB,pC or forge:P, got {text!r}")


def cmd_simulate(args) -> None:
    cfg = MonteCarloConfig(_parse_adversary(args.adversary), args.L, args.trials, args.seed,
                           channel=_channel(args, args.T), s_a=args.sa, s_v=args.sv, block=args.block)
    sys.stdout.write(report_json(run_monte_carlo(cfg)))


def cmd_gen(args) -> None:
    fading = FadingModel.parse(args.fading)
    recs = records.generate(_channel(args, 1.0), fading, args.count, args.seed)
    records.write(recs, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdsig", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmin", help="minimum state-identification error and Gram eigenvalues")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_pmin)

    p = sub.add_parser("siglen", help="signature length for a given advantage g")
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--target", type=float, default=1e-4, help="failure probability (default 1e-4)")
    p.add_argument("--p-err", type=float, default=None, help="honest error rate, for absolute thresholds")
    p.set_defaults(func=cmd_siglen)

    p = sub.add_parser("costmat", help="per-bin cost matrices and lengths from a record CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--target", type=float, default=1e-4)
    p.add_argument("--min-count", type=int, default=analysis.DEFAULT_MIN_COUNT)
    p.add_argument("--parts", type=int, default=10)
    p.add_argument("--p-min", type=float, default=None, help="override p_min(alpha)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_costmat)

    p = sub.add_parser("curves", help="theory signature length against transmission (CSV)")
    p.add_argument("--model", choices=sorted(_MODEL_KINDS), required=True)
    p.add_argument("--alpha-policy", default=None, help="fixed:A or optimal (default per model)")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--target", type=float, default=1e-4)
    _add_detector_args(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="Monte Carlo protocol runs against the analytic bounds (JSON)")
    p.add_argument("--adversary", default="honest", help="honest, repudiate:pB,pC or forge:P")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=("ideal", "imperfect"), default="ideal")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--sa", type=float, default=None, help="authentication threshold (default equal-risk)")
    p.add_argument("--sv", type=float, default=None, help="verification threshold (default equal-risk)")
    p.add_argument("--block", type=int, default=1000, help="trials per random-stream block")
    _add_detector_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="synthetic record CSV")
    p.add_argument("--model", choices=("ideal", "imperfect"), default="ideal")
    p.add_argument("--alpha", type=float, default=0.48)
    p.add_argument("--fading", default="uniform:0.5,0.85", help="constant:T or uniform:LO,HI")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_detector_args(p)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NoSecurityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SECURITY
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
