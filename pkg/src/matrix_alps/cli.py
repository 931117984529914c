"""Command-line entry point: ``matrix-alps {arm,mc,toy,denoise,probe-rip}``.

Exit status is 0 on success, 1 on invalid input and 2 when any trial diverged.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .exceptions import InvalidInputError, SolverDiverged
from .harness import (
    TOY_TRUTH,
    ProblemSpec,
    denoise_image,
    emit_table,
    run_monte_carlo,
    run_toy_example,
    write_pgm,
)
from .operators import make_operator, rip_probe
from .projectors import ProjectorSpec
from .solvers import ALGORITHMS, MomentumPolicy, SolverConfig

PROJMODES = {"exact": "exact_two_sided", "left": "left_inexact"}


def _problem_flags(p: argparse.ArgumentParser, m: int, n: int) -> None:
    p.add_argument("--m", type=int, default=m)
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--sr", type=float, default=0.3, help="sampling ratio p/(mn)")
    p.add_argument("--noise", type=float, default=0.0, help="noise energy ||eps||_2")
    p.add_argument("--trials", type=int, default=10)


def _solver_flags(p: argparse.ArgumentParser, k: int, max_iters: int) -> None:
    p.add_argument("--k", type=int, default=k)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algo", action="append", choices=ALGORITHMS, help="repeatable; default alps2")
    p.add_argument("--proj", default="exact", choices=["exact", "rand", "css"])
    p.add_argument("--q", type=int, default=2, help="power iterations of the randomized projector")
    p.add_argument("--oversample", type=int, default=5, help="extra test columns of the randomized projector")
    p.add_argument("--eps", type=float, default=0.5, help="column-subset approximation target")
    p.add_argument("--momentum", default="adaptive", choices=["adaptive", "constant", "nesterov"])
    p.add_argument("--tau", type=float, default=0.25, help="constant momentum weight")
    p.add_argument("--union", default="ortho", choices=["ortho", "raw"])
    p.add_argument("--projmode", default="exact", choices=list(PROJMODES))
    p.add_argument("--tol", type=float, default=5e-5)
    p.add_argument("--max-iters", type=int, default=max_iters)
    p.add_argument("--out", help="also write the CSV table to this path")
    p.add_argument("--format", default="text", choices=["csv", "text"])


def _configs(args) -> list[SolverConfig]:
    if args.momentum == "constant":
        momentum = MomentumPolicy("constant", tau=args.tau)
    elif args.momentum == "nesterov":
        momentum = MomentumPolicy("nesterov_q")
    else:
        momentum = MomentumPolicy()
    projector = ProjectorSpec(mode=args.proj, k=args.k, q=args.q, oversample=args.oversample, epsilon=args.eps, seed=args.seed)
    return [
        SolverConfig(
            algorithm=algo,
            k=args.k,
            max_iters=args.max_iters,
            tol=args.tol,
            projection_mode=PROJMODES[args.projmode],
            projector=projector,
            momentum=momentum,
            union_mode=args.union,
            seed=args.seed,
        )
        for algo in (args.algo or ["alps2"])
    ]


def _benchmark(args, kind: str) -> int:
    spec = ProblemSpec(args.m, args.n, args.k, args.sr, args.noise, kind, args.trials, args.seed)
    reports = run_monte_carlo(spec, _configs(args))
    print(emit_table(reports, args.format), end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(emit_table(reports, "csv"))
    return 2 if any(r.any_diverged for r in reports) else 0


def _toy(args) -> int:
    for algo in args.algo or ["alps2", "admira", "svp", "alps1"]:
        X = run_toy_example(algo)
        exact = bool(np.array_equal(X, TOY_TRUTH))
        print(f"{algo}: {'exact' if exact else 'differs'}")
        print(np.array2string(X, precision=0, floatmode="fixed"))
    return 0


def _denoise(args) -> int:
    cfg = _configs(args)[0]
    X, snr = denoise_image(args.image, args.k, args.observe, cfg, args.seed, rank_k_reference=args.rank_k_reference)
    print(f"{cfg.algorithm}: SNR {snr:.2f} dB")
    if args.output:
        write_pgm(args.output, X)
    return 0


def _probe(args) -> int:
    A = make_operator(args.operator, args.m, args.n, args.sr, args.seed)
    lower, upper = rip_probe(A, args.k, args.trials, args.seed, family=args.family)
    print(f"operator={args.operator} m={args.m} n={args.n} p={A.p} k={args.k}")
    print(f"delta_lower={lower:.6g} delta_upper={upper:.6g} delta={max(lower, upper):.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matrix-alps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    arm = sub.add_parser("arm", help="structured-operator recovery benchmark")
    _problem_flags(arm, 256, 512)
    _solver_flags(arm, 5, 500)
    mc = sub.add_parser("mc", help="matrix completion benchmark")
    _problem_flags(mc, 300, 600)
    _solver_flags(mc, 5, 700)

    toy = sub.add_parser("toy", help="5x4 completion toy example")
    toy.add_argument("--algo", action="append", choices=ALGORITHMS)

    den = sub.add_parser("denoise", help="fill in a subsampled PGM image")
    _solver_flags(den, 30, 500)
    den.add_argument("image", help="8-bit binary PGM file")
    den.add_argument("--observe", type=float, default=0.33, help="fraction of observed pixels")
    den.add_argument("--rank-k-reference", action="store_true", help="observe and score against the best rank-k approximation")
    den.add_argument("--output", help="write the recovered image as PGM")

    probe = sub.add_parser("probe-rip", help="Monte-Carlo lower bound on the rank-restricted isometry constant")
    probe.add_argument("--m", type=int, default=32)
    probe.add_argument("--n", type=int, default=32)
    probe.add_argument("--k", type=int, default=2)
    probe.add_argument("--sr", type=float, default=0.3)
    probe.add_argument("--trials", type=int, default=1000)
    probe.add_argument("--seed", type=int, default=0)
    probe.add_argument("--operator", default="structured", choices=["structured", "mask", "identity"])
    probe.add_argument("--family", default="gaussian", choices=["gaussian", "spikes"])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "arm": lambda: _benchmark(args, "structured"),
        "mc": lambda: _benchmark(args, "mask"),
        "toy": lambda: _toy(args),
        "denoise": lambda: _denoise(args),
        "probe-rip": lambda: _probe(args),
    }
    try:
        return handlers[args.command]()
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
