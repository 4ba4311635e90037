"""Command-line front end.

Exit codes: 0 certified (or success), 2 not certified, 1 error.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io as fmt
from .certification import sparse_decompose, tomographic_decompose
from .channels import (
    POVM,
    compose,
    depolarizing_channel,
    erasure_channel,
    identity_channel,
    measure_and_prepare,
)
from .games import (
    CERTIFICATION_MARGIN,
    Family,
    bell_correlation,
    certify,
    expected_payoff,
    input_family,
    loss_extend,
    reconstruct_choi,
)
from .sampling import random_density_matrix, random_povm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2
DEFAULT_MAX_DIM = 16
DEFAULT_SEED = 0


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    tolerance: float = CERTIFICATION_MARGIN
    eta: Optional[float] = None
    family: Family = Family.STANDARD
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if self.eta is not None and not 0 < self.eta <= 1:
            raise ValueError(f"--eta must lie in (0, 1], got {self.eta}")
        if self.tolerance <= 0:
            raise ValueError(f"--tolerance must be positive, got {self.tolerance}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text: str, out: Optional[str]):
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_channel(path: str, config: RunConfig):
    channel = fmt.channel_from_json(fmt.loads(_read(path), f"channel spec {path}"))
    if max(channel.dA, channel.dB) > config.max_dim:
        raise ValueError(f"channel dimensions {channel.dA}->{channel.dB} exceed the cap of {config.max_dim}")
    return channel


def _config(args) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        tolerance=args.tolerance,
        eta=getattr(args, "eta", None),
        family=Family(getattr(args, "family", "standard")),
        max_dim=args.max_dim,
    )


# -- subcommands ------------------------------------------------------------------------------------


def cmd_make_channel(args) -> int:
    kind = args.kind_opt or args.kind
    params = list(args.params) + ([args.param] if args.param is not None else [])
    if kind is None:
        raise ValueError("make-channel needs a channel kind")
    d = args.dim
    if kind == "depolarizing":
        if len(params) != 1:
            raise ValueError("depolarizing needs one parameter (nu)")
        channel = depolarizing_channel(params[0], d)
    elif kind == "erasure":
        if len(params) != 1:
            raise ValueError("erasure needs one parameter (eta)")
        channel = erasure_channel(params[0], d)
    elif kind == "identity":
        channel = identity_channel(d)
    elif kind == "measure-prepare":
        rng = np.random.default_rng(args.seed)
        n = int(params[0]) if params else d * d
        povm: POVM = random_povm(d, n, rng)
        channel = measure_and_prepare(povm, [random_density_matrix(d, rng) for _ in range(n)])
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    _emit(fmt.dumps(fmt.channel_to_json(channel)), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    config = _config(args)
    start = time.perf_counter()
    channel = _load_channel(args.channel, config)
    if config.eta is not None:
        channel = compose(erasure_channel(config.eta, channel.dB), channel)
    witness = None
    if args.witness:
        witness = fmt.witness_from_json(fmt.loads(_read(args.witness), f"witness spec {args.witness}"))
    result = certify(channel, config.family, args.mode, witness=witness, margin=config.tolerance)
    report = {
        "channel": {"dA": channel.dA, "dB": channel.dB, "source": args.channel},
        "ppt_min_eigenvalue": result.ppt.min_eigenvalue,
        "verdict": result.verdict.value,
    }
    if config.eta is not None:
        report["eta"] = config.eta
    if result.certified:
        report["payoff"] = result.payoff
    else:
        report["caveat"] = result.caveat
    if args.out and result.game is not None:
        Path(args.out).write_text(fmt.dumps(fmt.game_to_json(result.game)))
        report["game_path"] = args.out
    else:
        report["game_path"] = None
    if args.timing:
        report["timing_ms"] = (time.perf_counter() - start) * 1e3
    sys.stdout.write(fmt.dumps(report))
    return EXIT_OK if result.certified else EXIT_NOT_CERTIFIED


def cmd_simulate(args) -> int:
    config = _config(args)
    channel = _load_channel(args.channel, config)
    game = fmt.game_from_json(fmt.loads(_read(args.game), f"game spec {args.game}"))
    if game.scenario.dim_x != channel.dA or game.scenario.dim_y != channel.dB:
        raise ValueError(
            f"game questions have dims {game.scenario.dim_x}, {game.scenario.dim_y}; "
            f"channel maps {channel.dA} -> {channel.dB}"
        )
    corr = bell_correlation(channel, game.scenario)
    if config.eta is not None:
        game, corr = loss_extend(game, corr, config.eta)
    _emit(fmt.correlation_to_csv(corr), args.out)
    summary = fmt.dumps({"payoff": expected_payoff(game, corr), "eb_threshold": game.eb_threshold})
    (sys.stdout if args.out and args.out != "-" else sys.stderr).write(summary)
    return EXIT_OK


def cmd_decompose(args) -> int:
    witness = fmt.witness_from_json(fmt.loads(_read(args.witness), f"witness spec {args.witness}"))
    if args.mode == "sparse":
        dec = sparse_decompose(witness)
    else:
        dx, dy = witness.dims
        dec = tomographic_decompose(witness, input_family(dx, args.family), input_family(dy, args.family))
    _emit(fmt.dumps(fmt.decomposition_to_json(dec)), args.out)
    summary = fmt.dumps({"nonzero": dec.nonzero_count, "residual": dec.residual(witness)})
    (sys.stdout if args.out and args.out != "-" else sys.stderr).write(summary)
    return EXIT_OK


def cmd_tomography(args) -> int:
    corr = fmt.correlation_from_csv(_read(args.correlation))
    scenario = fmt.scenario_from_json(fmt.loads(_read(args.scenario), f"scenario spec {args.scenario}"))
    choi, residual = reconstruct_choi(corr, scenario, tol=args.residual_tol, return_residual=True)
    doc = fmt.choi_to_json(choi)
    doc["residual"] = residual
    _emit(fmt.dumps(doc), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized constructions")
    common.add_argument("--tolerance", type=float, default=CERTIFICATION_MARGIN, help="certification margin")
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM, help="largest accepted channel dimension")
    p = argparse.ArgumentParser(prog="memcert", description="Certify quantum memories with semiquantum games")
    sub = p.add_subparsers(dest="command", required=True)

    mk = sub.add_parser("make-channel", parents=[common], help="write a channel spec")
    mk.add_argument("kind", nargs="?", choices=["depolarizing", "erasure", "measure-prepare", "identity"])
    mk.add_argument("params", nargs="*", type=float)
    mk.add_argument("--kind", dest="kind_opt", choices=["depolarizing", "erasure", "measure-prepare", "identity"])
    mk.add_argument("--param", type=float)
    mk.add_argument("--dim", type=int, default=2)
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_make_channel)

    ce = sub.add_parser("certify", parents=[common], help="run the certification pipeline on a channel spec")
    ce.add_argument("channel", nargs="?", default="-", help="channel JSON file, '-' for stdin")
    ce.add_argument("--family", choices=[f.value for f in Family], default="standard")
    ce.add_argument("--mode", choices=["tomographic", "sparse"], default="tomographic")
    ce.add_argument("--witness", help="witness JSON replacing the partial-transpose witness")
    ce.add_argument("--eta", type=float, help="test the channel behind an erasure channel")
    ce.add_argument("--out", help="write the compiled game JSON here")
    ce.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    ce.set_defaults(func=cmd_certify)

    si = sub.add_parser("simulate", parents=[common], help="correlations and payoff of a channel in a game")
    si.add_argument("channel")
    si.add_argument("game")
    si.add_argument("--eta", type=float)
    si.add_argument("--out")
    si.set_defaults(func=cmd_simulate)

    de = sub.add_parser("decompose", parents=[common], help="product-state decomposition of a witness")
    de.add_argument("witness")
    de.add_argument("--mode", choices=["sparse", "tomographic"], default="sparse")
    de.add_argument("--family", choices=[f.value for f in Family], default="standard")
    de.add_argument("--out")
    de.set_defaults(func=cmd_decompose)

    to = sub.add_parser("tomography", parents=[common], help="reconstruct a Choi operator from correlation data")
    to.add_argument("correlation")
    to.add_argument("scenario")
    to.add_argument("--residual-tol", type=float, default=1e-9)
    to.add_argument("--out")
    to.set_defaults(func=cmd_tomography)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
