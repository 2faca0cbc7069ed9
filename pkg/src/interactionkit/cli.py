"""``interactionkit`` command line.

Subcommands: ``soum-gen``, ``exact``, ``approx``, ``sweep``, ``bounds``, ``plot``.
Failures print one JSON line ``{"error": ..., "message": ...}`` to stderr and
exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .baselines import permutation_sii, permutation_sti
from .coalitions import check_players, to_bitstring
from .errors import InteractionKitError, ParameterError
from .evaluation import (
    METHODS,
    bound_setup,
    chebyshev_bound,
    clip_probability,
    gamma_factor,
    hoeffding_bound,
    read_aggregate_csv,
    repeat_svarm_iq,
    run_sweep,
    strata_statistics,
    variance_bounds,
    write_aggregate_csv,
    write_records_csv,
)
from .game import BudgetedOracle, SoumGame, load_game, soum_dump, soum_generate
from .index import (
    EXACT_MAX_PLAYERS,
    IndexKind,
    cii_weights,
    exact_cii,
    exact_cii_many,
    soum_exact_cii,
    write_estimate_csv,
)
from .plotting import write_sweep_charts
from .svarmiq import EstimatorConfig, run_svarm_iq

KINDS = ("sii", "sti", "fsi", "bii", "sv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message)


def _fail(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    raise SystemExit(2)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("INTERACTIONKIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ParameterError(f"INTERACTIONKIT_SEED must be an integer, got {env!r}") from None


def _game(args):
    if args.game is not None:
        if args.n is not None:
            raise ParameterError("give either --game or --n/--terms, not both")
        return load_game(args.game, args.game_format)
    if args.n is None:
        raise ParameterError("a game source is required: --game PATH or --n N [--terms D]")
    seed = args.game_seed if args.game_seed is not None else _seed(args)
    return soum_generate(check_players(args.n), args.terms, seed)


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _requests(args) -> list[tuple[int, IndexKind]]:
    kinds = [IndexKind.parse(k) for k in (args.kind or ["sii"])]
    orders = args.order or [2]
    return [(k, kind) for k in orders for kind in kinds]


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _budgets(values) -> list[int]:
    out = []
    for v in values:
        out.extend(int(x) for x in str(v).split(",") if x.strip())
    return out


def _floats(values) -> list[float]:
    out = []
    for v in values:
        out.extend(float(x) for x in str(v).split(",") if x.strip())
    return out


def cmd_soum_gen(args) -> None:
    n = check_players(args.n)
    game = soum_generate(n, args.terms, _seed(args))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    soum_dump(game, out)
    _emit({"command": "soum-gen", "n": n, "terms": game.num_terms, "path": str(out)})


def cmd_exact(args) -> None:
    game = _game(args)
    reqs = _requests(args)
    for k, kind in reqs:
        cii_weights(kind, game.n, k)
    oracle = args.oracle
    if oracle == "auto":
        oracle = "soum" if isinstance(game, SoumGame) and game.n > EXACT_MAX_PLAYERS else "brute"
    if oracle == "soum":
        if not isinstance(game, SoumGame):
            raise ParameterError("the closed-form oracle needs a SOUM game")
        maps = {(k, kind): soum_exact_cii(game, kind, k) for k, kind in reqs}
        queries = 0
    else:
        maps = exact_cii_many(game, [(kind, k) for k, kind in reqs])
        queries = 1 << game.n
    out = _outdir(args.out)
    files = []
    for (k, kind), emap in maps.items():
        path = out / f"exact_{kind.value.lower()}_k{k}.csv"
        write_estimate_csv(emap, path)
        files.append(str(path))
    _emit({"command": "exact", "oracle": oracle, "queries": queries, "files": files})


def cmd_approx(args) -> None:
    game = _game(args)
    seed = _seed(args)
    reqs = _requests(args)
    out = _outdir(args.out)
    oracle = BudgetedOracle(game, args.budget)
    if args.method == "svarm-iq":
        cfg = EstimatorConfig(
            orders=[k for k, _ in reqs],
            kinds=[kind for _, kind in reqs],
            warmup=args.warmup,
            seed=seed,
            max_border=args.max_border,
        )
        res = run_svarm_iq(oracle, cfg)
        maps = res.estimates
        diag = res.diagnostics.as_dict()
        res.diagnostics.write_csv(out / "diagnostics.csv")
    else:
        want = IndexKind.SII if args.method == "perm-sii" else IndexKind.STI
        if {kind for _, kind in reqs} != {want}:
            raise ParameterError(f"{args.method} estimates {want.value} only")
        orders = sorted({k for k, _ in reqs})
        if len(orders) != 1:
            raise ParameterError(f"{args.method} estimates a single order per run")
        fn = permutation_sii if args.method == "perm-sii" else permutation_sti
        res = fn(oracle, orders[0], seed)
        maps = {(orders[0], want): res.estimate}
        diag = res.diagnostics.as_dict()
        with open(out / "diagnostics.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(diag))
            writer.writeheader()
            writer.writerow(diag)
    files = []
    for (k, kind), emap in maps.items():
        path = out / f"estimate_{kind.value.lower()}_k{k}.csv"
        write_estimate_csv(emap, path)
        files.append(str(path))
    _emit(
        {
            "command": "approx",
            "method": args.method,
            "calls_used": oracle.calls_used,
            "budget": oracle.budget,
            "seed": seed,
            "files": files,
            "diagnostics": diag,
        }
    )


def cmd_sweep(args) -> None:
    game = _game(args)
    seed = _seed(args)
    budgets = _budgets(args.budgets)
    if not budgets:
        raise ParameterError("--budgets needs at least one value")
    methods = args.method or list(METHODS)
    kinds = args.kind or ["sii"]
    orders = args.order or [2]
    records, rows = run_sweep(
        game, methods, kinds, orders, budgets, args.runs, seed,
        warmup=args.warmup, max_border=args.max_border, jobs=args.jobs,
    )
    out = _outdir(args.out)
    write_records_csv(records, out / "sweep.csv")
    write_aggregate_csv(rows, out / "aggregate.csv")
    charts = [str(p) for p in write_sweep_charts(rows, out)] if args.plot else []
    _emit(
        {
            "command": "sweep",
            "records": len(records),
            "aggregate_rows": len(rows),
            "seed": seed,
            "tie_order": "ascending coalition key",
            "charts": charts,
        }
    )


def cmd_bounds(args) -> None:
    game = _game(args)
    seed = _seed(args)
    n = game.n
    k = (args.order or [2])[0]
    kind = IndexKind.parse((args.kind or ["sii"])[0])
    eps = sorted(_floats(args.eps or ["0.02,0.05,0.1"]), reverse=True)
    if args.budget is None:
        raise ParameterError("--budget is required")
    plan, cost, sample_budget = bound_setup(n, k, args.budget, args.max_border, warmup=True)
    stats = strata_statistics(game, k, plan)
    weights = cii_weights(kind, n, k)
    gamma = gamma_factor(n, k)
    vb = variance_bounds(stats, weights, sample_budget, gamma)
    emp = None
    if args.empirical:
        truth = exact_cii(game, kind, k).scores
        emp = repeat_svarm_iq(game, k, kind, args.budget, args.empirical, seed, warmup=True, max_border=args.max_border)
    header = ["K", "variance_bound"]
    header += [f"chebyshev_{e!r}" for e in eps] + [f"hoeffding_{e!r}" for e in eps]
    if emp is not None:
        header += ["empirical_variance", "variance_bound_holds"]
        header += [f"exceedance_{e!r}" for e in eps]
    out = _outdir(args.out)
    holds = True
    with open(out / "bounds.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r, K in enumerate(stats.masks):
            row = [to_bitstring(int(K), n), repr(float(vb[r]))]
            row += [repr(clip_probability(chebyshev_bound(stats, weights, sample_budget, gamma, K, e))[0]) for e in eps]
            row += [repr(clip_probability(hoeffding_bound(stats, weights, sample_budget, gamma, K, e))[0]) for e in eps]
            if emp is not None:
                ev = float(np.var(emp[:, r], ddof=1)) if emp.shape[0] > 1 else float("nan")
                ok = bool(ev <= vb[r])
                holds &= ok
                row += [repr(ev), str(ok).lower()]
                row += [repr(float(np.mean(np.abs(emp[:, r] - truth[r]) >= e))) for e in eps]
            writer.writerow(row)
    payload = {
        "command": "bounds",
        "s_exp": plan.s_exp,
        "warmup_cost": cost,
        "sample_budget": sample_budget,
        "gamma": gamma,
        "path": str(out / "bounds.csv"),
    }
    if emp is not None:
        payload["variance_bound_holds"] = holds
    _emit(payload)


def cmd_plot(args) -> None:
    rows = read_aggregate_csv(args.aggregate)
    charts = write_sweep_charts(rows, _outdir(args.out))
    _emit({"command": "plot", "charts": [str(p) for p in charts]})


def _add_game(p) -> None:
    p.add_argument("--game", help="game file (SOUM or tabular)")
    p.add_argument("--game-format", choices=["soum", "tabular"], help="override format detection")
    p.add_argument("--n", type=int, help="generate a SOUM game with this many players")
    p.add_argument("--terms", type=int, default=50, help="unanimity terms of a generated game")
    p.add_argument("--game-seed", type=int, help="seed of a generated game (default: --seed)")


def _add_index(p) -> None:
    p.add_argument("--kind", action="append", choices=KINDS, type=str.lower, help="repeatable; default sii")
    p.add_argument("--order", action="append", type=int, help="repeatable; default 2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="interactionkit", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, help="master seed (fallback: $INTERACTIONKIT_SEED, then 0)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("soum-gen", help="draw a random SOUM game")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--terms", type=int, default=50)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", required=True, help="output .soum file")
    p.set_defaults(func=cmd_soum_gen)

    p = sub.add_parser("exact", help="ground-truth interaction indices")
    _add_game(p)
    _add_index(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--oracle", choices=["auto", "brute", "soum"], default="auto")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("approx", help="estimate at one budget")
    _add_game(p)
    _add_index(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--method", choices=METHODS, default="svarm-iq")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--warmup", action="store_true")
    p.add_argument("--max-border", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("sweep", help="repeated runs over a budget grid")
    _add_game(p)
    _add_index(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--method", action="append", choices=METHODS, help="repeatable; default all")
    p.add_argument("--budgets", action="append", required=True, help="comma list, repeatable")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--warmup", action="store_true")
    p.add_argument("--max-border", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot", action="store_true", help="also write SVG charts")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="variance and tail bounds per interaction set")
    _add_game(p)
    _add_index(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--eps", action="append", help="comma list, repeatable; default 0.02,0.05,0.1")
    p.add_argument("--max-border", type=int)
    p.add_argument("--empirical", type=int, default=0, metavar="R", help="also run R warm-up runs")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("plot", help="redraw SVG charts from an aggregate CSV")
    p.add_argument("--aggregate", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InteractionKitError, ValueError, OSError) as exc:
        _fail(type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
