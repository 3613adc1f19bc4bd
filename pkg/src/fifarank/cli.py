"""Command-line entry point: ``fifarank <command> ...``.

Every command except ``validate`` writes its outputs into
``<out>/<command>-<hash>/`` where ``hash`` is taken over the manifest, which
records the resolved configuration and the SHA-256 of every input file.
Outputs contain no timestamps, so re-running a command reproduces the same
bytes.  ``fifarank rerun <manifest.json>`` re-executes a recorded run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import date
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import __version__, kernels, synth
from . import params as P
from .alo import alo_arrays, alo_scores, exact_loo, write_alo_csv
from .batch import solve
from .evaluation import evaluate_replay
from .match_data import (
    MatchDataError,
    outcome_frequencies,
    read_matches,
    read_ratings,
    serialize_matches,
    to_arrays,
)
from .online import RatingState, replay, scale_selection
from .tuning import (
    alo_objective,
    coordinate_search,
    empirical_eta_kappa,
    load_config,
    online_objective,
    specs_from_config,
    write_trace_csv,
)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _without_out(argv: list[str]) -> list[str]:
    """argv minus ``--out``: where a run is stored is not part of its identity."""
    out, skip = [], False
    for arg in argv:
        if skip:
            skip = False
        elif arg == "--out":
            skip = True
        elif not arg.startswith("--out="):
            out.append(arg)
    return out


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Run:
    """Run directory keyed by the manifest's content hash."""

    def __init__(self, out: str, command: str, argv: list[str], config: dict, inputs: dict):
        self.manifest = {
            "command": command,
            "argv": _without_out(argv),
            "config": config,
            "inputs": {k: {"path": str(v), "sha256": _sha256(v)} for k, v in sorted(inputs.items()) if v},
            "version": __version__,
            "backend": kernels.BACKEND,
        }
        text = _dumps(self.manifest)
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        self.dir = Path(out) / f"{command}-{digest}"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.write("manifest.json", text)

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path

    def open(self, name: str):
        return open(self.dir / name, "w", encoding="utf-8", newline="")


def _ratings_csv(names, theta) -> str:
    order = sorted(range(len(names)), key=lambda k: (-theta[k], names[k]))
    lines = ["rank,team,rating"]
    lines += [f"{r},{names[k]},{float(theta[k])!r}" for r, k in enumerate(order, start=1)]
    return "\n".join(lines) + "\n"


def _load_state(args, registry):
    """Registry over match teams plus any extra rated teams, and the start state."""
    if args.initial:
        ratings = read_ratings(args.initial)
        for name in sorted(set(ratings) - set(registry.names)):
            registry.add(name)
        return RatingState.from_ratings(registry, ratings, seed_newcomers=args.seed_newcomers)
    return RatingState.constant(registry, 0.0)


# -- commands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        registry, matches = read_matches(args.matches)
    except MatchDataError as exc:
        print(f"{args.matches}: {exc}", file=sys.stderr)
        return 1
    print(f"{len(matches)} games, {len(registry)} teams")
    return 0


def cmd_replay(args, argv) -> int:
    registry, matches = read_matches(args.matches)
    overrides = P.parse_assignments(args.params)
    resolved = P.resolve(args.model, overrides)
    state = _load_state(args, registry)
    engine = P.engine_from_params(args.model, overrides)
    rules = {}
    if args.model == "fifa":
        rules = {"shootout_rule": not args.no_shootout_rule, "knockout_rule": not args.no_knockout_rule}
    config = {
        "model": args.model,
        "params": resolved,
        **rules,
        "seed_newcomers": args.seed_newcomers,
        "snapshots": args.snapshot or [],
        "engine": engine.describe(),
    }
    run = Run(args.out, "replay", argv, config, {"matches": args.matches, "initial": args.initial})
    res = replay(matches, state, engine, backend=args.backend, **rules)

    with run.open("trajectory.jsonl") as fh:
        res.write_trajectory(fh)
    run.write("final_ratings.csv", _ratings_csv(registry.names, res.final))
    for day in args.snapshot or []:
        cutoff = date.fromisoformat(day)
        t = sum(1 for m in matches if m.date <= cutoff)
        run.write(f"ratings_{cutoff.isoformat()}.csv", _ratings_csv(registry.names, res.state_after(t).theta))
    report = {
        "games": res.T,
        "teams": len(registry),
        "inflation": res.inflation,
        "rule_affected_games": res.rule_affected,
    }
    if res.T >= 2:
        report["evaluation"] = evaluate_replay(res).to_dict()
    run.write("report.json", _dumps(report))
    print(run.dir)
    return 0


def _batch_setup(args):
    registry, matches = read_matches(args.matches)
    overrides = P.parse_assignments(args.params)
    resolved = P.resolve(args.model, overrides, batch=True)
    arrays = to_arrays(registry, matches)
    index = np.array([m.match_index for m in matches], dtype=np.int64)
    problem = P.problem_from_params(args.model, resolved, registry, arrays, match_index=index)
    return registry, resolved, problem


def cmd_fit_batch(args, argv) -> int:
    registry, resolved, problem = _batch_setup(args)
    config = {"model": args.model, "params": resolved, "restarts": args.restarts, "seed": args.seed, "tol": args.tol}
    run = Run(args.out, "fit-batch", argv, config, {"matches": args.matches, "truth": args.truth})
    sol = solve(problem, tol=args.tol)
    report = {
        "objective": sol.objective_value,
        "gradient_norm": sol.gradient_norm,
        "iterations": sol.iterations,
        "teams": problem.M,
        "games": problem.T,
    }
    if args.restarts:
        rng = np.random.default_rng(args.seed)
        spread = float(np.std(sol.theta_hat)) or problem.scale
        worst = 0.0
        for _ in range(args.restarts):
            start = rng.normal(0.0, 3.0 * spread, problem.M)
            other = solve(problem, init=start, tol=args.tol)
            worst = max(worst, float(np.max(np.abs(other.theta_hat - sol.theta_hat))))
        report["restart_max_abs_diff"] = worst
    if args.truth:
        truth = read_ratings(args.truth)
        names = [n for n in registry.names if n in truth]
        est = [sol.skills[n] for n in names]
        report["rank_correlation"] = float(spearmanr(est, [truth[n] for n in names]).statistic)
    run.write("skills.csv", _ratings_csv(registry.names, sol.theta_hat))
    with run.open("solver_log.jsonl") as fh:
        sol.write_log(fh)
    run.write("report.json", _dumps(report))
    print(run.dir)
    return 0


def cmd_alo(args, argv) -> int:
    _, resolved, problem = _batch_setup(args)
    config = {"model": args.model, "params": resolved, "exact": args.exact}
    run = Run(args.out, "alo", argv, config, {"matches": args.matches})
    sol = solve(problem, tol=1e-10)
    alo = alo_arrays(sol, problem)
    report = alo_scores(problem, sol, alo=alo).to_dict()
    if args.exact:
        exact = np.array([exact_loo(problem, int(t), init=sol.theta_hat) for t in problem.match_index])
        spread = float(np.ptp(alo.z_full)) or 1.0
        report["max_abs_alo_minus_exact_over_spread"] = float(np.max(np.abs(alo.z_loo - exact)) / spread)
    with run.open("alo.csv") as fh:
        write_alo_csv(fh, problem, alo)
    run.write("report.json", _dumps(report))
    print(run.dir)
    return 0


def cmd_tune(args, argv) -> int:
    registry, matches = read_matches(args.matches)
    cfg = load_config(args.config)
    fixed = P.parse_assignments(args.params)
    if args.objective == "alo":
        defaults = P.resolve(args.model, fixed, batch=True)
        objective = alo_objective(args.model, registry, matches)
    else:
        defaults = P.resolve(args.model, fixed)
        state = _load_state(args, registry)
        objective = online_objective(args.model, matches, state, backend=args.backend)
    specs = specs_from_config(cfg, defaults)
    config = {
        "model": args.model,
        "objective": args.objective,
        "specs": [[s.name, s.value, s.lower, s.upper, s.step] for s in specs],
        "convergence_tol": args.tol,
        "max_sweeps": args.max_sweeps,
        "seed_newcomers": args.seed_newcomers,
    }
    inputs = {"matches": args.matches, "config": args.config, "initial": args.initial}
    run = Run(args.out, "tune", argv, config, inputs)
    result = coordinate_search(objective, specs, convergence_tol=args.tol, max_sweeps=args.max_sweeps)
    with run.open("trace.csv") as fh:
        write_trace_csv(fh, result)
    run.write("result.json", _dumps(result.to_dict()))
    print(run.dir)
    return 0


_VENUES = {"all": "all", "neutral": "neutral_only", "home": "home_venue_only"}


def cmd_freq_estimate(args, argv) -> int:
    _, matches = read_matches(args.matches)
    run = Run(args.out, "freq-estimate", argv, {"venue": args.venue}, {"matches": args.matches})
    f = outcome_frequencies(matches, _VENUES[args.venue])
    report = {"venue": args.venue, "f_H": f[0], "f_D": f[1], "f_A": f[2]}
    try:
        report["eta"], report["kappa"] = empirical_eta_kappa(f)
    except ValueError as exc:
        report["error"] = str(exc)
    run.write("report.json", _dumps(report))
    print(run.dir)
    return 0


def cmd_scale_select(args, argv) -> int:
    registry, matches = read_matches(args.matches)
    overrides = P.parse_assignments(args.params)
    state = _load_state(args, registry)
    engine = P.engine_from_params(args.model, overrides)
    config = {
        "model": args.model,
        "params": P.resolve(args.model, overrides),
        "candidates": sorted(args.candidates),
        "seed_newcomers": args.seed_newcomers,
    }
    run = Run(args.out, "scale-select", argv, config, {"matches": args.matches, "initial": args.initial})
    sel = scale_selection(matches, state, engine, args.candidates, backend=args.backend)
    report = {"chosen": sel.chosen, "sigma_0": sel.sigma_0, "table": [list(r) for r in sel.table]}
    run.write("report.json", _dumps(report))
    print(run.dir)
    return 0


def cmd_synth(args, argv) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed,
        M=args.M,
        T=args.T,
        model=args.model,
        kappa=args.kappa,
        eta=args.eta,
        c=args.c,
        scale=args.scale,
        skill_sd=args.skill_sd,
    )
    run = Run(args.out, "synth", argv, cfg.to_dict(), {})
    registry, records, truth = synth.generate(cfg)
    with run.open("matches.csv") as fh:
        serialize_matches(records, fh)
    lines = ["team,rating"] + [f"{n},{truth[n]!r}" for n in registry.names]
    run.write("truth.csv", "\n".join(lines) + "\n")
    print(run.dir)
    return 0


def cmd_rerun(args, argv) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    for name, entry in manifest.get("inputs", {}).items():
        if _sha256(entry["path"]) != entry["sha256"]:
            print(f"input {name} ({entry['path']}) changed since the recorded run", file=sys.stderr)
            return 1
    return main(manifest["argv"] + ["--out", str(Path(args.manifest).resolve().parent.parent)])


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fifarank", description="Rating algorithms for international football.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model_choices=P.MODELS, default_model="fifa", initial=True):
        p.add_argument("--matches", required=True, help="match CSV")
        p.add_argument("--out", default="runs", help="parent directory for run outputs")
        p.add_argument("--model", choices=model_choices, default=default_model)
        p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE", help="parameter overrides")
        if initial:
            p.add_argument("--initial", help="initial ratings CSV (team,rating); default all zero")
            p.add_argument("--seed-newcomers", action="store_true",
                           help="start unrated teams at the mean initial rating")
            p.add_argument("--backend", choices=("compiled", "python"), default=None)

    p = sub.add_parser("validate", help="check a match file")
    p.add_argument("--matches", required=True)
    p.set_defaults(func=lambda a, argv: cmd_validate(a))

    p = sub.add_parser("replay", help="run an online rating algorithm over the games")
    common(p)
    p.add_argument("--no-shootout-rule", action="store_true")
    p.add_argument("--no-knockout-rule", action="store_true")
    p.add_argument("--snapshot", action="append", metavar="YYYY-MM-DD", help="also write ratings as of this date")
    p.set_defaults(func=cmd_replay)

    batch_models = ("davidson", "skellam")
    p = sub.add_parser("fit-batch", help="regularized maximum-likelihood skills")
    common(p, batch_models, "davidson", initial=False)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=0, help="random restarts to check uniqueness")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", help="ground-truth ratings CSV for a rank-correlation check")
    p.set_defaults(func=cmd_fit_batch)

    p = sub.add_parser("alo", help="approximate leave-one-out evaluation of a batch fit")
    common(p, batch_models, "davidson", initial=False)
    p.add_argument("--exact", action="store_true", help="also refit without each game and compare")
    p.set_defaults(func=cmd_alo)

    p = sub.add_parser("tune", help="coordinate search over hyperparameters")
    common(p)
    p.add_argument("--config", required=True, help="JSON: name -> value | 'free' | [lower, upper, step(, start)]")
    p.add_argument("--objective", choices=("online", "alo"), default="online")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-sweeps", type=int, default=50)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("freq-estimate", help="outcome frequencies and closed-form eta, kappa")
    p.add_argument("--matches", required=True)
    p.add_argument("--out", default="runs")
    p.add_argument("--venue", choices=tuple(_VENUES), default="all")
    p.set_defaults(func=cmd_freq_estimate)

    p = sub.add_parser("scale-select", help="choose the scale preserving the skill spread")
    common(p)
    p.add_argument("--candidates", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_scale_select)

    p = sub.add_parser("synth", help="seeded synthetic match file")
    p.add_argument("--out", default="runs")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--T", type=int, default=200)
    p.add_argument("--model", choices=("davidson", "skellam"), default="davidson")
    p.add_argument("--kappa", type=float, default=0.8)
    p.add_argument("--eta", type=float, default=0.3)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=200.0)
    p.add_argument("--skill-sd", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (MatchDataError, P.ParamError, KeyError, ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
