"""Command-line interface: ``matchlab gen|check|play|bne|stats``.

Exit codes: 0 success, 2 schema or usage error, 3 construction assertion
failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from matchlab import constructions
from matchlab.economy import (
    Economy,
    OutcomeMap,
    check_assortative,
    check_spc,
    check_spc_star,
    find_preference_cycles,
    stable_outcome_map,
    validate_augmented,
)
from matchlab.errors import BudgetExceededError, ConstructionError, SchemaError, SizeBoundError
from matchlab.game import (
    StrategyClass,
    Verdict,
    compare_outcomes,
    enumerate_bne,
    is_bne,
    outcome_utilities,
    play,
    rank_stats,
)
from matchlab.io import (
    dumps,
    encode_number,
    load_economy,
    load_profile,
    outcome_to_json,
    save_economy,
    save_profile,
)
from matchlab.market import AgentId, Side, is_unique_stable, matched_set, worker

EXIT_OK, EXIT_USAGE, EXIT_CONSTRUCTION, EXIT_BUDGET = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _num(x: Fraction) -> int | str:
    return encode_number(x)


def _agent_name(economy: Economy, agent: AgentId) -> str:
    names = economy.firm_names if agent.side is Side.FIRM else economy.worker_names
    return names[agent.pos]


def _report_names(economy: Economy, report) -> list[str]:
    return [economy.firm_names[f] for f in report]


def _emit(args, data: dict, text: list[str]) -> None:
    if getattr(args, "format", "text") == "json":
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write("\n".join(text) + "\n")


def _outcome_lines(economy: Economy, outcome: OutcomeMap, indent: str = "  ") -> list[str]:
    return [
        f"{indent}state {label}: {mt.describe(economy.firm_names, economy.worker_names)}"
        for label, mt in zip(economy.states, outcome)
    ]


# gen


def _names_info(economy: Economy, info: dict) -> dict:
    out = {}
    for key, value in info.items():
        if key.endswith("_firms"):
            out[key] = [economy.firm_names[i] for i in value]
        elif key.endswith("_workers"):
            out[key] = [economy.worker_names[j] for j in value]
        elif key == "rank_improvement":
            out[key] = {"workers": [economy.worker_names[j] for j in value["workers"]], "k": value["k"]}
        else:
            out[key] = value
    return out


def _build(args) -> constructions.ConstructionBundle:
    p1 = Fraction(args.p1)
    if args.kind == "motivating":
        return constructions.motivating_example(p1)
    if args.kind == "example2":
        if args.n is None or args.n < 3:
            raise UsageError("example2 needs --n N with N >= 3")
        return constructions.example2(args.n, p1)
    if args.kind == "prop4":
        if args.n is None or args.k is None:
            raise UsageError("prop4 needs --n N and --k K")
        if args.n < 3 or not 1 <= args.k <= args.n - 2:
            raise UsageError("prop4 needs N >= 3 and 1 <= K <= N-2")
        return constructions.prop4(args.n, args.k, p1)
    if args.input is None:
        raise UsageError("append needs --input FILE")
    original = load_economy(args.input)
    if original.num_states != 1:
        raise UsageError("append needs a single-state economy file as input")
    return constructions.append_block(original.markets[0], p1)


def cmd_gen(args) -> int:
    try:
        bundle = _build(args)
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise UsageError(str(exc)) from None
    economy = bundle.economy
    out = Path(args.out)
    (out / "profiles").mkdir(parents=True, exist_ok=True)
    save_economy(economy, out / "economy.json")
    original = None
    if "original_firms" in bundle.info:
        base = economy.markets[0].restrict(bundle.info["original_firms"], bundle.info["original_workers"])
        original = "original.json"
        save_economy(Economy.single(base), out / original)
    for label, profile in bundle.profiles.items():
        save_profile(economy, profile, out / "profiles" / f"{label}.json")
    manifest = {
        "format_version": 1,
        "construction": bundle.name,
        "economy": "economy.json",
        "original": original,
        "stable": outcome_to_json(economy, bundle.stable),
        "profiles": {
            label: {"file": f"profiles/{label}.json", "outcome": outcome_to_json(economy, bundle.expected[label])}
            for label in bundle.profiles
        },
        "constraints": [
            {"description": c.description, "left": _num(c.left), "right": _num(c.right), "holds": c.holds}
            for c in bundle.constraints
        ],
        "info": _names_info(economy, bundle.info),
    }
    (out / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    print(f"{bundle.name}: wrote economy.json{', original.json' if original else ''}, {len(bundle.profiles)} profiles and manifest.json to {out}")
    return EXIT_OK


# check


def cmd_check(args) -> int:
    economy = load_economy(args.file)
    fn, wn = economy.firm_names, economy.worker_names
    chosen = [args.spc, args.spc_star, args.cycles, args.assortative is not None, args.unique_stable, args.augmented]
    run_all = not any(chosen)
    data: dict = {}
    text: list[str] = []

    def ordering(o):
        return [[fn[f], wn[w]] for f, w in o]

    if args.spc or run_all:
        per_state = {}
        for label, p in zip(economy.states, economy.prefs):
            ords = check_spc(p, limit=1)
            per_state[label] = {"holds": bool(ords), "ordering": ordering(ords[0]) if ords else None}
            shown = " ".join(f"({a},{b})" for a, b in ordering(ords[0])) if ords else "none"
            text.append(f"spc state {label}: {'yes' if ords else 'no'}  ordering: {shown}")
        data["spc"] = per_state
    if args.spc_star or run_all:
        res = check_spc_star(economy)
        witness = None
        if res.witness is not None:
            witness = {label: ordering(o) for label, o in zip(economy.states, res.witness)}
        data["spc_star"] = {"holds": res.holds, "witness": witness, "reason": res.reason}
        text.append(f"spc*: {'yes' if res.holds else 'no'}" + (f"  ({res.reason})" if res.reason else ""))
    if args.cycles or run_all:
        per_state = {}
        for label, p in zip(economy.states, economy.prefs):
            cyc = find_preference_cycles(p, limit=args.max_cycles + 1)
            more = len(cyc) > args.max_cycles
            cyc = cyc[: args.max_cycles]
            per_state[label] = {
                "found": bool(cyc),
                "cycles": [[[fn[f], wn[w]] for f, w in zip(c.firms, c.workers)] for c in cyc],
                "truncated": more,
            }
            shown = ", ".join(c.describe(fn, wn) for c in cyc) if cyc else "none"
            text.append(f"cycles state {label}: {shown}" + (" ..." if more else ""))
        data["cycles"] = per_state
    sides = [args.assortative] if args.assortative else (["firms", "workers"] if run_all else [])
    for side_name in sides:
        side = Side.FIRM if side_name == "firms" else Side.WORKER
        per_state = {label: check_assortative(p, side) for label, p in zip(economy.states, economy.prefs)}
        data.setdefault("assortative", {})[side_name] = per_state
        text.append(f"assortative {side_name}: " + ", ".join(f"state {k}: {'yes' if v else 'no'}" for k, v in per_state.items()))
    if args.unique_stable or run_all:
        per_state = {label: is_unique_stable(p) for label, p in zip(economy.states, economy.prefs)}
        data["unique_stable"] = per_state
        text.append("unique stable: " + ", ".join(f"state {k}: {'yes' if v else 'no'}" for k, v in per_state.items()))
        if all(per_state.values()):
            data["stable_outcome"] = outcome_to_json(economy, stable_outcome_map(economy))
    if args.augmented:
        original = load_economy(args.augmented)
        if original.num_states != 1:
            raise UsageError("--augmented needs a single-state original economy file")
        added_f = [i for i, name in enumerate(fn) if name not in original.firm_names]
        added_w = [j for j, name in enumerate(wn) if name not in original.worker_names]
        rep = validate_augmented(original.markets[0], economy, added_f, added_w)
        data["augmented"] = {
            "holds": rep.ok,
            "added_firms": [fn[i] for i in added_f],
            "added_workers": [wn[j] for j in added_w],
            "failures": list(rep.failures),
        }
        text.append(f"augmented: {'yes' if rep.ok else 'no'}")
        text.extend(f"  {msg}" for msg in rep.failures)
    _emit(args, data, text)
    return EXIT_OK


# play


def _true_rank(lst, partner) -> int | None:
    return None if partner is None or partner not in lst else lst.index(partner) + 1


def cmd_play(args) -> int:
    economy = load_economy(args.economy)
    profile = load_profile(args.profile, economy)
    proposing = Side.FIRM if args.proposing == "firms" else Side.WORKER
    outcome = play(economy, profile, proposing)
    fn, wn = economy.firm_names, economy.worker_names
    if args.state is not None and args.state not in economy.states:
        raise UsageError(f"unknown state {args.state!r}; states are {list(economy.states)}")
    eus = outcome_utilities(economy, outcome)
    data: dict = {"states": {}, "worker_eu": {wn[j]: _num(eus[worker(j + 1)]) for j in range(economy.num_workers)}}
    text: list[str] = []
    for label, prefs, mt in zip(economy.states, economy.prefs, outcome):
        if args.state is not None and label != args.state:
            continue
        ranks = {}
        for i in range(economy.num_firms):
            ranks[fn[i]] = _true_rank(prefs.firm_lists[i], mt.firm_partner[i])
        for j in range(economy.num_workers):
            ranks[wn[j]] = _true_rank(prefs.worker_lists[j], mt.worker_partner[j])
        data["states"][label] = {"matching": [[fn[f], wn[w]] for f, w in mt.pairs()], "true_ranks": ranks}
        text.append(f"state {label}: {mt.describe(fn, wn)}")
        text.append("  true ranks: " + ", ".join(f"{k}={'-' if v is None else v}" for k, v in ranks.items()))
    text.append("worker EU: " + ", ".join(f"{k}={v}" for k, v in data["worker_eu"].items()))
    _emit(args, data, text)
    return EXIT_OK


# bne


def _classes_arg(economy: Economy, args):
    classes = [StrategyClass(args.cls)] * economy.num_workers
    for item in args.worker_class or []:
        name, _, cls = item.partition("=")
        if name not in economy.worker_names:
            raise UsageError(f"--worker-class: unknown worker {name!r}")
        try:
            classes[economy.worker_names.index(name)] = StrategyClass(cls)
        except ValueError:
            raise UsageError(f"--worker-class: unknown class {cls!r}") from None
    return classes


def _profile_json(economy: Economy, profile) -> dict:
    return {economy.worker_names[j]: _report_names(economy, r) for j, r in enumerate(profile)}


def cmd_bne(args) -> int:
    economy = load_economy(args.economy)
    classes = _classes_arg(economy, args)
    wn = economy.worker_names
    if args.action == "verify":
        if args.profile is None:
            raise UsageError("bne verify needs --profile")
        profile = load_profile(args.profile, economy)
        rep = is_bne(economy, profile, classes)
        witness = None
        if rep.witness is not None:
            witness = {
                "worker": wn[rep.witness.worker],
                "report": _report_names(economy, rep.witness.report),
                "gain": _num(rep.witness.gain),
            }
        data = {
            "is_bne": rep.is_bne,
            "witness": witness,
            "unique_stable_for_reported": dict(zip(economy.states, rep.unique_stable)),
            "undominated": dict(zip(wn, rep.undominated)),
        }
        text = [f"BNE: {'yes' if rep.is_bne else 'no'}"]
        if witness:
            text.append(f"  {witness['worker']} gains {witness['gain']} by reporting [{', '.join(witness['report'])}]")
        text.append("unique stable for reported: " + ", ".join(f"state {k}: {'yes' if v else 'no'}" for k, v in zip(economy.states, rep.unique_stable)))
        text.append("undominated: " + ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in zip(wn, rep.undominated)))
        _emit(args, data, text)
        return EXIT_OK
    if len(set(classes)) != 1:
        raise UsageError("bne enumerate takes a single --class")
    groups = enumerate_bne(economy, classes[0], undominated_only=args.undominated_only, budget=args.budget, n_jobs=args.jobs)
    stable = stable_outcome_map(economy) if all(economy.unique_stable_states()) else None
    data = {
        "groups": [
            {
                "outcome": outcome_to_json(economy, g.outcome),
                "representative": _profile_json(economy, g.representative),
                "count": g.count,
                "is_stable_map": g.outcome == stable,
            }
            for g in groups
        ]
    }
    text = [f"{len(groups)} equilibrium outcome maps"]
    for k, g in enumerate(groups, 1):
        tag = " (stable map)" if g.outcome == stable else ""
        text.append(f"group {k}: {g.count} profiles{tag}")
        text.extend(_outcome_lines(economy, g.outcome))
        text.append("  representative: " + "; ".join(f"{w}: [{', '.join(r)}]" for w, r in _profile_json(economy, g.representative).items()))
    _emit(args, data, text)
    return EXIT_OK


# stats


def _split_names(value: str | None, names, what: str) -> list[int] | None:
    if value is None:
        return None
    out = []
    for name in (x.strip() for x in value.split(",") if x.strip()):
        if name not in names:
            raise UsageError(f"unknown {what} {name!r}")
        out.append(names.index(name))
    return out


def cmd_stats(args) -> int:
    economy = load_economy(args.economy)
    fn, wn = economy.firm_names, economy.worker_names
    base = play(economy, load_profile(args.base, economy))
    alt = play(economy, load_profile(args.alt, economy))
    workers = _split_names(args.workers, wn, "worker")
    if workers is None:
        workers = list(range(economy.num_workers))
    among_firms = _split_names(args.firms, fn, "firm")
    among = None if among_firms is None else {Side.FIRM: among_firms}
    try:
        averages = rank_stats(economy, base, alt, [worker(j + 1) for j in workers], among=among)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    per_worker = {}
    for j in workers:
        row = {}
        for label, s in zip(economy.states, range(economy.num_states)):
            row[label] = _num(rank_stats(economy, base, alt, [worker(j + 1)], among=among)[s])
        per_worker[wn[j]] = row
    verdicts = compare_outcomes(economy, base, alt)
    names = {agent: _agent_name(economy, agent) for agent in verdicts}
    label_of = {Verdict.PREFERS_A: "base", Verdict.PREFERS_B: "alt", Verdict.INDIFFERENT: "indifferent"}
    eu_base, eu_alt = outcome_utilities(economy, base), outcome_utilities(economy, alt)
    diff = {}
    for label, mb, ma in zip(economy.states, base, alt):
        sb, sa = matched_set(mb), matched_set(ma)
        diff[label] = {
            "only_base": [names[a] for a in sorted(sb - sa)],
            "only_alt": [names[a] for a in sorted(sa - sb)],
        }
    data = {
        "rank_difference": {"average": dict(zip(economy.states, map(_num, averages))), "workers": per_worker},
        "preference": {names[a]: label_of[v] for a, v in verdicts.items()},
        "expected_utility": {names[a]: {"base": _num(eu_base[a]), "alt": _num(eu_alt[a])} for a in verdicts},
        "matched_set_diff": diff,
    }
    text = ["rank difference (base rank - alt rank, positive means alt is better):"]
    text.append("  average: " + ", ".join(f"state {k}: {v}" for k, v in data["rank_difference"]["average"].items()))
    for w, row in per_worker.items():
        text.append(f"  {w}: " + ", ".join(f"state {k}: {v}" for k, v in row.items()))
    text.append("prefers:")
    for a in verdicts:
        text.append(f"  {names[a]}: {label_of[verdicts[a]]} (EU base {eu_base[a]}, alt {eu_alt[a]})")
    text.append("matched-set diff:")
    for label, d in diff.items():
        text.append(f"  state {label}: only base {d['only_base'] or '-'}, only alt {d['only_alt'] or '-'}")
    _emit(args, data, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchlab", description="Matching markets with one-sided uncertainty.")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=["text", "json"], default="text")

    g = sub.add_parser("gen", help="write a named construction to a directory")
    g.add_argument("kind", choices=["motivating", "example2", "prop4", "append"])
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--input", help="single-state economy file (append)")
    g.add_argument("--p1", default="1/2", help="probability of state 1 (default 1/2)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="structural conditions of an economy; all checks when none is named")
    c.add_argument("file")
    c.add_argument("--spc", action="store_true")
    c.add_argument("--spc-star", action="store_true")
    c.add_argument("--cycles", action="store_true")
    c.add_argument("--assortative", choices=["firms", "workers"])
    c.add_argument("--unique-stable", action="store_true")
    c.add_argument("--augmented", metavar="ORIGINAL")
    c.add_argument("--max-cycles", type=int, default=10, help="list at most this many cycles per state")
    fmt(c)
    c.set_defaults(func=cmd_check)

    p = sub.add_parser("play", help="run DA on reported worker lists")
    p.add_argument("economy")
    p.add_argument("--profile", required=True)
    p.add_argument("--state")
    p.add_argument("--proposing", choices=["firms", "workers"], default="firms")
    fmt(p)
    p.set_defaults(func=cmd_play)

    b = sub.add_parser("bne", help="verify or enumerate Bayesian Nash equilibria")
    b.add_argument("action", choices=["verify", "enumerate"])
    b.add_argument("economy")
    b.add_argument("--profile")
    b.add_argument("--class", dest="cls", required=True, choices=[c.value for c in StrategyClass])
    b.add_argument("--worker-class", action="append", metavar="NAME=CLASS", help="per-worker class override (verify)")
    b.add_argument("--undominated-only", action="store_true")
    b.add_argument("--budget", type=int, help="max profiles to sweep (default MATCHLAB_BUDGET or 10^8)")
    b.add_argument("--jobs", type=int, default=1)
    fmt(b)
    b.set_defaults(func=cmd_bne)

    s = sub.add_parser("stats", help="compare the outcomes of two profiles")
    s.add_argument("economy")
    s.add_argument("--base", required=True)
    s.add_argument("--alt", required=True)
    s.add_argument("--workers", help="comma-separated worker names (default all)")
    s.add_argument("--firms", help="rank only among these comma-separated firms")
    fmt(s)
    s.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, UsageError) as exc:
        print(f"matchlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"matchlab: construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (BudgetExceededError, SizeBoundError) as exc:
        print(f"matchlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
