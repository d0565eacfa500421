"""Command-line entry point: ``supcore <command> ...``.

Exit codes: 0 success, 1 usage error, 2 runtime failure or an uncertified result.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import SupcoreError

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_doc(path):
    return json.loads(Path(path).read_text())


def cmd_generate(a):
    from .economy import GeneratorConfig, generate_random, to_json_dict
    cfg = GeneratorConfig(n_pairs=a.pairs, n_altruists=a.altruists, n_orgs=a.orgs, seed=a.seed,
                          cpra=a.cpra, dirichlet_alpha=a.alpha, altruist_mode=a.altruist_mode,
                          delta=a.delta)
    _write(to_json_dict(generate_random(cfg)), a.output)
    return EXIT_OK


def cmd_fixtures(a):
    from .economy import to_json_dict
    from .fixtures import build_fixture
    try:
        e = build_fixture(a.tag, *a.params)
    except (ValueError, TypeError) as exc:
        print(f"fixtures: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(to_json_dict(e), a.output)
    return EXIT_OK


def cmd_cycles(a):
    from .cyclegen import enumerate_cycles
    from .economy import load_json
    cs = enumerate_cycles(load_json(a.instance), a.delta)
    if a.output in (None, "-"):
        import tempfile
        with tempfile.NamedTemporaryFile("r", suffix=".csv") as fh:
            cs.to_csv(fh.name)
            sys.stdout.write(Path(fh.name).read_text())
    else:
        cs.to_csv(a.output)
    print(f"{len(cs)} cycles", file=sys.stderr)
    return EXIT_OK


def cmd_solve(a):
    from .economy import load_json, to_json_dict
    e = load_json(a.instance)
    if a.delta is not None:
        e = e.with_delta(a.delta)
    if a.mode == "scarf":
        from .rounding import supplemented_core_pipeline
        cert = supplemented_core_pipeline(e, verify=not a.no_verify, verify_limit=a.max_vertices,
                                          max_vertices=a.max_vertices)
        doc = {"kind": "rounding", **cert.to_json()}
        _write(doc, a.output)
        return EXIT_OK if cert.meets_targets() else EXIT_FAIL
    from .coreops import stabilize
    if a.add_altruists:
        from .economy import with_altruists
        e, _ = with_altruists(e, [None] * a.add_altruists)
    kw = {"max_coal_size": a.cap, "seed": a.seed, "backend": a.backend, "time_limit": a.time_limit}
    if a.mode == "tu":
        kw["pre_add_fraction"] = a.pre_add
    r = stabilize(e, a.mode, **kw)
    _write({"kind": "stabilize", "instance": to_json_dict(e), "report": r.to_json()}, a.output)
    return EXIT_OK if r.core_certified else EXIT_FAIL


def cmd_verify(a):
    from .coreops import find_blocking_coalition
    from .cyclegen import Exchange, check_exchange
    from .economy import from_json_dict
    doc = _load_doc(a.solution)
    e = from_json_dict(doc["instance"])
    cycles = doc["report"]["exchange"] if "report" in doc else doc["exchange"]
    ex = Exchange(tuple(tuple(c) for c in cycles))
    check_exchange(ex, e)
    cap = a.cap if a.cap is not None else e.n_orgs
    if a.brute:
        from .oracles import brute_force_blocking
        S = brute_force_blocking(e, ex, a.mode, limit=None)
    else:
        w = find_blocking_coalition(e, ex, a.mode, cap)
        S = None if w is None else w.coalition
    if S is None:
        print("certified")
        return EXIT_OK
    print(f"blocked by coalition {list(S)}")
    return EXIT_FAIL


def cmd_sweep(a):
    from .sweep import FULL_GRID, SweepConfig, run_sweep
    players = a.players or (FULL_GRID["players"] if a.full_grid else (3, 5))
    cohorts = a.cohorts or (FULL_GRID["cohorts"] if a.full_grid else (50, 100, 200))
    cfg = SweepConfig(seeds=tuple(range(a.seed, a.seed + a.seeds)) if a.seeds else (),
                      instance_files=tuple(a.instance or ()), players=tuple(players),
                      cohorts=tuple(cohorts), deltas=tuple(a.deltas), modes=tuple(a.modes),
                      max_coal_size=a.cap, cpra=a.cpra, timeout=a.timeout,
                      record_timing=not a.no_timing, threads=a.threads, output=a.output)
    path = run_sweep(cfg)
    print(str(path))
    return EXIT_OK


def cmd_report(a):
    from .sweep import report
    res = report(a.csv, a.out_dir)
    sys.stdout.write(res["table"])
    for p in res["plots"]:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="supcore", description="Core-stable exchanges for multi-organization barter markets.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="random instance JSON")
    g.add_argument("--pairs", type=int, default=100)
    g.add_argument("--altruists", type=int, default=0)
    g.add_argument("--orgs", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cpra", default="sensitized", choices=["saidman", "sensitized", "none"])
    g.add_argument("--alpha", type=float, default=1.0, help="Dirichlet concentration for org sizes")
    g.add_argument("--altruist-mode", default="pool", choices=["pool", "synthetic"])
    g.add_argument("--delta", type=int, default=3)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fixtures", help="named adversarial instance JSON")
    f.add_argument("tag")
    f.add_argument("params", nargs="*", type=int)
    f.add_argument("-o", "--output")
    f.set_defaults(func=cmd_fixtures)

    c = sub.add_parser("cycles", help="enumerate cycles to CSV")
    c.add_argument("instance")
    c.add_argument("--delta", type=int)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_cycles)

    s = sub.add_parser("solve", help="compute a stable exchange")
    s.add_argument("instance")
    s.add_argument("--mode", required=True, choices=["weak", "strong", "tu", "lex", "scarf"])
    s.add_argument("--cap", type=int, default=4, help="largest coalition checked")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--delta", type=int)
    s.add_argument("--backend", default="highs", choices=["highs", "exact"])
    s.add_argument("--time-limit", type=float)
    s.add_argument("--pre-add", type=float, default=0.05)
    s.add_argument("--no-verify", action="store_true", help="skip the exhaustive check (scarf mode)")
    s.add_argument("--max-vertices", type=int, default=24, help="Scarf size guard (scarf mode)")
    s.add_argument("--add-altruists", type=int, default=0,
                   help="append this many universal platform altruists to the pool")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="re-check a solve output")
    v.add_argument("solution")
    v.add_argument("--mode", default="weak", choices=["weak", "strong", "tu"])
    v.add_argument("--cap", type=int)
    v.add_argument("--brute", action="store_true", help="exhaustive oracle instead of ILPs")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="simulation grid to CSV")
    w.add_argument("--seeds", type=int, default=10, help="number of generated base instances")
    w.add_argument("--seed", type=int, default=0, help="first seed")
    w.add_argument("--instance", action="append", help="instance JSON (repeatable)")
    w.add_argument("--players", type=int, nargs="+")
    w.add_argument("--cohorts", type=int, nargs="+")
    w.add_argument("--deltas", type=int, nargs="+", default=[2, 3])
    w.add_argument("--modes", nargs="+", default=["weak", "strong", "tu", "lex"],
                   choices=["weak", "strong", "tu", "lex"])
    w.add_argument("--cap", type=int, default=4)
    w.add_argument("--cpra", default="sensitized", choices=["saidman", "sensitized", "none"])
    w.add_argument("--timeout", type=float, default=300.0)
    w.add_argument("--threads", type=int)
    w.add_argument("--full-grid", action="store_true")
    w.add_argument("--no-timing", action="store_true", help="write 0 for wall_time_ms")
    w.add_argument("-o", "--output", default="sweep.csv")
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="summary tables and plots from a sweep CSV")
    r.add_argument("csv")
    r.add_argument("--out-dir")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SupcoreError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"supcore: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
