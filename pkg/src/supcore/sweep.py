"""Simulation sweeps over random cohorts, with CSV output and summary plots."""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .coreops import DeadlineExceeded, TIMEOUT, stabilize
from .cyclegen import enumerate_cycles
from .economy import GeneratorConfig, assign_orgs, generate_random, load_json, sample_cohort
from .errors import SchemaError

CSV_COLUMNS = ("instance", "seed", "n_orgs", "cohort", "delta", "mode", "max_coal_size",
               "altruists_used", "core_status", "cuts_added", "iterations", "wall_time_ms",
               "stage1", "stage2", "stage3", "stage4")
MODES = ("weak", "strong", "tu", "lex")
FULL_GRID = {"players": (5, 10, 15, 20, 30), "cohorts": (100, 200, 500)}


@dataclass
class SweepConfig:
    seeds: tuple[int, ...] = tuple(range(10))
    instance_files: tuple[str, ...] = ()
    players: tuple[int, ...] = (3, 5)
    cohorts: tuple[int, ...] = (50, 100, 200)
    deltas: tuple[int, ...] = (2, 3)
    modes: tuple[str, ...] = MODES
    max_coal_size: int = 4
    pool_fraction: float = 0.1
    base_scale: float = 1.25
    cpra: str = "sensitized"
    dirichlet_alpha: float = 1.0
    tu_pre_add: float = 0.05
    timeout: float = 300.0
    record_timing: bool = True
    threads: int | None = None
    output: str = "sweep.csv"

    def __post_init__(self):
        for name in ("players", "cohorts", "deltas", "modes"):
            if not getattr(self, name):
                raise ValueError(f"{name} grid is empty")
        if not self.seeds and not self.instance_files:
            raise ValueError("need seeds or instance files")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise ValueError(f"unknown modes {sorted(bad)}")

    def workers(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("CORE_TOOLKIT_THREADS")
        return max(1, int(env)) if env else max(1, os.cpu_count() or 1)


def _subseed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _base_instance(cfg: SweepConfig, source):
    """``source`` is a seed (int) or an instance file path."""
    if isinstance(source, str):
        return Path(source).stem, 0, load_json(source)
    top = max(cfg.cohorts)
    n_pairs = math.ceil(cfg.base_scale * top)
    gc = GeneratorConfig(n_pairs=n_pairs, n_altruists=math.ceil(cfg.pool_fraction * top),
                         n_orgs=1, seed=source, cpra=cfg.cpra)
    return f"saidman-{source}", source, generate_random(gc)


def _jobs(cfg: SweepConfig):
    sources = list(cfg.seeds) + list(cfg.instance_files)
    for src in sources:
        for players in cfg.players:
            for cohort in cfg.cohorts:
                for delta in cfg.deltas:
                    yield (cfg, src, players, cohort, delta)


def _fmt(v) -> str:
    return "" if v is None else str(v)


def _run_job(job) -> list[dict]:
    cfg, src, players, cohort, delta = job
    name, seed, base = _base_instance(cfg, src)
    e = sample_cohort(base, cohort, _subseed(seed, cohort, 1))
    e = assign_orgs(e, players, _subseed(seed, cohort, players, 2), cfg.dirichlet_alpha)
    e = e.with_delta(delta)
    cs = enumerate_cycles(e)
    rows = []
    for mode in cfg.modes:
        row = {"instance": name, "seed": seed, "n_orgs": players, "cohort": cohort, "delta": delta,
               "mode": mode, "max_coal_size": cfg.max_coal_size}
        kw = {"max_coal_size": cfg.max_coal_size, "seed": _subseed(seed, cohort, players, 3),
              "cycles": cs, "time_limit": cfg.timeout}
        if mode == "tu":
            kw["pre_add_fraction"] = cfg.tu_pre_add
        t0 = time.perf_counter()
        try:
            r = stabilize(e, mode, **kw)
            stages = [str(v) for v in r.stage_values] + [None] * 4
            row.update(altruists_used=r.altruists_used, core_status=r.core_status,
                       cuts_added=r.cuts_added, iterations=r.iterations)
        except DeadlineExceeded:
            stages = [None] * 4
            row.update(altruists_used=None, core_status=TIMEOUT, cuts_added=None, iterations=None)
        except Exception as exc:  # recorded in-row, the sweep goes on
            stages = [None] * 4
            row.update(altruists_used=None, core_status=f"error:{type(exc).__name__}",
                       cuts_added=None, iterations=None)
        ms = int((time.perf_counter() - t0) * 1000) if cfg.record_timing else 0
        row["wall_time_ms"] = ms
        for k in range(4):
            row[f"stage{k + 1}"] = stages[k]
        rows.append({c: _fmt(row[c]) for c in CSV_COLUMNS})
    return rows


def run_sweep(cfg: SweepConfig) -> Path:
    """Run every grid point and write one CSV row per run, in grid order."""
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    jobs = list(_jobs(cfg))
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        if cfg.workers() == 1:
            results = map(_run_job, jobs)
            for rows in results:
                w.writerows(rows)
                fh.flush()
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers()) as pool:
                for rows in pool.map(_run_job, jobs):
                    w.writerows(rows)
                    fh.flush()
    return out


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

@dataclass
class SettingSummary:
    mode: str
    n_orgs: int
    cohort: int
    delta: int
    runs: int = 0
    completed: int = 0
    mean_altruists: float = 0.0
    max_altruists: int = 0
    pct_needing: float = 0.0
    altruist_counts: list = field(default_factory=list, repr=False)


def read_sweep(path) -> list[dict]:
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if tuple(r.fieldnames or ()) != CSV_COLUMNS:
            raise SchemaError("", f"CSV header {r.fieldnames} does not match the sweep schema")
        return list(r)


def summarize(rows) -> list[SettingSummary]:
    groups: dict[tuple, SettingSummary] = {}
    for row in rows:
        key = (row["mode"], int(row["n_orgs"]), int(row["cohort"]), int(row["delta"]))
        s = groups.setdefault(key, SettingSummary(*key))
        s.runs += 1
        if row["altruists_used"] != "":
            s.completed += 1
            s.altruist_counts.append(int(row["altruists_used"]))
    for s in groups.values():
        if s.altruist_counts:
            s.mean_altruists = float(np.mean(s.altruist_counts))
            s.max_altruists = max(s.altruist_counts)
            s.pct_needing = 100.0 * sum(1 for a in s.altruist_counts if a > 0) / len(s.altruist_counts)
    return [groups[k] for k in sorted(groups)]


def _table(summary) -> str:
    head = "mode,n_orgs,cohort,delta,runs,completed,mean_altruists,max_altruists,pct_needing"
    lines = [head]
    for s in summary:
        lines.append(f"{s.mode},{s.n_orgs},{s.cohort},{s.delta},{s.runs},{s.completed},"
                     f"{s.mean_altruists:.3f},{s.max_altruists},{s.pct_needing:.1f}")
    return "\n".join(lines) + "\n"


def report(csv_path, out_dir=None) -> dict:
    """Summary table plus three plots (mean, max, percent needing altruists)."""
    rows = read_sweep(csv_path)
    summary = summarize(rows)
    out_dir = Path(out_dir) if out_dir is not None else Path(csv_path).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    table = _table(summary)
    (out_dir / "summary.csv").write_text(table)
    plots = []
    if summary:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        deltas = sorted({s.delta for s in summary})
        for metric, label, fname in (("mean_altruists", "average altruists", "avg_altruists.png"),
                                     ("max_altruists", "maximum altruists", "max_altruists.png"),
                                     ("pct_needing", "% runs needing altruists", "pct_needing.png")):
            fig, axes = plt.subplots(1, len(deltas), figsize=(5 * len(deltas), 4), squeeze=False)
            for ax, d in zip(axes[0], deltas):
                lines = sorted({(s.mode, s.n_orgs) for s in summary if s.delta == d})
                for mode, n in lines:
                    pts = sorted((s.cohort, getattr(s, metric)) for s in summary
                                 if s.delta == d and s.mode == mode and s.n_orgs == n)
                    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{mode}, N={n}")
                ax.set_title(f"max cycle length {d}")
                ax.set_xlabel("cohort size")
                ax.set_ylabel(label)
                ax.legend(fontsize=7)
            fig.tight_layout()
            path = out_dir / fname
            fig.savefig(path)
            plt.close(fig)
            plots.append(str(path))
    return {"summary": [{k: v for k, v in asdict(s).items() if k != "altruist_counts"} for s in summary],
            "table": table, "plots": plots}


def acceptance_checks(summary) -> dict:
    """The desk-scale thresholds: weak rarely needs altruists, the others need few."""
    def pool(mode):
        return [a for s in summary if s.mode == mode for a in s.altruist_counts]

    out = {}
    weak = pool("weak")
    if weak:
        out["weak_pct_needing"] = 100.0 * sum(1 for a in weak if a > 0) / len(weak)
    for mode in ("strong", "tu", "lex"):
        xs = pool(mode)
        if xs:
            out[f"{mode}_mean"] = float(np.mean(xs))
            out[f"{mode}_max"] = max(xs)
    return out
