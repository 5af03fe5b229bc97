"""Command line driver: run computations into a JSONL store and render tables.

    bianchi --task h1 --d 1 --n 0-5
    bianchi --task h2 --d 3 --group PGL --n 1-8
    bianchi --task abelianize --d 1 --level 20,-1
    bianchi --task sweep --d 1 --norm-min 2 --norm-max 500 --jobs 2
    bianchi --task stats --table T4 --d 1 --x 500,1000
    bianchi --task compact

The store is append-only; a (d, level, task) key that already has an "ok"
record is skipped, so reruns leave the file untouched.  Exit codes: 0 on
success, 2 on usage errors, 3 when some units failed or a table is missing
rows.
"""
from __future__ import annotations

import argparse
import json
import multiprocessing as mp
import os
import sys
import time
from pathlib import Path

from . import asymptotics
from .congruence import LevelIdeal, abelian_rank, abelianization, degree_one_primes
from .h1 import h1
from .h2 import h2
from .polymod import ModuleSpec
from .presentations import group_id, load_presentation
from .ring import QuadInt

STORE_ENV = "BIANCHI_STORE"
DEFAULT_OUT = "bianchi-results"
TABLES = ("H1", "H2", "T1", "T3", "T4", "T5")
EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 2, 3


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class Store:
    """Append-only JSONL file of result records keyed by (d, level, task)."""

    def __init__(self, path):
        self.path = Path(path)

    @staticmethod
    def key(d, level, task) -> str:
        return f"{d}|{level}|{task}"

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        for line in self.path.read_text().splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def latest(self) -> dict[str, dict]:
        """Last record per key."""
        out = {}
        for r in self.records():
            out[r["key"]] = r
        return out

    def completed(self) -> set[str]:
        return {k for k, r in self.latest().items() if r["status"] == "ok"}

    def append(self, record: dict):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as f:
            f.write(dumps(record) + "\n")

    def compact(self) -> int:
        """Rewrite keeping the last record per key, sorted by key; returns the number dropped."""
        recs = self.records()
        latest = self.latest()
        if not recs:
            return 0
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text("".join(dumps(latest[k]) + "\n" for k in sorted(latest)))
        tmp.replace(self.path)
        return len(recs) - len(latest)


def store_path(out: str) -> Path:
    env = os.environ.get(STORE_ENV)
    return Path(env) if env else Path(out) / "store.jsonl"


# ---------------------------------------------------------------------------
# Work units
# ---------------------------------------------------------------------------


def _level_json(lv: LevelIdeal):
    return lv.to_json()


def execute(unit: dict) -> dict:
    """Run one unit of work; the result is a plain JSON-able dict."""
    task = unit["task"]
    d = unit["d"]
    if task in ("h1", "h2"):
        gid = group_id(d, unit["kind"])
        spec = ModuleSpec(unit["k"], unit["l"])
        if task == "h1":
            out = h1(gid, spec).to_json()
        else:
            out = h2(gid, spec, factor_budget=unit.get("factor_budget")).to_json()
        out.update(group=gid, k=unit["k"], l=unit["l"])
        return out
    lv = LevelIdeal.from_generator(QuadInt(unit["a"], unit["b"], d))
    if task == "abelianize":
        return abelianization(group_id(d, "PSL"), lv, factor_budget=unit.get("factor_budget")).to_json()
    if task == "rank":
        return {"level": _level_json(lv), "rank": abelian_rank(group_id(d, "PSL"), lv)}
    raise UsageError(f"unknown unit task {task!r}")


def _child(unit, conn):
    try:
        conn.send(("ok", execute(unit)))
    except Exception as exc:  # reported as an error record
        conn.send(("error", f"{type(exc).__name__}: {exc}"))
    conn.close()


def run_units(units: list[dict], jobs: int = 1, budget: float | None = None):
    """Yield (unit, status, payload) in submission order.

    Units run inline when jobs == 1 and no budget is set; otherwise each
    unit gets a forked worker that is killed when the budget runs out.
    """
    if jobs == 1 and budget is None:
        for u in units:
            try:
                yield u, "ok", execute(u)
            except Exception as exc:
                yield u, "error", f"{type(exc).__name__}: {exc}"
        return
    ctx = mp.get_context("fork")
    pending = list(enumerate(units))[::-1]
    live: dict[int, tuple] = {}
    done: dict[int, tuple] = {}
    nxt = 0
    while pending or live:
        while pending and len(live) < jobs:
            i, u = pending.pop()
            rd, wr = ctx.Pipe(duplex=False)
            p = ctx.Process(target=_child, args=(u, wr), daemon=True)
            p.start()
            wr.close()
            live[i] = (p, rd, time.monotonic())
        for i, (p, rd, t0) in list(live.items()):
            if rd.poll():
                try:
                    status, payload = rd.recv()
                except EOFError:
                    status, payload = "error", "worker exited without a result"
                p.join()
            elif not p.is_alive():
                status, payload = "error", f"worker exited with code {p.exitcode}"
            elif budget is not None and time.monotonic() - t0 > budget:
                p.kill()
                p.join()
                status, payload = "timeout", f"exceeded {budget} s"
            else:
                continue
            rd.close()
            del live[i]
            done[i] = (status, payload)
        while nxt in done:
            status, payload = done.pop(nxt)
            yield units[nxt], status, payload
            nxt += 1
        if live:
            time.sleep(0.01)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """'3' -> [3]; '0-7' -> [0..7]; '1,4,6' -> [1, 4, 6]."""
    out = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bianchi", description="Cohomology of Euclidean Bianchi groups.")
    p.add_argument("--task", required=True, choices=["h1", "h2", "abelianize", "sweep", "stats", "compact"])
    p.add_argument("--d", type=int, choices=[1, 2, 3, 7, 11])
    p.add_argument("--group", default="PSL", choices=["PSL", "PGL"])
    p.add_argument("--n", help="weight(s) for E_{n,n}: 3, 0-7 or 1,4")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--norm-min", type=int, default=2)
    p.add_argument("--norm-max", type=int)
    p.add_argument("--level", help="level generator 'a,b' meaning a + b*w")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=DEFAULT_OUT, help="output directory (store and tables)")
    p.add_argument("--budget-secs", type=float, help="wall-clock budget per unit")
    p.add_argument("--factor-budget-secs", type=float, help="budget for factoring one divisor")
    p.add_argument("--table", choices=TABLES)
    p.add_argument("--x", help="checkpoint(s) for T3/T4, e.g. 1000,3000")
    p.add_argument("--format", default="csv", choices=["csv", "md"])
    return p


def make_units(args) -> list[dict]:
    if args.d is None:
        raise UsageError("--d is required")
    fb = args.factor_budget_secs
    if args.task in ("h1", "h2"):
        if args.n is not None:
            weights = [(n, n) for n in parse_range(args.n)]
        elif args.k is not None:
            weights = [(args.k, args.l if args.l is not None else 0)]
        else:
            raise UsageError("give --n or --k/--l")
        load_presentation(group_id(args.d, args.group))
        out = []
        for k, l in weights:
            ModuleSpec(k, l).check_for(args.group)
            u = {"task": args.task, "d": args.d, "kind": args.group, "k": k, "l": l}
            if args.task == "h2":
                u["factor_budget"] = fb
            out.append(u)
        return out
    if args.group != "PSL":
        raise UsageError("congruence subgroups are only supported in PSL")
    if args.level:
        try:
            a, b = (int(x) for x in args.level.split(","))
        except ValueError:
            raise UsageError("--level must look like 'a,b'") from None
        levels = [LevelIdeal.from_generator(QuadInt(a, b, args.d))]
    elif args.norm_max is not None:
        levels = degree_one_primes(args.d, args.norm_min, args.norm_max)
    else:
        raise UsageError("give --level or --norm-max")
    task = "abelianize" if args.task == "abelianize" else "rank"
    out = []
    for lv in levels:
        a, b = lv.generator.pair
        u = {"task": task, "d": args.d, "a": a, "b": b}
        if task == "abelianize":
            u["factor_budget"] = fb
        out.append(u)
    return out


def unit_key(u: dict) -> str:
    if u["task"] in ("h1", "h2"):
        return Store.key(u["d"], "1", f"{u['task']}:{u['kind']}:{u['k']}:{u['l']}")
    return Store.key(u["d"], f"{u['a']}:{u['b']}", u["task"])


def run(args) -> int:
    store = Store(store_path(args.out))
    if args.task == "compact":
        dropped = store.compact()
        print(f"compacted {store.path}: dropped {dropped} superseded records")
        return EXIT_OK
    if args.task == "stats":
        return stats(args, store)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    units = make_units(args)
    done = store.completed()
    todo = [u for u in units if unit_key(u) not in done]
    failures = 0
    for u, status, payload in run_units(todo, args.jobs, args.budget_secs):
        rec = {"key": unit_key(u), "d": u["d"], "task": u["task"], "status": status}
        rec["result" if status == "ok" else "error"] = payload
        store.append(rec)
        failures += status != "ok"
        print(f"{rec['key']}: {status}", file=sys.stderr)
    print(f"{len(units) - len(todo)} cached, {len(todo) - failures} computed, {failures} failed", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def _join(xs):
    return " ".join(str(x) for x in xs)


def _ok(store: Store, pred):
    return [r for r in store.latest().values() if r["status"] == "ok" and pred(r)]


def table_rows(table: str, store: Store, d=None, xs=None, fmt="csv"):
    """(header, rows, missing) for one table id."""
    keep_d = (lambda r: True) if d is None else (lambda r: r["d"] == d)
    if table == "H1":
        recs = sorted(_ok(store, lambda r: r["task"] == "h1" and keep_d(r)),
                      key=lambda r: (r["d"], r["result"]["group"], r["result"]["k"], r["result"]["l"]))
        rows = [(r["result"]["group"], r["result"]["k"], r["result"]["l"], r["result"]["rank"],
                 _join(r["result"]["divisor_norms"])) for r in recs]
        return ("group", "k", "l", "rank", "divisor_norms"), rows, []
    if table == "H2":
        recs = sorted(_ok(store, lambda r: r["task"] == "h2" and keep_d(r)),
                      key=lambda r: (r["d"], r["result"]["group"], r["result"]["k"], r["result"]["l"]))
        rows = []
        for r in recs:
            res = r["result"]
            large = set(res["highlighted_primes"])
            if fmt == "md":
                primes = _join(f"**{p}**" if p in large else p for p in res["torsion_primes"])
            else:
                primes = _join(res["torsion_primes"])
            rows.append((res["group"], res["k"], res["l"], res["rank"], primes,
                         _join(res["large_primes"]), _join(res["unreliable_primes"])))
        return ("group", "k", "l", "rank", "torsion_primes", "large_primes", "unreliable_primes"), rows, []
    if table in ("T1", "T5"):
        recs = sorted(_ok(store, lambda r: r["task"] == "abelianize" and keep_d(r)),
                      key=lambda r: (r["d"], r["result"]["level"]["norm"], r["key"]))
        rows = []
        for r in recs:
            res = r["result"]
            lvl = res["level"]
            gen = f"{lvl['generator']['a']},{lvl['generator']['b']}"
            if table == "T1":
                rows.append((r["d"], lvl["norm"], gen, res["rank"], _join(res["torsion_primes"]),
                             _join(res["gs_violations"])))
            else:
                if len(lvl["factors"]) != 1:
                    continue
                st = asymptotics.torsion_stat(r["d"], lvl["norm"], [int(x) for x in res["divisors"]])
                rows.append((r["d"], lvl["norm"], gen, f"{st.ratio:.5f}"))
        if table == "T1":
            return ("d", "norm", "generator", "rank", "torsion_primes", "gs_violations"), rows, []
        return ("d", "norm", "generator", "T/V"), rows, []
    # T3 / T4 need a complete rank sweep
    if d is None or not xs:
        raise UsageError(f"{table} needs --d and --x")
    ranks = {}
    for r in _ok(store, lambda r: r["task"] in ("rank", "abelianize") and r["d"] == d):
        g = r["result"]["level"]["generator"]
        ranks[f"{d}:{g['a']}:{g['b']}"] = r["result"]["rank"]
    try:
        if table == "T3":
            h = asymptotics.nr_histogram(d, ranks, max(xs))
            return ("r", "N_r", "percent"), h.to_rows(), []
        rows = [(x, L, "inf" if ratio is None else f"{ratio:.3f}")
                for x, L, ratio in asymptotics.lx_rx_table(d, ranks, xs)]
        return ("x", "L", "R/L"), rows, []
    except asymptotics.IncompleteSweep as exc:
        header = ("r", "N_r", "percent") if table == "T3" else ("x", "L", "R/L")
        return header, [], exc.missing


def render(header, rows, fmt="csv") -> str:
    if fmt == "csv":
        return asymptotics.to_csv(header, rows)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(x) for x in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def stats(args, store: Store) -> int:
    if not args.table:
        raise UsageError("--task stats needs --table")
    xs = parse_range(args.x) if args.x else None
    header, rows, missing = table_rows(args.table, store, args.d, xs, args.format)
    text = render(header, rows, args.format)
    out_dir = store.path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = "csv" if args.format == "csv" else "md"
    name = args.table if args.d is None else f"{args.table}_d{args.d}"
    (out_dir / f"{name}.{suffix}").write_text(text)
    sys.stdout.write(text)
    if missing:
        print(f"missing {len(missing)} levels, e.g. {missing[:3]}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bianchi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, LookupError) as exc:
        print(f"bianchi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
