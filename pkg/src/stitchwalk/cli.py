"""Experiment harness: batches of seeded trials over one graph, emitted as CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Sequence

import numpy as np

from .congest.engine import EngineError, SimConfig
from .graph import Graph, GraphError, diameter, parse_graph_spec
from .walk.params import ParamError, WalkParams, graph_diameter

PROTOCOLS = ("single", "many", "sod", "pos", "mh", "rst", "mixing", "naive")
COLUMNS = ("trial", "seed", "protocol", "graph", "n", "m", "D", "ell", "lam", "eta", "k", "rounds_total",
           "messages_total", "max_edge_load", "digest")
SCHEMA = "stitchwalk-results v1"
OUT_ENV = "STITCHWALK_OUT_DIR"

EXIT_OK, EXIT_SPEC, EXIT_GRAPH, EXIT_ENGINE, EXIT_IO = 0, 2, 3, 4, 5


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    graph: str
    protocol: str = "single"
    ell: list[int] = field(default_factory=lambda: [16])
    lam: int | str | None = None
    eta: int | None = None
    k: int = 1
    alpha: float = 0.5
    target: str = "degree"
    source: int = 0
    trials: int = 1
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.ell, int):
            self.ell = [self.ell]
        self.ell = [int(x) for x in self.ell]

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise SpecError(f"unknown protocol {self.protocol!r}; choose from {', '.join(PROTOCOLS)}")
        if self.trials < 1:
            raise SpecError("trials must be >= 1")
        if self.k < 1:
            raise SpecError("k must be >= 1")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise SpecError("format must be csv or json")
        if not self.ell or any(x < 0 for x in self.ell):
            raise SpecError("ell values must be >= 0")
        if self.protocol == "mh" and not 0 < self.alpha < 1:
            raise SpecError("alpha must lie in (0, 1)")
        if isinstance(self.lam, str) and self.lam != "sqrt":
            raise SpecError("lambda must be an integer or 'sqrt'")
        for ell in self.ell:
            try:
                WalkParams(ell, None if isinstance(self.lam, str) else self.lam, self.eta, self.k)
            except ParamError as exc:
                if self.protocol not in ("rst", "mixing"):
                    raise SpecError(str(exc)) from None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise SpecError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def trial_seeds(master: int, trials: int) -> list[int]:
    """Independent per-trial seeds; fixed by (master, index) so worker count never matters."""
    kids = np.random.SeedSequence(master).spawn(trials)
    return [int(k.generate_state(1, dtype=np.uint32)[0]) for k in kids]


def _target_weights(spec: ExperimentSpec, g: Graph) -> list[float]:
    t = spec.target
    if t == "degree":
        return [float(d) for d in g.degrees()]
    if t == "uniform":
        return [1.0] * g.n
    vals = [float(x) for x in t.split(",")]
    if len(vals) != g.n:
        raise SpecError(f"target needs {g.n} weights, got {len(vals)}")
    return vals


def _short_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj).encode()).hexdigest()[:12]


def resolve_lambda(lam: int | str | None, ell: int, D: int) -> int | None:
    """``"sqrt"`` picks ceil(sqrt(ell D)) per length: the sqrt(ell D) scaling without polylog factors."""
    if lam == "sqrt":
        return max(1, min(ell, math.ceil(math.sqrt(ell * D))))
    return lam


def _run_trial(spec: ExperimentSpec, g: Graph, ell: int, seed: int) -> tuple[Any, Any, Any, Any, str]:
    """Returns (stats, lam, eta, k, digest)."""
    from .apps.mixing import estimate_mixing
    from .apps.rst import random_spanning_tree
    from .walk import (k_rw_sod, many_random_walks, mh_random_walk, naive_random_walk, regenerate_walk,
                       single_random_walk)

    cfg = SimConfig(seed=seed)
    lam = resolve_lambda(spec.lam, ell, graph_diameter(g))
    p = WalkParams(ell, lam, spec.eta, spec.k)
    s = spec.source
    if spec.protocol == "naive":
        o = naive_random_walk(g, s, ell, cfg)
        return o.stats, None, None, 1, str(o.destination)
    if spec.protocol == "single":
        o = single_random_walk(g, s, p, cfg)
        return o.stats, o.lam, o.eta, 1, str(o.destination)
    if spec.protocol == "pos":
        o = single_random_walk(g, s, p, cfg, trace=True)
        regenerate_walk(o)
        return o.stats, o.lam, o.eta, 1, f"{o.destination}:{_short_hash(o.sequence())}"
    if spec.protocol == "mh":
        o = mh_random_walk(g, s, _target_weights(spec, g), spec.alpha, p, cfg)
        return o.stats, o.lam, o.eta, 1, str(o.destination)
    if spec.protocol == "many":
        outs = many_random_walks(g, [s] * spec.k, p, cfg)
        return outs[0].stats, outs[0].lam, outs[0].eta, spec.k, ";".join(str(o.destination) for o in outs)
    if spec.protocol == "sod":
        sources = [(s + i) % g.n for i in range(spec.k)]
        r = k_rw_sod(g, sources, p, cfg)
        o = r.outcomes[0]
        return r.stats, o.lam, o.eta, spec.k, ";".join(f"{a}>{b}" for a, b in zip(sources, r.delivered))
    if spec.protocol == "rst":
        t = random_spanning_tree(g, s, cfg, lam=lam)
        return t.stats, lam, None, 1, "|".join(f"{u}-{v}" for u, v in t.to_edge_list())
    rep = estimate_mixing(g, s, cfg, lam=lam)
    return rep.stats, lam, None, rep.K, str(rep.tau_estimate)


def _job(args):
    spec, g, ell, seed = args
    stats, lam, eta, k, digest = _run_trial(spec, g, ell, seed)
    return stats.rounds_total, stats.messages_total, stats.max_edge_load, lam, eta, k, digest


def fit_exponent(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Slope of log y against log x by least squares; None with fewer than two distinct x."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len({p[0] for p in pts}) < 2:
        return None
    a = np.array(pts)
    return float(np.polyfit(a[:, 0], a[:, 1], 1)[0])


def run_experiment(spec: ExperimentSpec) -> list[dict[str, Any]]:
    """One row per (ell, trial), then one mean row per ell and a final summary row."""
    spec.validate()
    g = parse_graph_spec(spec.graph, seed=spec.seed)
    if not 0 <= spec.source < g.n:
        raise SpecError(f"source {spec.source} out of range for n={g.n}")
    D = diameter(g)
    seeds = trial_seeds(spec.seed, spec.trials)
    jobs = [(spec, g, ell, sd) for ell in spec.ell for sd in seeds]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        results = [_job(j) for j in jobs]
    rows = []
    base = {"protocol": spec.protocol, "graph": spec.graph, "n": g.n, "m": g.m, "D": D}
    for (_, _, ell, sd), (rounds, msgs, load, lam, eta, k, digest) in zip(jobs, results):
        rows.append({"trial": len(rows) % spec.trials, "seed": sd, **base, "ell": ell, "lam": lam, "eta": eta,
                     "k": k, "rounds_total": rounds, "messages_total": msgs, "max_edge_load": load,
                     "digest": digest})
    medians = []
    for ell in spec.ell:
        sel = [r for r in rows if r["ell"] == ell and r["trial"] != "mean"]
        med = float(np.median([r["rounds_total"] for r in sel]))
        medians.append(med)
        rows.append({"trial": "mean", "seed": spec.seed, **base, "ell": ell, "lam": sel[0]["lam"],
                     "eta": sel[0]["eta"], "k": sel[0]["k"],
                     "rounds_total": _fmt(np.mean([r["rounds_total"] for r in sel])),
                     "messages_total": _fmt(np.mean([r["messages_total"] for r in sel])),
                     "max_edge_load": _fmt(np.mean([r["max_edge_load"] for r in sel])),
                     "digest": f"median_rounds={_fmt(med)}"})
    slope = fit_exponent(spec.ell, medians)
    trial_rows = rows[: len(jobs)]
    rows.append({"trial": "summary", "seed": spec.seed, **base, "ell": "|".join(map(str, spec.ell)), "lam": spec.lam,
                 "eta": spec.eta, "k": spec.k,
                 "rounds_total": _fmt(np.mean([r["rounds_total"] for r in trial_rows])),
                 "messages_total": _fmt(np.mean([r["messages_total"] for r in trial_rows])),
                 "max_edge_load": _fmt(np.mean([r["max_edge_load"] for r in trial_rows])),
                 "digest": "exponent=" + ("na" if slope is None else _fmt(slope))})
    return rows


def _fmt(x: float) -> str:
    return f"{float(x):.6g}"


def emit(rows: list[dict[str, Any]], fmt: str = "csv", path: str | None = None) -> str:
    """Serialize rows with a fixed column order; writes to ``path`` when given and returns the text."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {SCHEMA}\n")
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: "" if r.get(c) is None else r.get(c) for c in COLUMNS})
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"schema": SCHEMA, "columns": list(COLUMNS),
                           "rows": [[r.get(c) for c in COLUMNS] for r in rows]}, indent=1) + "\n"
    else:
        raise SpecError(f"unknown format {fmt!r}")
    if path is not None:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def default_out_path(spec: ExperimentSpec) -> str:
    base = os.environ.get(OUT_ENV, "results")
    tag = spec.graph.replace(":", "-").replace("/", "_")
    return os.path.join(base, f"{spec.protocol}-{tag}-s{spec.seed}.{spec.format}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stitchwalk", description="Run seeded random-walk experiments on a simulated network.")
    ap.add_argument("--config", help="JSON file with ExperimentSpec fields; flags override it")
    ap.add_argument("--graph", help="kind:n[:param], grid:RxC, file:path or a path to an edge list")
    ap.add_argument("--protocol", choices=PROTOCOLS)
    ap.add_argument("--ell", help="walk length, or a comma-separated grid")
    ap.add_argument("--lambda", dest="lam", type=_lam_arg, help="short-walk length, or 'sqrt' for ceil(sqrt(ell D))")
    ap.add_argument("--eta", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--target", help="MH target: degree, uniform, or comma-separated weights")
    ap.add_argument("--source", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help=f"output file, '-' for stdout (default: under ${OUT_ENV} or ./results)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--workers", type=int)
    return ap


def _lam_arg(text: str) -> int | str:
    return text if text == "sqrt" else int(text)


def spec_from_args(ns: argparse.Namespace) -> ExperimentSpec:
    cfg: dict[str, Any] = {}
    if ns.config:
        with open(ns.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise SpecError("config file must hold a JSON object")
    for key in ("graph", "protocol", "lam", "eta", "k", "alpha", "target", "source", "trials", "seed", "out",
                "format", "workers"):
        val = getattr(ns, key)
        if val is not None:
            cfg[key] = val
    if ns.ell is not None:
        try:
            cfg["ell"] = [int(x) for x in ns.ell.split(",")]
        except ValueError:
            raise SpecError(f"bad --ell value {ns.ell!r}") from None
    if "graph" not in cfg:
        raise SpecError("--graph is required (flag or config)")
    return ExperimentSpec.from_dict(cfg)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(ns)
        rows = run_experiment(spec)
    except (SpecError, ParamError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except GraphError as exc:
        print(f"graph error: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if spec.out == "-":
            sys.stdout.write(emit(rows, spec.format))
        else:
            path = spec.out or default_out_path(spec)
            emit(rows, spec.format, path)
            print(path)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
