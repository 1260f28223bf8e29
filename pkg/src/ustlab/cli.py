"""Command-line experiment runner.

Subcommands:
  sample-ust   sample a boundary-condition UST on a lattice domain
  cut          apply Poissonian cutting to a sampled tree
  structure    extract the cluster structure graph of a forest
  glue         run a gluing scheme on a structure graph
  exponents    Monte Carlo sweeps (lerw-length | es | four-arm | k-stat)
  verify       run the exact oracle / invariant suite
  render       render a dumped artifact to SVG

Configuration comes from an optional JSON/TOML file plus flags (flags
win).  The environment variable USTLAB_SEED overrides the default seed.
Outputs (CSV/JSON/SVG) are byte-identical for identical configs,
independent of the worker count.  Exit codes: 0 success, 1 invariant
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import ConfigError, UstLabError
from .lattice import LatticeDomain, build_box_domain, build_disc_domain, build_rect_domain
from .rng import spawn_kernel_seeds, stream
from .sampling import SpanningForest, boundary_ust, dual_tree
from .structure import (
    Site,
    StructureGraph,
    extract_structure_graph,
    glue_homogeneous,
    glue_resistance_rates,
    glue_uniform,
)

CSV_SCHEMA = "ustlab.csv.v1"
DEFAULT_SEED = 20260826

__all__ = ["main", "run"]


def _fmt_float(x) -> str:
    return f"{float(x):.17g}"


def _csv_document(columns, rows) -> str:
    lines = [f"# schema: {CSV_SCHEMA}", ",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(_fmt_float(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def _load_config(path):
    if path is None:
        return {}
    try:
        if path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:  # python < 3.11
                import tomli as tomllib

            with open(path, "rb") as fh:
                return tomllib.load(fh)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _merge(config: dict, args: argparse.Namespace, keys) -> dict:
    """Config file values overridden by explicitly-set flags."""
    out = dict(config)
    for k in keys:
        v = getattr(args, k.replace("-", "_"), None)
        if v is not None:
            out[k] = v
    return out


def _get_seed(params: dict) -> int:
    if "seed" in params and params["seed"] is not None:
        return int(params["seed"])
    env = os.environ.get("USTLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"USTLAB_SEED is not an integer: {env!r}") from exc
    return DEFAULT_SEED


def _build_domain(params: dict) -> LatticeDomain:
    kind = params.get("domain", "box")
    mesh = float(params.get("mesh", 1.0))
    bc = params.get("bc", "wired")
    try:
        if kind == "box":
            return build_box_domain(int(params.get("n", 8)), mesh, bc)
        if kind == "rect":
            return build_rect_domain(int(params["nx"]), int(params["ny"]), mesh, bc)
        if kind == "disc":
            return build_disc_domain(float(params["R"]), mesh, bc)
    except KeyError as exc:
        raise ConfigError(f"domain kind {kind!r} missing parameter {exc}") from exc
    raise ConfigError(f"unknown domain kind {kind!r}")


def _domain_spec(params: dict) -> dict:
    kind = params.get("domain", "box")
    spec = {"kind": kind, "mesh": float(params.get("mesh", 1.0)), "bc": params.get("bc", "wired")}
    if kind == "box":
        spec["n"] = int(params.get("n", 8))
    elif kind == "rect":
        spec["nx"], spec["ny"] = int(params["nx"]), int(params["ny"])
    elif kind == "disc":
        spec["R"] = float(params["R"])
    return spec


def _forest_dump(domain_spec: dict, forest: SpanningForest, extra=None) -> str:
    doc = {
        "type": "forest",
        "domain": domain_spec,
        "tree_edges": sorted(forest.tree_edges),
        **(extra or {}),
    }
    return json.dumps(doc, sort_keys=True)


def _load_forest(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("type") != "forest":
        raise ConfigError(f"{path} is not a forest dump")
    domain = LatticeDomain.from_json(json.dumps(doc["domain"]))
    labels = frozenset(_tuplify(lab) for lab in doc["tree_edges"])
    return doc, domain, SpanningForest(domain.effective_graph, labels, domain)


def _load_structure(path) -> StructureGraph:
    with open(path) as fh:
        doc = json.load(fh)
    sites = {
        s["id"]: Site(size=s["size"], diameter=s["diameter"], rep=s["id"])
        for s in doc["sites"]
    }
    mult = {(e["a"], e["b"]): int(e["m"]) for e in doc["edges"]}
    return StructureGraph(doc["mesh"], sites, mult)


# -- subcommands -----------------------------------------------------------


def _cmd_sample_ust(args, config) -> int:
    params = _merge(config, args, ["domain", "n", "nx", "ny", "R", "mesh", "bc", "seed", "out", "svg"])
    seed = _get_seed(params)
    domain = _build_domain(params)
    forest = boundary_ust(domain, stream(seed, 0x51))
    _emit(_forest_dump(_domain_spec(params), forest, {"seed": seed}) + "\n", params.get("out"))
    if params.get("svg"):
        from .render import render_forest

        _emit(render_forest(forest), params["svg"])
    return 0


def _cmd_cut(args, config) -> int:
    from .dynamics import forest_at, sample_cut_schedule

    params = _merge(config, args, ["forest", "t", "seed", "out", "svg"])
    if not params.get("forest"):
        raise ConfigError("cut requires --forest (a sample-ust dump)")
    doc, domain, forest = _load_forest(params["forest"])
    seed = _get_seed(params)
    times = params.get("t", [-1.0])
    if isinstance(times, (int, float)):
        times = [times]
    sched = sample_cut_schedule(forest, domain.mesh, stream(seed, 0xC7))
    snapshots = []
    for t in times:
        ft = forest_at(forest, sched, float(t))
        snapshots.append(
            {
                "t": float(t),
                "tree_edges": sorted(ft.tree_edges),
                "components": len(ft.components),
            }
        )
    out = {
        "type": "cut",
        "domain": doc["domain"],
        "seed": seed,
        "rate": sched.rate,
        "snapshots": snapshots,
    }
    _emit(json.dumps(out, sort_keys=True) + "\n", params.get("out"))
    if params.get("svg"):
        from .render import render_forest

        ft = forest_at(forest, sched, float(times[-1]))
        _emit(render_forest(ft), params["svg"])
    return 0


def _cmd_structure(args, config) -> int:
    from .dynamics import forest_at, sample_cut_schedule
    from .structure import truncate

    params = _merge(config, args, ["forest", "t", "eps", "seed", "out", "svg"])
    if not params.get("forest"):
        raise ConfigError("structure requires --forest (a sample-ust dump)")
    doc, domain, forest = _load_forest(params["forest"])
    t = params.get("t")
    if t is not None:
        seed = _get_seed(params)
        sched = sample_cut_schedule(forest, domain.mesh, stream(seed, 0xC7))
        forest = forest_at(forest, sched, float(t))
    S = extract_structure_graph(forest)
    if params.get("eps"):
        S = truncate(S, float(params["eps"]))
    _emit(S.to_json() + "\n", params.get("out"))
    if params.get("svg"):
        from .render import render_structure

        _emit(render_structure(S), params["svg"])
    return 0


def _cmd_glue(args, config) -> int:
    params = _merge(config, args, ["structure", "scheme", "t", "duration", "seed", "out"])
    if not params.get("structure"):
        raise ConfigError("glue requires --structure (a structure-graph dump)")
    S = _load_structure(params["structure"])
    seed = _get_seed(params)
    scheme = params.get("scheme", "uniform")
    rng = stream(seed, 0x61)
    if scheme == "uniform":
        traj = glue_uniform(S, float(params.get("t", -1.0)), rng)
        events = [
            {"time": ev.time, "pair": [repr(ev.pair[0]), repr(ev.pair[1])], "m": ev.multiplicity}
            for ev in traj.events
        ]
    elif scheme == "homogeneous":
        traj = glue_homogeneous(S, float(params.get("duration", math.inf)), rng)
        events = [
            {"time": ev.time, "pair": [repr(ev.pair[0]), repr(ev.pair[1])], "m": ev.multiplicity}
            for ev in traj.events
        ]
    elif scheme == "resistance":
        g = S.as_weighted_graph()
        ev_list, final = glue_resistance_rates(g, float(params.get("duration", math.inf)), rng)
        events = [{"time": t, "edge": repr(lab)} for t, lab in ev_list]
    else:
        raise ConfigError(f"unknown gluing scheme {scheme!r}")
    out = {"type": "gluing", "scheme": scheme, "seed": seed, "events": events}
    _emit(json.dumps(out, sort_keys=True) + "\n", params.get("out"))
    return 0


# -- exponents: worker-farmed sweeps ----------------------------------------


def _chunk_bounds(n: int, workers: int):
    step = (n + workers - 1) // workers
    return [(i, min(i + step, n)) for i in range(0, n, step)]


def _lerw_chunk(task):
    N, seeds = task
    from . import _kernels

    lengths = _kernels.lerw_length_batch(N, seeds)
    return int(lengths.sum()), int((lengths.astype(object) ** 2).sum()), len(lengths)


def _es_chunk(task):
    L, N, seeds = task
    from . import _kernels

    return int(_kernels.escape_batch(L, N, seeds).sum()), len(seeds)


def _four_arm_chunk(task):
    L, N, seeds = task
    from .estimators import _FourArmSampler

    sampler = _FourArmSampler(N)
    return sum(sampler.sample(L, N, np.uint64(s)) for s in seeds), len(seeds)


def _k_stat_chunk(task):
    L, scale, seeds = task
    from . import _kernels
    from .sampling import _lattice_csr

    domain = build_box_domain(scale, 1.0, "wired")
    cache = _lattice_csr(domain)
    root = cache["vidx"]["wired"]
    order = np.arange(len(cache["verts"]), dtype=np.int64)
    eu, ev, norms = cache["eu"], cache["ev"], cache["norms"]
    total = totsq = 0
    for s in seeds:
        nxt = _kernels.wilson_csr(cache["indptr"], cache["indices"], order, root, np.uint64(s))
        emask = (nxt[eu] == ev) | (nxt[ev] == eu)
        k = _kernels.count_crossing_components(eu, ev, emask, norms, float(L), float(3 * L), 1.0)
        total += int(k)
        totsq += int(k) ** 2
    return total, totsq, len(seeds)


def _farm(fn, tasks, workers: int):
    """Run chunk tasks in a fixed order; per-replicate seeds make the
    reduction independent of the chunking."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _moment_rows(chunks):
    total = sum(c[0] for c in chunks)
    totsq = sum(c[1] for c in chunks)
    n = sum(c[2] for c in chunks)
    mean = total / n
    var = max(totsq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n), n


def _cmd_exponents(args, config) -> int:
    from .estimators import fit_loglog_slope

    params = _merge(
        config, args, ["kind", "sizes", "L", "samples", "seed", "workers", "out", "summary"]
    )
    kind = params.get("kind")
    seed = _get_seed(params)
    samples = int(params.get("samples", 1000))
    workers = max(int(params.get("workers", 1)), 1)
    sizes = params.get("sizes", [32, 64, 128, 256])
    if isinstance(sizes, str):
        sizes = [int(s) for s in sizes.split(",")]
    rows = []
    summary: dict = {"kind": kind, "seed": seed, "samples": samples}
    if kind == "lerw-length":
        for N in sizes:
            seeds = spawn_kernel_seeds(seed, samples, 0x1E, int(N))
            tasks = [(int(N), seeds[a:b]) for a, b in _chunk_bounds(samples, workers)]
            mean, se, n = _moment_rows(_farm(_lerw_chunk, tasks, workers))
            rows.append({"N": int(N), "mean": mean, "stderr": se, "samples": n})
        fit = fit_loglog_slope([r["N"] for r in rows], [r["mean"] for r in rows], [r["stderr"] for r in rows])
        summary["fit"] = fit
        columns = ["N", "mean", "stderr", "samples"]
    elif kind == "es":
        L = int(params.get("L", 1))
        for N in sizes:
            seeds = spawn_kernel_seeds(seed, samples, 0xE5, L, int(N), 0)
            tasks = [(L, int(N), seeds[a:b]) for a, b in _chunk_bounds(samples, workers)]
            chunks = _farm(_es_chunk, tasks, workers)
            hits = sum(c[0] for c in chunks)
            p = hits / samples
            se = math.sqrt(max(p * (1 - p), 0.0) / samples)
            rows.append({"N": int(N), "mean": p, "stderr": se, "samples": samples})
        fit = fit_loglog_slope([r["N"] for r in rows], [r["mean"] for r in rows], [r["stderr"] for r in rows])
        summary["fit"] = fit
        summary["L"] = L
        columns = ["N", "mean", "stderr", "samples"]
    elif kind == "four-arm":
        L = int(params.get("L", 2))
        for N in sizes:
            seeds = spawn_kernel_seeds(seed, samples, 0x4A, L, int(N))
            tasks = [(L, int(N), seeds[a:b]) for a, b in _chunk_bounds(samples, workers)]
            chunks = _farm(_four_arm_chunk, tasks, workers)
            hits = sum(c[0] for c in chunks)
            p = hits / samples
            se = math.sqrt(max(p * (1 - p), 0.0) / samples)
            rows.append(
                {
                    "N": int(N),
                    "mean": p,
                    "stderr": se,
                    "scaled": p * (N / L) ** 0.75,
                    "samples": samples,
                }
            )
        summary["L"] = L
        columns = ["N", "mean", "stderr", "scaled", "samples"]
    elif kind == "k-stat":
        for L in sizes:
            scale = int(params.get("scale_factor", 4)) * int(L)
            seeds = spawn_kernel_seeds(seed, samples, 0x5C, int(L), scale)
            tasks = [(int(L), scale, seeds[a:b]) for a, b in _chunk_bounds(samples, workers)]
            mean, se, n = _moment_rows(_farm(_k_stat_chunk, tasks, workers))
            rows.append({"N": int(L), "mean": mean, "stderr": se, "samples": n})
        columns = ["N", "mean", "stderr", "samples"]
    else:
        raise ConfigError(f"unknown exponents kind {kind!r} (expected lerw-length|es|four-arm|k-stat)")
    _emit(_csv_document(columns, rows), params.get("out"))
    if params.get("summary"):
        summary["rows"] = rows
        _emit(json.dumps(summary, sort_keys=True) + "\n", params["summary"])
    return 0


# -- verify ------------------------------------------------------------------


def _verify_checks(seed: int):
    """Fast exact-oracle suite; yields (name, ok) pairs."""
    from fractions import Fraction

    from .estimators import (
        edge_marginal_monotonicity_check,
        monotonicity_corpus,
        time_reversal_tv_test,
    )
    from .graph import (
        WeightedGraph,
        edge_ust_probability_exact,
        effective_resistance_exact,
        spanning_tree_count,
    )
    from .structure import glue_uniform as _glue

    k3 = WeightedGraph([0, 1, 2], [(0, 1, 1, "a"), (1, 2, 1, "b"), (0, 2, 1, "c")])
    yield "tree-count-k3", spanning_tree_count(k3) == 3
    grid = build_box_domain(1, 1.0, "free").effective_graph
    yield "tree-count-3x3", spanning_tree_count(grid) == 192
    yield "kirchhoff-k3", edge_ust_probability_exact(k3, "a") == Fraction(1) * effective_resistance_exact(k3, "a")

    rng = stream(seed, 0xFE)
    d = build_box_domain(2, 1.0, "wired")
    ok = True
    for _ in range(200):
        f = boundary_ust(d, rng)
        dt = dual_tree(f, d)
        ok = ok and f.is_spanning_tree() and dt.is_spanning_tree()
    yield "duality-5x5", ok

    tv, exact_ok = time_reversal_tv_test(build_rect_domain(2, 2, 1.0, "free"), -1.0, 0, seed)
    yield "time-reversal-2x2", bool(exact_ok) and tv == 0.0

    yield "monotonicity-small", edge_marginal_monotonicity_check(monotonicity_corpus(5))

    # weight conservation across a handful of gluing trajectories
    from .dynamics import forest_at, sample_cut_schedule
    from .structure import extract_structure_graph as _extract

    ok = True
    for _ in range(20):
        f = boundary_ust(d, rng)
        sched = sample_cut_schedule(f, 1.0, rng)
        ft = forest_at(f, sched, -1.0)
        S = _extract(ft)
        if len(S.sites) < 2:
            continue
        traj = _glue(S, -1.0, rng)
        ok = ok and len(traj.events) == len(S.sites) - 1
        ok = ok and all(ev.multiplicity >= 1 for ev in traj.events)
    yield "weight-conservation", ok


def _cmd_verify(args, config) -> int:
    params = _merge(config, args, ["seed", "out"])
    seed = _get_seed(params)
    lines = []
    all_ok = True
    for name, ok in _verify_checks(seed):
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
        all_ok = all_ok and ok
    lines.append("OK" if all_ok else "FAILED")
    _emit("\n".join(lines) + "\n", params.get("out"))
    return 0 if all_ok else 1


def _cmd_render(args, config) -> int:
    params = _merge(config, args, ["input", "out"])
    path = params.get("input")
    if not path:
        raise ConfigError("render requires --input (a JSON dump)")
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("type") == "forest":
        _, _, forest = _load_forest(path)
        from .render import render_forest

        _emit(render_forest(forest), params.get("out"))
    elif "sites" in doc:
        from .render import render_structure

        _emit(render_structure(_load_structure(path)), params.get("out"))
    else:
        raise ConfigError(f"unrecognized artifact in {path}")
    return 0


# -- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ustlab", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON or TOML configuration file")
    sub = p.add_subparsers(dest="command", required=True)

    def add_domain_flags(sp):
        sp.add_argument("--domain", choices=["box", "rect", "disc"])
        sp.add_argument("--n", type=int)
        sp.add_argument("--nx", type=int)
        sp.add_argument("--ny", type=int)
        sp.add_argument("--R", type=float)
        sp.add_argument("--mesh", type=float)
        sp.add_argument("--bc", choices=["wired", "free"])

    sp = sub.add_parser("sample-ust", help="sample a UST on a lattice domain")
    add_domain_flags(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(fn=_cmd_sample_ust)

    sp = sub.add_parser("cut", help="Poissonian cutting of a sampled tree")
    sp.add_argument("--forest")
    sp.add_argument("--t", type=float, nargs="+")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(fn=_cmd_cut)

    sp = sub.add_parser("structure", help="extract a cluster structure graph")
    sp.add_argument("--forest")
    sp.add_argument("--t", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(fn=_cmd_structure)

    sp = sub.add_parser("glue", help="run a gluing scheme on a structure graph")
    sp.add_argument("--structure")
    sp.add_argument("--scheme", choices=["uniform", "homogeneous", "resistance"])
    sp.add_argument("--t", type=float)
    sp.add_argument("--duration", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_glue)

    sp = sub.add_parser("exponents", help="Monte Carlo exponent sweeps")
    sp.add_argument("kind", nargs="?", choices=["lerw-length", "es", "four-arm", "k-stat"])
    sp.add_argument("--sizes")
    sp.add_argument("--L", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out")
    sp.add_argument("--summary")
    sp.set_defaults(fn=_cmd_exponents)

    sp = sub.add_parser("verify", help="run the exact oracle suite")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("render", help="render a dumped artifact to SVG")
    sp.add_argument("--input")
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_render)
    return p


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return args.fn(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except UstLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
