"""Command-line entry points.

Subcommands: ``gen`` (instances), ``ingest`` (real ratings), ``cover``
(cluster-count tables), ``run`` (multi-seed policy comparisons), ``yardstick``
(trace-optimal match count), ``report`` (summarize a run directory).

Exit codes: 0 success, 2 input error, 3 internal assertion failure.  Output
files are plain text and CSV only; a rerun with an identical config is
byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import boy_side_covering, cluster_bound, girl_side_covering, table_radii
from .core import (
    PreferenceMatrices,
    build_matching_graph,
    delta_overload,
    read_instance,
    write_instance,
)
from .datagen import ClusteredSpec, gen_adversarial_random, gen_block_lowerbound, gen_clustered, gen_random_bipartite
from .errors import InputError, InternalCheckError, MatchlabError
from .ingest import binarize, densify, parse_ratings
from .omniscient import ArrivalCounts, arrival_counts, optimal_matches
from .policies import POLICIES, make_policy
from .protocol import RoundTrace, run_protocol

POLICY_PARAM_TYPES = {
    "smile": {"S": int, "gamma": float, "tolerance": float},
    "ismile": {"S": int, "tolerance": float},
    "uromm": {},
    "oomm": {},
}


@dataclass
class ExperimentConfig:
    """Parsed key=value run configuration."""

    instance: Path
    policies: list[str]
    T: int
    seeds: list[int]
    out: Path
    threads: int = 1
    curve_stride: int = 1
    save_runs: bool = False
    save_traces: bool = False
    policy_params: dict[str, dict] = field(default_factory=dict)


def parse_config(path) -> ExperimentConfig:
    """Plain-text config: one key=value per line, '#' comments allowed.

    ``seeds`` is either a count (seeds are then base_seed..base_seed+k-1)
    or an explicit comma list.  Per-policy overrides use dotted keys, e.g.
    ``smile.S=6``.
    """
    kv: dict[str, str] = {}
    policy_params: dict[str, dict] = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{i}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." in key:
            pol, param = key.split(".", 1)
            if pol not in POLICY_PARAM_TYPES:
                raise InputError(f"{path}:{i}: unknown policy {pol!r} in override")
            types = POLICY_PARAM_TYPES[pol]
            if param not in types:
                raise InputError(f"{path}:{i}: policy {pol!r} takes no parameter {param!r}")
            policy_params.setdefault(pol, {})[param] = types[param](value)
        else:
            kv[key] = value

    def need(key):
        if key not in kv:
            raise InputError(f"{path}: missing required key {key!r}")
        return kv[key]

    policies = [p.strip() for p in need("policies").split(",") if p.strip()]
    if not policies:
        raise InputError(f"{path}: at least one policy required")
    for p in policies:
        if p not in POLICIES:
            raise InputError(f"{path}: unknown policy {p!r}")
    T = int(need("T"))
    base_seed = int(kv.get("base_seed", "0"))
    seeds_raw = need("seeds")
    if "," in seeds_raw:
        seeds = [int(s) for s in seeds_raw.split(",") if s.strip()]
    else:
        count = int(seeds_raw)
        if count < 1:
            raise InputError(f"{path}: seeds count must be >= 1")
        seeds = [base_seed + i for i in range(count)]
    if not seeds:
        raise InputError(f"{path}: seeds must be nonempty")
    return ExperimentConfig(
        instance=Path(need("instance")),
        policies=policies,
        T=T,
        seeds=seeds,
        out=Path(kv.get("out", "runs/out")),
        threads=int(kv.get("threads", "1")),
        curve_stride=int(kv.get("curve_stride", "1")),
        save_runs=kv.get("save_runs", "0") not in ("0", "false", ""),
        save_traces=kv.get("save_traces", "0") not in ("0", "false", ""),
        policy_params=policy_params,
    )


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _load_instance(path) -> PreferenceMatrices:
    p = Path(path)
    if not p.exists():
        raise InputError(f"instance file not found: {p}")
    return read_instance(p)


# ---------------------------------------------------------------- run


def cmd_run(config: ExperimentConfig) -> int:
    prefs = _load_instance(config.instance)
    n = prefs.n
    if config.T < 1:
        raise InputError("T must be >= 1")
    if config.T > 4 * n * n:
        raise InputError(f"T={config.T} exceeds the 4 n^2 = {4 * n * n} sanity cap")
    mg = build_matching_graph(prefs)
    out = config.out
    out.mkdir(parents=True, exist_ok=True)

    def one_run(pol_name, params, seed):
        policy = make_policy(pol_name, **params)
        run = run_protocol(prefs, policy, config.T, seed, config.curve_stride)
        return run, policy.diagnostics()

    results: dict[str, list] = {p: [] for p in config.policies}
    diags: dict[tuple[str, int], dict] = {}
    jobs = [
        (pol_name, config.policy_params.get(pol_name, {}), seed)
        for pol_name in config.policies
        for seed in config.seeds
    ]
    if config.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=config.threads) as ex:
            outcomes = list(ex.map(lambda j: one_run(*j), jobs))
    else:
        outcomes = [one_run(*j) for j in jobs]
    # merged deterministically: jobs are in (policy, seed) order already
    for (pol_name, _, seed), (run, diag) in zip(jobs, outcomes):
        results[pol_name].append(run)
        diags[(pol_name, seed)] = diag

    # yardstick per seed (arrivals are shared across policies for a seed)
    mstar: dict[int, int] = {}
    first_policy_runs = results[config.policies[0]]
    for run in first_policy_runs:
        mstar[run.seed] = optimal_matches(mg, arrival_counts(run.trace))
    for pol_name, runs in results.items():
        for run in runs:
            if run.ledger.matches > mstar[run.seed]:
                raise InternalCheckError(
                    f"dominance violated: {pol_name} seed {run.seed} uncovered "
                    f"{run.ledger.matches} > M*_T = {mstar[run.seed]}"
                )

    _write_manifest(out / "manifest.txt", config, prefs, mg)
    _write_curves(out / "curves.csv", config, results)
    _write_auc(out / "auc.csv", config, results)
    _write_yardstick(out / "yardstick.csv", config, results, mstar, mg)
    _write_stats(out / "stats.csv", config, results, diags, prefs)
    if config.save_runs or (len(config.policies) * len(config.seeds)) <= 4:
        rdir = out / "runs"
        rdir.mkdir(exist_ok=True)
        for pol_name, runs in results.items():
            for run in runs:
                _write_run_csv(rdir / f"{pol_name}-{run.seed}.csv", run, config.curve_stride)
    if config.save_traces:
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)
        for pol_name, runs in results.items():
            for run in runs:
                write_trace(tdir / f"{pol_name}-{run.seed}.trace.csv", run.trace)
    print(f"wrote {out}")
    return 0


def _recorded_ts(T, stride):
    ts = list(range(stride, T + 1, stride)) if stride > 1 else list(range(1, T + 1))
    if stride > 1 and (not ts or ts[-1] != T):
        ts.append(T)
    return ts


def _write_run_csv(path, run, stride):
    ts = _recorded_ts(run.T, stride)
    lines = ["t,matches"]
    lines += [f"{t},{m}" for t, m in zip(ts, run.ledger.curve.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def _write_curves(path, config, results):
    ts = _recorded_ts(config.T, config.curve_stride)
    cols = []
    for pol in config.policies:
        curves = np.stack([r.ledger.curve for r in results[pol]])
        cols.append(curves.mean(axis=0))
    lines = ["t," + ",".join(config.policies)]
    for i, t in enumerate(ts):
        lines.append(f"{t}," + ",".join(_fmt(c[i]) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_auc(path, config, results):
    rows = {
        "auc_mean": [],
        "auc_std": [],
        "final_mean": [],
        "final_std": [],
    }
    for pol in config.policies:
        aucs = np.array([r.ledger.auc_sum / r.T for r in results[pol]])
        finals = np.array([r.ledger.matches for r in results[pol]], dtype=float)
        rows["auc_mean"].append(aucs.mean())
        rows["auc_std"].append(aucs.std())
        rows["final_mean"].append(finals.mean())
        rows["final_std"].append(finals.std())
    lines = ["metric," + ",".join(config.policies)]
    for metric, vals in rows.items():
        lines.append(metric + "," + ",".join(_fmt(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_yardstick(path, config, results, mstar, mg):
    lines = ["seed,m_star," + ",".join(f"{p}_final" for p in config.policies)]
    for i, seed in enumerate(config.seeds):
        finals = [results[p][i].ledger.matches for p in config.policies]
        lines.append(f"{seed},{mstar[seed]}," + ",".join(str(f) for f in finals))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_stats(path, config, results, diags, prefs):
    lines = ["policy,seed,final_matches,auc,c_g,c_b,bound_ok"]
    bound_cache: dict[int, tuple[int, int]] = {}
    for pol in config.policies:
        for run in results[pol]:
            d = diags[(pol, run.seed)]
            c_g = d.get("c_g", "")
            c_b = d.get("c_b", "")
            bound_ok = ""
            s_prime = d.get("S_prime")
            if c_g != "" and s_prime:
                if s_prime not in bound_cache:
                    bound_cache[s_prime] = (
                        cluster_bound(prefs, "girl", s_prime),
                        cluster_bound(prefs, "boy", s_prime),
                    )
                bg, bb = bound_cache[s_prime]
                bound_ok = "1" if (c_g <= bg and c_b <= bb) else "0"
            auc = run.ledger.auc_sum / run.T
            lines.append(
                f"{pol},{run.seed},{run.ledger.matches},{_fmt(auc)},{c_g},{c_b},{bound_ok}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _write_manifest(path, config, prefs, mg):
    lines = [
        f"tool=matchlab {__version__}",
        f"instance={config.instance}",
        f"n={prefs.n}",
        f"matches={mg.match_count}",
        f"policies={','.join(config.policies)}",
        f"T={config.T}",
        f"seeds={','.join(str(s) for s in config.seeds)}",
        f"threads={config.threads}",
        f"curve_stride={config.curve_stride}",
    ]
    for pol, params in sorted(config.policy_params.items()):
        for k, v in sorted(params.items()):
            lines.append(f"{pol}.{k}={v}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- traces


def write_trace(path, trace: RoundTrace) -> None:
    lines = ["t,boy_arrival,girl_selected,sign_bg,girl_arrival,boy_selected,sign_gb"]
    for i in range(len(trace)):
        lines.append(
            f"{i + 1},{trace.boy_arrivals[i]},{trace.girls_selected[i]},"
            f"{trace.signs_bg[i]},{trace.girl_arrivals[i]},{trace.boys_selected[i]},"
            f"{trace.signs_gb[i]}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> RoundTrace:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "t,boy_arrival,girl_selected,sign_bg,girl_arrival,boy_selected,sign_gb":
        raise InputError(f"{path}: not a trace file")
    rows = [line.split(",") for line in lines[1:] if line]
    arr = np.array([[int(x) for x in row] for row in rows], dtype=np.int64)
    return RoundTrace(
        arr[:, 1].astype(np.int32),
        arr[:, 2].astype(np.int32),
        arr[:, 3].astype(np.int8),
        arr[:, 4].astype(np.int32),
        arr[:, 5].astype(np.int32),
        arr[:, 6].astype(np.int8),
    )


# ---------------------------------------------------------------- other commands


def cmd_gen(args) -> int:
    seed = args.seed
    if args.kind == "clustered":
        spec = ClusteredSpec(
            n=args.n,
            c_b=args.c_b,
            c_g=args.c_g,
            p_like=args.p_like,
            flip=args.flip,
            seed=seed,
            balanced=not args.uniform_partition,
            pair_level_coins=args.pair_coins,
        )
        prefs = gen_clustered(spec)
        desc = (
            f"gen kind=clustered n={args.n} c_b={args.c_b} c_g={args.c_g} "
            f"p_like={args.p_like} flip={spec.resolved_flip:.6f} "
            f"balanced={int(spec.balanced)} pair_coins={int(spec.pair_level_coins)} seed={seed}"
        )
    elif args.kind == "adversarial":
        prefs = gen_adversarial_random(args.n, args.m, seed)
        desc = f"gen kind=adversarial n={args.n} m={args.m} seed={seed}"
    elif args.kind == "block":
        prefs = gen_block_lowerbound(args.n, args.d, args.m, seed)
        desc = f"gen kind=block n={args.n} d={args.d} m={args.m} seed={seed}"
    else:
        _, prefs = gen_random_bipartite(args.n, args.p, seed)
        desc = f"gen kind=bipartite n={args.n} p={args.p} seed={seed}"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_instance(prefs, out)
    Path(str(out) + ".manifest").write_text(desc + "\n")
    print(desc)
    return 0


def cmd_cover(args) -> int:
    prefs = _load_instance(args.instance)
    radii = (
        [int(r) for r in args.radii.split(",")] if args.radii else table_radii(prefs.n)
    )
    lines = ["radius,boys_cover,girls_cover"]
    for rho in radii:
        cb = boy_side_covering(prefs, rho, shuffle_seed=args.seed).size
        cg = girl_side_covering(prefs, rho, shuffle_seed=args.seed).size
        lines.append(f"{rho},{cb},{cg}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def cmd_yardstick(args) -> int:
    prefs = _load_instance(args.instance)
    trace = read_trace(args.trace)
    mg = build_matching_graph(prefs)
    counts = arrival_counts(trace)
    if len(counts.boy_counts) > prefs.n:
        raise InputError("trace mentions users outside the instance")
    counts = ArrivalCounts(
        counts.boy_counts + (0,) * (prefs.n - len(counts.boy_counts)),
        counts.girl_counts + (0,) * (prefs.n - len(counts.girl_counts)),
    )
    mstar = optimal_matches(mg, counts)
    delta = delta_overload(mg, counts.T)
    print(f"M*_T={mstar}")
    print(f"delta={float(delta):.6f}")
    return 0


def cmd_ingest(args) -> int:
    raw = parse_ratings(args.ratings, args.genders)
    if not raw.triples:
        raise InputError("no usable cross-gender ratings found")
    prefs, report = densify(binarize(raw), args.coeff, args.count_mode)
    write_instance(prefs, args.out)
    lines = [
        f"coefficient={report.coefficient}",
        f"count_mode={report.count_mode}",
        f"removals={len(report.removals)}",
        f"final_boys={report.final_boys}",
        f"final_girls={report.final_girls}",
        f"likes={report.like_count}",
        f"matches={report.match_count}",
        f"phantoms={report.phantoms}",
        f"n={report.n}",
    ]
    lines += [f"removed={uid},{gender},{cnt}" for uid, gender, cnt in report.removals]
    Path(args.report).write_text("\n".join(lines) + "\n")
    print(f"ingested: |B|={report.final_boys} |G|={report.final_girls} likes={report.like_count}")
    return 0


def cmd_report(args) -> int:
    rd = Path(args.run_dir)
    for name in ("manifest.txt", "auc.csv", "yardstick.csv", "stats.csv"):
        if not (rd / name).exists():
            raise InputError(f"missing run artifact: {rd / name}")
    manifest = dict(
        line.split("=", 1) for line in (rd / "manifest.txt").read_text().splitlines() if "=" in line
    )
    auc_lines = (rd / "auc.csv").read_text().splitlines()
    policies = auc_lines[0].split(",")[1:]
    metrics = {row.split(",")[0]: row.split(",")[1:] for row in auc_lines[1:]}
    ys = [line.split(",") for line in (rd / "yardstick.csv").read_text().splitlines()[1:]]
    mstars = [int(row[1]) for row in ys]
    total_matches = int(manifest.get("matches", "0"))

    print(f"run {rd}: instance {manifest.get('instance')} n={manifest.get('n')} "
          f"M={total_matches} T={manifest.get('T')} seeds={manifest.get('seeds')}")
    print(f"mean M*_T over seeds: {sum(mstars) / len(mstars):.1f}")
    for i, pol in enumerate(policies):
        final = float(metrics["final_mean"][i])
        auc = float(metrics["auc_mean"][i])
        frac = final / total_matches if total_matches else float("nan")
        print(f"  {pol}: final={final:.1f} ({frac:.1%} of M) auc={auc:.1f}")
    stats_lines = (rd / "stats.csv").read_text().splitlines()[1:]
    for line in stats_lines:
        pol, seed, final, auc, c_g, c_b, bound_ok = line.split(",")
        if c_g:
            status = {"1": "ok", "0": "EXCEEDED", "": "n/a"}[bound_ok]
            print(f"  {pol} seed {seed}: C^G={c_g} C^B={c_b} representative bound: {status}")
    return 0


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matchlab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"matchlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("kind", choices=["clustered", "adversarial", "block", "bipartite"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--c-b", type=int, default=10)
    g.add_argument("--c-g", type=int, default=10)
    g.add_argument("--p-like", type=float, default=0.2)
    g.add_argument("--flip", type=float, default=None)
    g.add_argument("--uniform-partition", action="store_true")
    g.add_argument("--pair-coins", action="store_true")
    g.add_argument("--m", type=int, default=0)
    g.add_argument("--d", type=int, default=1)
    g.add_argument("--p", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    c = sub.add_parser("cover", help="greedy covering sizes per radius")
    c.add_argument("instance")
    c.add_argument("--radii", default=None, help="comma list; default 2n/ln n, n/ln n, n/(2 ln n)")
    c.add_argument("--seed", type=int, default=None, help="shuffle column order")
    c.add_argument("--out", default=None)

    r = sub.add_parser("run", help="run a policy comparison from a config file")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="override the config's output directory")
    r.add_argument("--threads", type=int, default=None, help="override the config's worker count")

    y = sub.add_parser("yardstick", help="trace-optimal matches for a saved trace")
    y.add_argument("instance")
    y.add_argument("trace")

    i = sub.add_parser("ingest", help="binarize + densify a ratings dataset")
    i.add_argument("--ratings", required=True)
    i.add_argument("--genders", required=True)
    i.add_argument("--coeff", type=float, default=2.0)
    i.add_argument("--count-mode", choices=["both", "given", "received"], default="both")
    i.add_argument("--out", required=True)
    i.add_argument("--report", required=True)

    p = sub.add_parser("report", help="summarize a finished run directory")
    p.add_argument("run_dir")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "cover":
            return cmd_cover(args)
        if args.command == "run":
            config = parse_config(args.config)
            if args.out:
                config.out = Path(args.out)
            if args.threads:
                config.threads = args.threads
            return cmd_run(config)
        if args.command == "yardstick":
            return cmd_yardstick(args)
        if args.command == "ingest":
            return cmd_ingest(args)
        if args.command == "report":
            return cmd_report(args)
        raise InputError(f"unknown command {args.command!r}")
    except InternalCheckError as e:
        print(f"internal check failed: {e}", file=sys.stderr)
        return 3
    except MatchlabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
