"""Batch experiment driver.

Subcommands: generate, sample, temper, oracle, benchmark. Each takes a JSON
config (--config), an optional master-seed override (--seed), and an output
directory (--out, overriding the config's "out"). Every run writes a
resolved_config.json echoing all defaulted fields, so it can be re-run
exactly. Exit codes: 0 success, 2 config error, 3 compatibility error,
4 oracle-size error.

Chain-level parallelism is capped by the POTTSMC_THREADS environment variable
(default: available cores); results are bit-identical regardless of thread
count because every chain owns its own stream.

Stream-id layout for a master seed: 0 generates the coupling; sample/benchmark
chains use 1 + combo_index * chains + chain_index; tempered run c uses
1 + c * (T + 1) + t for replica t and 1 + c * (T + 1) + T for its exchange
coin stream.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .coupling import (
    LatticeScale,
    curie_weiss,
    erdos_renyi,
    hopfield,
    lattice_2d,
    load_coupling,
    precompute_lowrank,
    save_coupling,
    sk,
)
from .diagnostics import BENCHMARK_COLUMNS, benchmark_csv_row, diagnostics_report
from .errors import (
    ConfigError,
    DegenerateGraph,
    NegativeCoupling,
    PottsError,
    TooLarge,
    WrongStateCount,
)
from .model import PottsModel, exact_summary, lemma1_certificate
from .numerics import DEFAULT_EPSILON, DEFAULT_JITTER, RngStream, sym_eigen
from .samplers import (
    BondConvention,
    SamplerKind,
    check_compatibility,
    run_chain,
    write_trace,
)
from .tempering import TemperingLadder, tempered_run

THREADS_ENV = "POTTSMC_THREADS"
STREAM_COUPLING = 0

_FAMILY_BUILDERS = ("lattice2d", "curie_weiss", "erdos_renyi", "sk", "hopfield", "file")


def _thread_count():
    raw = os.environ.get(THREADS_ENV, "")
    if raw:
        try:
            v = int(raw)
        except ValueError:
            raise ConfigError("%s must be an integer, got %r" % (THREADS_ENV, raw))
        if v < 1:
            raise ConfigError("%s must be >= 1" % THREADS_ENV)
        return v
    return os.cpu_count() or 1


def _req(cfg, path, types, what=""):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError("missing required field %r%s" % (path, what))
        node = node[part]
    if types is not None and not isinstance(node, types):
        raise ConfigError("field %r has wrong type: expected %s" % (path, types))
    return node


def _opt(cfg, path, default):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _resolve_coupling(model_cfg, master_seed):
    family = str(_req({"model": model_cfg}, "model.family", str)).lower()
    stream = RngStream(master_seed, STREAM_COUPLING)
    if family == "lattice2d":
        side = int(_req({"model": model_cfg}, "model.side", (int,)))
        scale = _opt(model_cfg, "scale", None)
        scale = LatticeScale.NONE if scale in (None, "None") else LatticeScale(scale)
        return lattice_2d(side, scale), {"family": "lattice2d", "side": side,
                                         "scale": scale.value}
    if family == "curie_weiss":
        n = int(_req({"model": model_cfg}, "model.n", (int,)))
        return curie_weiss(n), {"family": "curie_weiss", "n": n}
    if family == "erdos_renyi":
        n = int(_req({"model": model_cfg}, "model.n", (int,)))
        p = float(_req({"model": model_cfg}, "model.p", (int, float)))
        return erdos_renyi(n, p, stream), {"family": "erdos_renyi", "n": n, "p": p}
    if family == "sk":
        n = int(_req({"model": model_cfg}, "model.n", (int,)))
        return sk(n, stream), {"family": "sk", "n": n}
    if family == "hopfield":
        n = int(_req({"model": model_cfg}, "model.n", (int,)))
        d = int(_req({"model": model_cfg}, "model.d", (int,)))
        return hopfield(n, d, stream), {"family": "hopfield", "n": n, "d": d}
    if family == "file":
        path = _req({"model": model_cfg}, "model.coupling_file", str)
        try:
            return load_coupling(path), {"family": "file", "coupling_file": str(path)}
        except OSError as exc:
            raise ConfigError("model.coupling_file: %s" % exc)
    raise ConfigError("model.family must be one of %s, got %r" % (_FAMILY_BUILDERS, family))


def _resolve_betas(model_cfg):
    if "betas" in model_cfg:
        betas = model_cfg["betas"]
        if not isinstance(betas, list) or not betas:
            raise ConfigError("model.betas must be a non-empty list")
        return [float(b) for b in betas]
    if "beta" in model_cfg:
        return [float(model_cfg["beta"])]
    raise ConfigError("missing required field 'model.beta' (or 'model.betas')")


def _sampler_cfg(cfg):
    s = _opt(cfg, "sampler", {})
    resolved = {
        "kind": str(_req(cfg, "sampler.kind", str)),
        "m": int(_opt(s, "m", 10000)),
        "burn_in": int(_opt(s, "burn_in", 1000)),
        "chains": int(_opt(s, "chains", 4)),
        "epsilon": float(_opt(s, "epsilon", DEFAULT_EPSILON)),
        "jitter": float(_opt(s, "jitter", DEFAULT_JITTER)),
        "bond_convention": str(_opt(s, "bond_convention", BondConvention.INDICATOR.value)),
        "init": str(_opt(s, "init", "random")),
    }
    try:
        SamplerKind(resolved["kind"])
        BondConvention(resolved["bond_convention"])
    except ValueError as exc:
        raise ConfigError("sampler block: %s" % exc)
    if not 0 <= resolved["burn_in"] < resolved["m"]:
        raise ConfigError("sampler.burn_in must satisfy 0 <= burn_in < m")
    if resolved["chains"] < 1:
        raise ConfigError("sampler.chains must be >= 1")
    return resolved


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _echo_config(out_dir, command, resolved):
    _write_json(Path(out_dir) / "resolved_config.json",
                {"command": command, **resolved})


def _run_chains(kind, model, scfg, master_seed, first_stream_id):
    """Run the configured number of chains, possibly in parallel threads."""
    chains = scfg["chains"]
    streams = [RngStream(master_seed, first_stream_id + c) for c in range(chains)]

    def one(c):
        return run_chain(SamplerKind(scfg["kind"]), model, scfg["init"], scfg["m"],
                         scfg["burn_in"], streams[c], epsilon=scfg["epsilon"],
                         bond_convention=scfg["bond_convention"], jitter=scfg["jitter"])

    workers = min(_thread_count(), chains)
    if workers <= 1 or chains == 1:
        return [one(c) for c in range(chains)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(chains)))


def _diag_payload(report, family_info, beta, q, n, kind):
    return {
        "sampler": kind,
        "model": {**family_info, "beta": beta, "q": q, "n": n},
        **report.to_dict(),
    }


# ------------------------------------------------------------- subcommands

def cmd_generate(cfg, out_dir, master_seed):
    model_cfg = _req(cfg, "model", dict)
    coupling, family_info = _resolve_coupling(model_cfg, master_seed)
    epsilon = float(_opt(cfg, "sampler.epsilon", DEFAULT_EPSILON))
    path = Path(out_dir) / "coupling.csv"
    save_coupling(coupling, path)
    dec = sym_eigen(coupling.entries)
    k = precompute_lowrank(coupling, 1.0, epsilon).k
    print("coupling written: %s" % path)
    print("lambda_max=%.9g lambda_min=%.9g k(epsilon=%.3g)=%d"
          % (dec.eigenvalues[0], dec.eigenvalues[-1], epsilon, k))
    _echo_config(out_dir, "generate", {
        "model": family_info, "seed": master_seed, "out": str(out_dir),
        "sampler": {"epsilon": epsilon},
    })
    return 0


def cmd_sample(cfg, out_dir, master_seed):
    model_cfg = _req(cfg, "model", dict)
    coupling, family_info = _resolve_coupling(model_cfg, master_seed)
    q = int(_req(cfg, "model.q", int))
    betas = _resolve_betas(model_cfg)
    scfg = _sampler_cfg(cfg)
    kind = SamplerKind(scfg["kind"])
    for beta in betas:
        check_compatibility(kind, PottsModel(coupling, beta, q))
    out_dir = Path(out_dir)
    bench_rows = []
    for b_idx, beta in enumerate(betas):
        model = PottsModel(coupling, beta, q)
        sub = out_dir if len(betas) == 1 else out_dir / ("beta_%s" % format(beta, "g"))
        sub.mkdir(parents=True, exist_ok=True)
        traces = _run_chains(kind, model, scfg, master_seed,
                             first_stream_id=1 + b_idx * scfg["chains"])
        for c, trace in enumerate(traces):
            write_trace(trace, sub / ("chain_%02d.csv" % (c + 1)))
        report = diagnostics_report(traces)
        payload = _diag_payload(report, family_info, beta, q, model.n, kind.value)
        flagged = report.rhat is not None and report.rhat > 1.2
        payload["rhat_above_1.2"] = bool(flagged)
        _write_json(sub / "diagnostics.json", payload)
        bench_rows.append(benchmark_csv_row(report, kind.value,
                                            family_info["family"], beta, q, model.n))
        print("beta=%s: %d chains written to %s%s"
              % (format(beta, "g"), scfg["chains"], sub,
                 "  [flagged: rhat > 1.2]" if flagged else ""))
    with open(out_dir / "benchmark.csv", "w") as fh:
        fh.write(",".join(BENCHMARK_COLUMNS) + "\n")
        fh.write("\n".join(bench_rows) + "\n")
    _echo_config(out_dir, "sample", {
        "model": {**family_info, "q": q, "betas": betas},
        "sampler": scfg, "seed": master_seed, "out": str(out_dir),
    })
    return 0


def cmd_temper(cfg, out_dir, master_seed):
    model_cfg = _req(cfg, "model", dict)
    coupling, family_info = _resolve_coupling(model_cfg, master_seed)
    q = int(_req(cfg, "model.q", int))
    tcfg = _req(cfg, "tempering", dict)
    betas = _req(cfg, "tempering.betas", list)
    n_ex = int(_opt(tcfg, "n_ex", 40))
    n_mc = int(_opt(tcfg, "n_mc", 1000))
    burn_fraction = float(_opt(tcfg, "burn_in_fraction", 0.1))
    scfg = _sampler_cfg(cfg)
    kind = SamplerKind(scfg["kind"])
    try:
        ladder = TemperingLadder(np.asarray(betas, dtype=float))
    except ValueError as exc:
        raise ConfigError("tempering.betas: %s" % exc)
    cold_beta = float(ladder.betas[-1])
    model = PottsModel(coupling, cold_beta, q)
    check_compatibility(kind, model)
    out_dir = Path(out_dir)
    T = ladder.T
    cold_traces = []
    for c in range(scfg["chains"]):
        base = 1 + c * (T + 1)
        replica_streams = [RngStream(master_seed, base + t) for t in range(T)]
        exchange_stream = RngStream(master_seed, base + T)
        traces, stats = tempered_run(
            kind, model, ladder, n_ex, n_mc, replica_streams, exchange_stream,
            burn_in_fraction=burn_fraction, epsilon=scfg["epsilon"],
            bond_convention=scfg["bond_convention"], init=scfg["init"])
        run_dir = out_dir / ("run_%02d" % (c + 1))
        run_dir.mkdir(parents=True, exist_ok=True)
        for t, trace in enumerate(traces):
            write_trace(trace, run_dir / ("replica_%02d.csv" % (t + 1)))
        _write_json(run_dir / "exchange_stats.json", stats.to_dict())
        cold_traces.append(traces[-1])
    report = diagnostics_report(cold_traces)
    payload = _diag_payload(report, family_info, cold_beta, q, model.n, kind.value)
    payload["ladder"] = [float(b) for b in ladder.betas]
    _write_json(out_dir / "diagnostics.json", payload)
    with open(out_dir / "benchmark.csv", "w") as fh:
        fh.write(",".join(BENCHMARK_COLUMNS) + "\n")
        fh.write(benchmark_csv_row(report, kind.value, family_info["family"],
                                   cold_beta, q, model.n) + "\n")
    print("tempered: %d runs x %d replicas, cold beta=%s, outputs in %s"
          % (scfg["chains"], T, format(cold_beta, "g"), out_dir))
    _echo_config(out_dir, "temper", {
        "model": {**family_info, "q": q},
        "sampler": scfg,
        "tempering": {"betas": [float(b) for b in ladder.betas], "n_ex": n_ex,
                      "n_mc": n_mc, "burn_in_fraction": burn_fraction},
        "seed": master_seed, "out": str(out_dir),
    })
    return 0


def cmd_oracle(cfg, out_dir, master_seed):
    model_cfg = _req(cfg, "model", dict)
    coupling, family_info = _resolve_coupling(model_cfg, master_seed)
    q = int(_req(cfg, "model.q", int))
    beta = float(_req(cfg, "model.beta", (int, float)))
    want_pmf = bool(_opt(cfg, "oracle.want_pmf", False))
    epsilon = _opt(cfg, "oracle.epsilon", None)
    model = PottsModel(coupling, beta, q)
    summary = exact_summary(model, want_pmf=want_pmf)
    payload = {
        "model": {**family_info, "beta": beta, "q": q, "n": model.n},
        "log_partition": summary.log_partition,
        "mean_phi": summary.mean_phi,
    }
    if want_pmf:
        payload["pmf"] = [float(p) for p in summary.pmf]
    if epsilon is not None:
        payload["certificate"] = lemma1_certificate(model, float(epsilon)).to_dict()
    _write_json(Path(out_dir) / "oracle.json", payload)
    print("oracle: log_partition=%.12g mean_phi=%.12g" %
          (summary.log_partition, summary.mean_phi))
    _echo_config(out_dir, "oracle", {
        "model": {**family_info, "beta": beta, "q": q},
        "oracle": {"want_pmf": want_pmf, "epsilon": epsilon},
        "seed": master_seed, "out": str(out_dir),
    })
    return 0


def cmd_benchmark(cfg, out_dir, master_seed):
    model_cfg = _req(cfg, "model", dict)
    coupling, family_info = _resolve_coupling(model_cfg, master_seed)
    q = int(_req(cfg, "model.q", int))
    betas = _resolve_betas(model_cfg)
    kinds = _req(cfg, "benchmark.samplers", list)
    try:
        kinds = [SamplerKind(k) for k in kinds]
    except ValueError as exc:
        raise ConfigError("benchmark.samplers: %s" % exc)
    if not kinds:
        raise ConfigError("benchmark.samplers must be non-empty")
    scfg = dict(_sampler_cfg({"sampler": {"kind": kinds[0].value,
                                          **_opt(cfg, "sampler", {})}}))
    combos = sorted((k.value, b) for k in kinds for b in betas)
    rows = []
    for idx, (kind_name, beta) in enumerate(combos):
        model = PottsModel(coupling, beta, q)
        combo_cfg = {**scfg, "kind": kind_name}
        try:
            check_compatibility(SamplerKind(kind_name), model)
            traces = _run_chains(SamplerKind(kind_name), model, combo_cfg, master_seed,
                                 first_stream_id=1 + idx * scfg["chains"])
            report = diagnostics_report(traces)
            row = benchmark_csv_row(report, kind_name, family_info["family"],
                                    beta, q, model.n) + ",ok"
        except PottsError as exc:
            row = ",".join([kind_name, family_info["family"], format(beta, ".9g"),
                            str(q), str(model.n)] + ["nan"] * 6)
            row += ",error:%s" % type(exc).__name__
        rows.append(row)
    out_path = Path(out_dir) / "benchmark.csv"
    with open(out_path, "w") as fh:
        fh.write(",".join(BENCHMARK_COLUMNS) + ",status\n")
        fh.write("\n".join(rows) + "\n")
    print("benchmark table: %s (%d rows)" % (out_path, len(rows)))
    _echo_config(out_dir, "benchmark", {
        "model": {**family_info, "q": q, "betas": betas},
        "benchmark": {"samplers": [k.value for k in kinds]},
        "sampler": scfg, "seed": master_seed, "out": str(out_dir),
    })
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "sample": cmd_sample,
    "temper": cmd_temper,
    "oracle": cmd_oracle,
    "benchmark": cmd_benchmark,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pottsmc",
        description="Potts/Ising sampling experiments from declarative JSON configs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed override (u64)")
        p.add_argument("--out", default=None, help="output directory override")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config: %s" % exc)
        except json.JSONDecodeError as exc:
            raise ConfigError("config is not valid JSON: %s" % exc)
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
        master_seed = args.seed if args.seed is not None else _opt(cfg, "seed", 0)
        if not isinstance(master_seed, int) or master_seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        out_dir = args.out if args.out is not None else _opt(cfg, "out", None)
        if out_dir is None:
            raise ConfigError("missing required field 'out' (or pass --out)")
        os.makedirs(out_dir, exist_ok=True)
        try:
            return _COMMANDS[args.command](cfg, out_dir, master_seed)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc))
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except (NegativeCoupling, WrongStateCount, DegenerateGraph) as exc:
        print("compatibility error: %s" % exc, file=sys.stderr)
        return 3
    except TooLarge as exc:
        print("oracle size error: %s" % exc, file=sys.stderr)
        return 4


def entry():  # console-script target
    sys.exit(main())


if __name__ == "__main__":
    entry()
