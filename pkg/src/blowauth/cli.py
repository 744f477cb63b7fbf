"""Command-line front end: preprocess, simmatrix, evaluate, synth.

All logging (progress, timings, warnings) goes to stderr; data artifacts
are written to files only, so outputs stay machine-diffable.  Every
subcommand accepts ``--manifest run.json`` supplying parameter values
(explicit flags win); the JSON holds ``{"subcommand": ..., "params":
{flag_name: value, ...}}`` or just the flat parameter object.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .dataset import (
    Dataset,
    MODES,
    SessionRecord,
    load_sessions_csv,
    save_matrix,
    save_sessions_csv,
    save_thresholds,
    synth_dataset,
)
from .evaluation import CHANNELS, render_report_text, run_protocol, save_report
from .face import load_embeddings, synth_embeddings, write_embeddings
from .fusion import DecisionConfig
from .kernels import KERNEL_KINDS, KernelConfig, ShapeletConfig, pairwise_matrix
from .signal_prep import PreprocessConfig, preprocess_session, read_samples_csv, read_wav

_DEFAULTS: dict[str, dict] = {
    "preprocess": {
        "inputs": [],
        "out": None,
        "rate": 48000.0,
        "window": 960,
        "sma": 8,
    },
    "simmatrix": {
        "dataset": None,
        "out": None,
        "kernel": "dtw",
        "value_kind": None,
        "band": None,
        "descriptor_len": 9,
        "no_derivative": False,
        "shapelet_window": 5,
        "nu": 0.001,
        "lam": 1.0,
    },
    "evaluate": {
        "dataset": None,
        "embeddings": None,
        "out_dir": None,
        "kernel": "dtw",
        "channel": "blow",
        "mode": "both",
        "k": 1,
        "q": None,
        "weights": "0.5,0.5",
        "aggregate": "mean",
        "value_kind": None,
        "export_thresholds": False,
    },
    "synth": {
        "out_dir": None,
        "users": 10,
        "sessions": 10,
        "length": 250,
        "time_jitter": 2.0,
        "amp_jitter": 0.1,
        "noise": 0.0,
        "face_sigma": 0.05,
        "seed": 0,
    },
}


@dataclass(frozen=True)
class RunManifest:
    """A subcommand plus the fully-resolved parameters of one run."""

    subcommand: str
    params: dict

    @classmethod
    def load(cls, path: str, subcommand: str) -> "RunManifest":
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: manifest must be a JSON object")
        declared = raw.get("subcommand")
        if declared is not None and declared != subcommand:
            raise ValueError(
                f"{path}: manifest is for {declared!r}, but {subcommand!r} was invoked"
            )
        params = raw.get("params", {k: v for k, v in raw.items() if k != "subcommand"})
        if not isinstance(params, dict):
            raise ValueError(f"{path}: manifest params must be a JSON object")
        known = _DEFAULTS[subcommand]
        unknown = sorted(set(params) - set(known))
        if unknown:
            raise ValueError(
                f"{path}: unknown parameters {unknown}; valid: {sorted(known)}"
            )
        return cls(subcommand, params)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_params(cmd: str, args: argparse.Namespace) -> dict:
    """defaults <- manifest <- explicit flags."""
    ns = {k: v for k, v in vars(args).items() if k not in ("cmd", "manifest")}
    params = dict(_DEFAULTS[cmd])
    manifest_path = getattr(args, "manifest", None)
    if manifest_path:
        params.update(RunManifest.load(manifest_path, cmd).params)
    if ns.get("inputs") == []:
        ns.pop("inputs")  # an absent positional must not mask manifest inputs
    params.update(ns)
    return params


def _require(params: dict, names: list[str]) -> None:
    missing = [n for n in names if params.get(n) in (None, [])]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValueError(f"missing required argument(s): {flags}")


def _check_inputs_exist(paths: list[str]) -> None:
    missing = [p for p in paths if p and not Path(p).exists()]
    if missing:
        raise ValueError(f"input path(s) do not exist: {missing}")


def _parse_list(value, valid: tuple[str, ...], what: str) -> list[str]:
    items = value if isinstance(value, list) else str(value).split(",")
    items = [str(s).strip() for s in items if str(s).strip()]
    if not items:
        raise ValueError(f"no {what} given")
    bad = [s for s in items if s not in valid]
    if bad:
        raise ValueError(f"invalid {what} {bad}; choose from {valid}")
    return items


def _parse_int_list(value) -> list[int]:
    if value is None:
        return []
    items = value if isinstance(value, list) else str(value).split(",")
    return [int(s) for s in items]


def _parse_weights(value) -> tuple[float, float]:
    parts = value if isinstance(value, list) else str(value).split(",")
    if len(parts) != 2:
        raise ValueError(f"weights need exactly two values, got {value!r}")
    return float(parts[0]), float(parts[1])


# ---------------------------------------------------------------------------
# subcommands


def _expand_inputs(inputs: list[str]) -> list[Path]:
    files: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(x for x in p.iterdir() if x.suffix in (".wav", ".csv"))
            if not found:
                raise ValueError(f"input directory {p} contains no .wav or .csv files")
            files.extend(found)
        else:
            files.append(p)
    return files


def _session_fields_from_stem(stem: str) -> tuple[str, str, str]:
    parts = stem.split("_")
    if len(parts) != 3 or parts[2] not in MODES:
        raise ValueError(
            f"file stem {stem!r} must look like <user>_<session>_<sit|stand>"
        )
    return parts[0], parts[1], parts[2]


def cmd_preprocess(params: dict) -> int:
    _require(params, ["inputs", "out"])
    _check_inputs_exist(list(params["inputs"]))
    cfg = PreprocessConfig(
        sample_rate=float(params["rate"]),
        window_size=int(params["window"]),
        sma_window=int(params["sma"]),
    )
    files = _expand_inputs(list(params["inputs"]))
    records: list[SessionRecord] = []
    failures = 0
    for f in files:
        try:
            user, session, mode = _session_fields_from_stem(f.stem)
            audio = read_wav(f) if f.suffix == ".wav" else read_samples_csv(f, cfg.sample_rate)
            series = preprocess_session(audio, cfg)
            records.append(SessionRecord(user, session, mode, series))
            _log(f"{f.name}: {len(series)} points")
        except ValueError as e:
            failures += 1
            _log(f"error: {f}: {e}")
    if records:
        save_sessions_csv(Dataset(tuple(records), "raw-audio", cfg), params["out"])
        _log(f"wrote {len(records)} sessions to {params['out']}")
    if failures:
        _log(f"{failures} input(s) failed")
        return 1
    return 0


def _kernel_from_params(kind: str, params: dict) -> KernelConfig:
    band = params.get("band")
    return KernelConfig(
        kind=kind,
        band=None if band is None else int(band),
        descriptor_len=int(params.get("descriptor_len", 9)),
        include_derivative=not params.get("no_derivative", False),
        shapelets=ShapeletConfig(window=int(params.get("shapelet_window", 5))),
        nu=float(params.get("nu", 0.001)),
        lam=float(params.get("lam", 1.0)),
    )


def cmd_simmatrix(params: dict) -> int:
    _require(params, ["dataset", "out"])
    _check_inputs_exist([params["dataset"]])
    kinds = _parse_list(params["kernel"], KERNEL_KINDS, "kernel")
    if len(kinds) != 1:
        raise ValueError("simmatrix takes exactly one kernel")
    kernel = _kernel_from_params(kinds[0], params)
    dataset = load_sessions_csv(params["dataset"], value_kind=params.get("value_kind"))
    start = time.perf_counter()
    matrix = pairwise_matrix(
        [r.series for r in dataset.records],
        kernel,
        ids=[r.key for r in dataset.records],
    )
    elapsed = time.perf_counter() - start
    save_matrix(matrix, params["out"])
    _log(
        f"{len(dataset)}x{len(dataset)} {kernel.kind} matrix in {elapsed:.2f} s "
        f"-> {params['out']}"
    )
    return 0


def cmd_evaluate(params: dict) -> int:
    _require(params, ["dataset", "out_dir"])
    _check_inputs_exist([params["dataset"], params.get("embeddings")])
    channels = _parse_list(params["channel"], CHANNELS, "channel")
    kinds = _parse_list(params["kernel"], KERNEL_KINDS, "kernel")
    modes = _parse_list(params["mode"], MODES + ("both",), "mode")
    k = int(params["k"])
    q_list = _parse_int_list(params.get("q"))
    weights = _parse_weights(params["weights"])
    aggregate = str(params["aggregate"])

    dataset = load_sessions_csv(params["dataset"], value_kind=params.get("value_kind"))
    if params.get("embeddings"):
        dataset = dataset.with_embeddings(load_embeddings(params["embeddings"]))
    elif any(c in ("face", "fused") for c in channels):
        raise ValueError("face/fused channels need --embeddings")

    # validate every requested cell before any kernel work
    qs_by_mode: dict[str, list[int]] = {}
    for mode in modes:
        n = dataset.filter_mode(mode).uniform_session_count()
        qs = q_list if q_list else [n]
        for q in qs:
            if not 1 <= q <= n:
                raise ValueError(
                    f"q = {q} invalid for mode {mode!r} with {n} sessions per user"
                )
        if k > n - 1:
            raise ValueError(f"k = {k} too large for mode {mode!r} ({n} sessions per user)")
        qs_by_mode[mode] = qs

    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    thresholds_written = 0
    start = time.perf_counter()
    for channel in channels:
        for kind in kinds if channel != "face" else ["-"]:
            kernel = _kernel_from_params(kind if kind != "-" else "dtw", params)
            blow = None
            if channel in ("blow", "fused"):
                blow = pairwise_matrix(
                    [r.series for r in dataset.records],
                    kernel,
                    ids=[r.key for r in dataset.records],
                )
            for mode in modes:
                for q in qs_by_mode[mode]:
                    config = DecisionConfig(
                        kernel=kernel, k=k, q=q, weights=weights, aggregate=aggregate
                    )
                    result = run_protocol(dataset, config, mode, channel, blow_matrix=blow)
                    rows.append(result.row)
                    _log(
                        f"{result.row.method}/{mode}/k={k}/q={q}: "
                        f"EER {result.row.eer:.4f} acc {result.row.accuracy:.4f} "
                        f"FAR {result.row.far:.4f} FRR {result.row.frr:.4f}"
                    )
                    if params.get("export_thresholds"):
                        name = f"thresholds_{result.row.method}_{mode}_q{q}.csv"
                        save_thresholds(list(result.thresholds), out_dir / name)
                        thresholds_written += 1
    save_report(rows, out_dir / "report.csv")
    with open(out_dir / "report.txt", "w", newline="") as fh:
        fh.write(render_report_text(rows))
    elapsed = time.perf_counter() - start
    _log(
        f"wrote {len(rows)}-row report to {out_dir / 'report.csv'} in {elapsed:.2f} s"
        + (f" (+{thresholds_written} threshold files)" if thresholds_written else "")
    )
    return 0


def cmd_synth(params: dict) -> int:
    _require(params, ["out_dir"])
    time_jitter = float(params["time_jitter"])
    amp_jitter = float(params["amp_jitter"])
    noise = float(params["noise"])
    if time_jitter == 0 and amp_jitter == 0 and noise == 0:
        _log("warning: all jitter is zero; every session of a user will be identical")
    dataset = synth_dataset(
        n_users=int(params["users"]),
        sessions_per_user=int(params["sessions"]),
        length=int(params["length"]),
        time_jitter=time_jitter,
        amp_jitter=amp_jitter,
        seed=int(params["seed"]),
        noise=noise,
    )
    embeddings = synth_embeddings(
        n_users=int(params["users"]),
        sessions_per_user=int(params["sessions"]),
        sigma=float(params["face_sigma"]),
        seed=int(params["seed"]) + 1,
    )
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    save_sessions_csv(dataset, out_dir / "sessions.csv")
    write_embeddings(out_dir / "embeddings.csv", embeddings)
    _log(
        f"wrote {len(dataset)} sessions and {len(embeddings)} embeddings to {out_dir}"
    )
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowauth",
        description="Blow-acoustic and face-embedding authentication toolkit",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("preprocess", help="turn WAV/sample files into a session CSV")
    p.add_argument("inputs", nargs="*", default=S,
                   help="WAV or one-column CSV files (or directories); "
                        "names follow <user>_<session>_<sit|stand>.<ext>")
    p.add_argument("--out", default=S, help="output session CSV path")
    p.add_argument("--rate", type=float, default=S, help="expected sample rate (48000)")
    p.add_argument("--window", type=int, default=S, help="RMS window in samples (960)")
    p.add_argument("--sma", type=int, default=S, help="smoothing window in points (8)")
    p.add_argument("--manifest", default=None, help="JSON file with parameter values")

    p = sub.add_parser("simmatrix", help="pairwise similarity matrix of all sessions")
    p.add_argument("--dataset", default=S, help="session CSV")
    p.add_argument("--out", default=S, help="output matrix CSV path")
    p.add_argument("--kernel", default=S, choices=KERNEL_KINDS, help="kernel (dtw)")
    p.add_argument("--value-kind", default=S, choices=("samples", "rms", "series"),
                   dest="value_kind", help="override the dataset's value interpretation")
    p.add_argument("--band", type=int, default=S, help="Sakoe-Chiba band for dtw")
    p.add_argument("--descriptor-len", type=int, default=S, dest="descriptor_len",
                   help="shapedtw descriptor length (9)")
    p.add_argument("--no-derivative", action="store_true", default=S,
                   dest="no_derivative", help="shapedtw: raw subsequence only")
    p.add_argument("--shapelet-window", type=int, default=S, dest="shapelet_window",
                   help="dtws pattern window (5)")
    p.add_argument("--nu", type=float, default=S, help="twed stiffness (0.001)")
    p.add_argument("--lam", type=float, default=S, help="twed edit penalty (1.0)")
    p.add_argument("--manifest", default=None, help="JSON file with parameter values")

    p = sub.add_parser("evaluate", help="run the authentication protocol and report rates")
    p.add_argument("--dataset", default=S, help="session CSV")
    p.add_argument("--embeddings", default=S, help="face embedding CSV")
    p.add_argument("--out-dir", default=S, dest="out_dir", help="report output directory")
    p.add_argument("--kernel", default=S,
                   help=f"comma list from {'|'.join(KERNEL_KINDS)} (dtw)")
    p.add_argument("--channel", default=S, help="comma list from blow|face|fused (blow)")
    p.add_argument("--mode", default=S, help="comma list from sit|stand|both (both)")
    p.add_argument("--k", type=int, default=S, help="nearest neighbours aggregated (1)")
    p.add_argument("--q", default=S,
                   help="comma list of target recalls (default: sessions per user)")
    p.add_argument("--weights", default=S, help="blow,face fusion weights (0.5,0.5)")
    p.add_argument("--aggregate", default=S, choices=("mean", "max"),
                   help="kNN aggregation (mean)")
    p.add_argument("--value-kind", default=S, choices=("samples", "rms", "series"),
                   dest="value_kind", help="override the dataset's value interpretation")
    p.add_argument("--export-thresholds", action="store_true", default=S,
                   dest="export_thresholds", help="also write per-user threshold CSVs")
    p.add_argument("--manifest", default=None, help="JSON file with parameter values")

    p = sub.add_parser("synth", help="generate a synthetic dataset with embeddings")
    p.add_argument("--out-dir", default=S, dest="out_dir", help="output directory")
    p.add_argument("--users", type=int, default=S, help="number of users (10)")
    p.add_argument("--sessions", type=int, default=S, help="sessions per user (10)")
    p.add_argument("--length", type=int, default=S, help="points per session (250)")
    p.add_argument("--time-jitter", type=float, default=S, dest="time_jitter",
                   help="time shift sigma in points (2.0)")
    p.add_argument("--amp-jitter", type=float, default=S, dest="amp_jitter",
                   help="amplitude scale sigma (0.1)")
    p.add_argument("--noise", type=float, default=S, help="additive noise sigma (0.0)")
    p.add_argument("--face-sigma", type=float, default=S, dest="face_sigma",
                   help="embedding within-user noise (0.05)")
    p.add_argument("--seed", type=int, default=S, help="random seed (0)")
    p.add_argument("--manifest", default=None, help="JSON file with parameter values")
    return parser


_HANDLERS = {
    "preprocess": cmd_preprocess,
    "simmatrix": cmd_simmatrix,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        params = _resolve_params(args.cmd, args)
        return _HANDLERS[args.cmd](params)
    except (ValueError, OSError, json.JSONDecodeError) as e:
        _log(f"error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
