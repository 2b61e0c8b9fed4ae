"""Command-line entry point: ``qutrit-mcmd <subcommand> [options]``.

Exit codes: 0 on success, 2 on invalid configuration or input files,
1 when a simulation or fit fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .experiments.decay import US, run_decay
from .experiments.heatmap import run_heatmap, summarize_percentiles
from .experiments.lrb import exact_leakage_rates, run_lrb
from .fitting import FitError
from .iq import (
    QDATrainingError,
    ShotFileError,
    read_shots_csv,
    train_binary_threshold,
    train_qda,
)
from .measurement import BINARY_LABELS, TERNARY_LABELS
from .rem import AssignmentMatrix, RankDeficientError, invert_assignment, project_to_simplex
from .rng import check_seed

FORMATS = ("csv", "json", "both")


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used in every output file."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if not math.isfinite(x) else float(fmt(x))
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (fmt(v) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()


def write(out: Path, name: str, text: str) -> Path:
    path = out / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _config(args) -> cfgmod.ConfigFile:
    return cfgmod.load(args.config) if args.config else cfgmod.empty()


def _wants(args, kind: str) -> bool:
    return args.format in (kind, "both")


def cmd_heatmap(args, out: Path) -> list:
    cfg = _config(args)
    hc = cfgmod.heatmap_from(cfg, cfgmod.seed_from(cfg, args.seed))
    res = run_heatmap(hc)
    raw = res.dh_raw()
    rem = res.dh_rem() if hc.rem else None
    files = []
    if _wants(args, "csv"):
        rows = [
            (float(p.prepared[0]), float(p.prepared[1]), float(p.prepared[2]), p.dh_raw, p.dh_rem)
            for p in res.points
        ]
        files.append(write(out, "heatmap.csv", csv_text(("q0", "q1", "q2", "dh_raw", "dh_rem"), rows)))
    if _wants(args, "json"):
        if rem is not None:
            summary = summarize_percentiles(raw, rem)
        else:
            summary = {"p50_before": float(np.percentile(raw, 50)), "p50_after": None, "reduction_percent": None}
        summary.update(
            discriminator=hc.discriminator,
            rem=hc.rem,
            grid_step=hc.grid_step,
            shots_per_point=hc.shots_per_point,
            n_points=len(res.points),
            seed=hc.seed,
            noise=hc.noise.to_dict(),
            mean_dh_raw=float(raw.mean()),
            mean_dh_rem=float(rem.mean()) if rem is not None else None,
        )
        files.append(write(out, "summary.json", dumps(summary)))
        if res.assignment is not None:
            files.append(write(out, "assignment.json", res.assignment.to_json() + "\n"))
    return files


def cmd_lrb(args, out: Path) -> list:
    cfg = _config(args)
    if not args.config:
        raise ConfigError("lrb needs --config with an [lrb] section")
    lc = cfgmod.lrb_from(cfg, cfgmod.seed_from(cfg, args.seed))
    res = run_lrb(lc)
    files = []
    if _wants(args, "csv"):
        rows = [
            (int(m), s, float(res.p0[i, s]), float(res.p2[i, s]))
            for i, m in enumerate(res.lengths)
            for s in range(lc.num_samples)
        ]
        files.append(write(out, "lrb_curves.csv", csv_text(("m", "sample", "p0", "p2"), rows)))
    if _wants(args, "json"):
        d = res.to_dict()
        l1, l2 = exact_leakage_rates(lc.leaky_gate)
        d.update(
            model_exact={"L1": l1, "L2": l2},
            num_samples=lc.num_samples,
            shots=lc.shots,
            seed=lc.seed,
        )
        files.append(write(out, "lrb_fit.json", dumps(d)))
    return files


def cmd_decay(args, out: Path) -> list:
    cfg = _config(args)
    if not args.config:
        raise ConfigError("decay needs --config with [decay] and [rates] sections")
    dc = cfgmod.decay_from(cfg, cfgmod.seed_from(cfg, args.seed))
    res = run_decay(dc.rates, dc.delays, dc.shots, dc.noise, dc.seed, dc.gate_time, dc.calibration_shots)
    files = []
    if _wants(args, "csv"):
        rows = [(float(t / US), *map(float, c)) for t, c in zip(res.delays, res.curves)]
        files.append(write(out, "decay_curves.csv", csv_text(("delay_us", "p0", "p1", "p2"), rows)))
    if _wants(args, "json"):
        d = res.to_dict()
        d.update(seed=dc.seed, shots=dc.shots, true_lifetimes_us=dc.rates.lifetimes_us())
        files.append(write(out, "decay_fit.json", dumps(d)))
    return files


def _read_points(path: Path, require_labels: bool):
    if not path.exists():
        raise ConfigError(f"shot file not found: {path}")
    if not path.read_text(encoding="utf-8").strip():
        if require_labels:
            raise ShotFileError(f"{path}: line 1: training file is empty")
        return np.empty((0, 2)), None
    return read_shots_csv(path, require_labels=require_labels)


def cmd_discriminate(args, out: Path) -> list:
    cfg = _config(args)
    sec = cfgmod.Section(cfg, "discriminate")
    train = args.train or sec.get("train", None, str)
    target = args.target or sec.get("target", None, str)
    model_kind = args.model or sec.get("model", "qda", str)
    priors = args.priors or sec.get("priors", "uniform", str)
    sec.finish()
    if args.config:
        cfgmod.check_top_level(cfg, ("discriminate",))
    if not train or not target:
        raise ConfigError("discriminate needs --train and --target (or [discriminate] train/target)")
    if model_kind not in ("qda", "binary"):
        raise ConfigError(f"model must be 'qda' or 'binary', got {model_kind!r}")
    if priors not in ("uniform", "empirical"):
        raise ConfigError(f"priors must be 'uniform' or 'empirical', got {priors!r}")
    train_path = Path(args.train) if args.train else cfgmod.resolve_path(cfg, train)
    target_path = Path(args.target) if args.target else cfgmod.resolve_path(cfg, target)
    pts, labels = _read_points(train_path, True)
    targets, _ = _read_points(target_path, False)
    if model_kind == "qda":
        model = train_qda(pts, labels, priors=priors)
        names = TERNARY_LABELS[: model.n_classes]
        train_pred = model.classify(pts)
        pred = model.classify(targets) if len(targets) else np.empty(0, dtype=int)
        train_labels = labels
    else:
        keep = labels < 2
        if not np.all(np.isin([0, 1], labels[keep])):
            raise ShotFileError(f"{train_path}: binary model needs training shots labelled 0 and 1")
        model = train_binary_threshold(pts[keep], labels[keep])
        names = BINARY_LABELS
        train_pred = model.classify(pts[keep])
        pred = model.classify(targets) if len(targets) else np.empty(0, dtype=int)
        train_labels = labels[keep]
    counts = np.bincount(pred, minlength=len(names))[: len(names)]
    n = int(counts.sum())
    result = {
        "model": model_kind,
        "labels": list(names),
        "shots": n,
        "counts": {k: int(c) for k, c in zip(names, counts)},
        "frequencies": {k: (c / n if n else None) for k, c in zip(names, counts)},
        "training": {"shots": int(len(train_labels)), "accuracy": float(np.mean(train_pred == train_labels))},
    }
    files = []
    if _wants(args, "json"):
        files.append(write(out, "counts.json", dumps(result)))
    if _wants(args, "csv"):
        rows = [(k, int(c), (float(c / n) if n else None)) for k, c in zip(names, counts)]
        files.append(write(out, "counts.csv", csv_text(("label", "count", "frequency"), rows)))
    return files


def _observed_vector(text: str, labels: tuple) -> np.ndarray:
    path = Path(text)
    if path.exists():
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        if isinstance(data, dict):
            for key in ("counts", "frequencies"):
                if isinstance(data.get(key), dict):
                    table = data[key]
                    missing = [lab for lab in labels if lab not in table]
                    if missing:
                        raise ConfigError(f"{path}: observed {key} lack labels {missing}")
                    vec = np.array([table[lab] for lab in labels], dtype=float)
                    return vec / vec.sum() if key == "counts" and vec.sum() > 0 else vec
            raise ConfigError(f"{path}: expected a list or a 'frequencies'/'counts' table")
        values = data
    else:
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError as exc:
            raise ConfigError(f"--observed is neither a file nor a comma-separated list: {text!r}") from exc
    vec = np.asarray(values, dtype=float).reshape(-1)
    if vec.size != len(labels) or not np.all(np.isfinite(vec)):
        raise ConfigError(f"observed vector needs {len(labels)} finite entries ({', '.join(labels)})")
    return vec


def cmd_mitigate(args, out: Path) -> list:
    if not args.assignment or not args.observed:
        raise ConfigError("mitigate needs --assignment and --observed")
    apath = Path(args.assignment)
    try:
        lam = AssignmentMatrix.from_json(apath.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read assignment matrix {apath}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{apath}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{apath}: invalid assignment matrix: {exc}") from exc
    u = _observed_vector(args.observed, lam.row_labels)
    quasi = invert_assignment(lam, u)
    mitigated = project_to_simplex(quasi)
    result = {
        "observed_labels": list(lam.row_labels),
        "observed": u,
        "quasi_probability": quasi,
        "mitigated": mitigated,
        "states": list(TERNARY_LABELS),
    }
    files = []
    if _wants(args, "json"):
        files.append(write(out, "mitigated.json", dumps(result)))
    if _wants(args, "csv"):
        rows = [(s, float(q), float(m)) for s, q, m in zip(TERNARY_LABELS, quasi, mitigated)]
        files.append(write(out, "mitigated.csv", csv_text(("state", "quasi_probability", "probability"), rows)))
    return files


COMMANDS = {
    "heatmap": (cmd_heatmap, "readout error over a simplex grid of prepared states"),
    "lrb": (cmd_lrb, "leakage randomized benchmarking read out with MCMD"),
    "decay": (cmd_decay, "relaxation from |2> and rate fit"),
    "discriminate": (cmd_discriminate, "classify IQ shots from CSV files"),
    "mitigate": (cmd_mitigate, "apply readout error mitigation to observed frequencies"),
}


def _seed_arg(text: str) -> int:
    try:
        return check_seed(int(text, 0))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutrit-mcmd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--seed", type=_seed_arg, help="unsigned 64-bit seed (overrides the config)")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--format", choices=FORMATS, default="both", help="which outputs to write")
        if name == "discriminate":
            p.add_argument("--train", help="labelled training shots CSV (i,q,label)")
            p.add_argument("--target", help="shots CSV to classify (i,q)")
            p.add_argument("--model", choices=("qda", "binary"), help="discriminator (default qda)")
            p.add_argument("--priors", choices=("uniform", "empirical"), help="QDA class priors")
        if name == "mitigate":
            p.add_argument("--assignment", help="assignment matrix JSON")
            p.add_argument("--observed", help="observed frequencies: JSON file or comma-separated list")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    out = Path(args.out)
    try:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
        files = handler(args, out)
    except (ConfigError, ShotFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FitError, QDATrainingError, RankDeficientError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(dumps(diag), file=sys.stderr, end="")
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
