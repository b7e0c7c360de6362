"""Batch command-line front end.

Subcommands: ``build`` (words, codings, jump traces), ``geometry`` (iceberg
histograms, uniformity, jump matrices, body reports), ``correlate``
(correlation series and the stage-recursion check), ``decay`` (multi-stage
decay profiles), ``simplicity`` (far-half diagnostic), ``spectrum`` (Riesz
products, flatness, merit factors), ``rank`` (rectangle certificates), and
``ensemble`` (seed fan-out for decay/jumps/simplicity).

Every run writes a ``manifest.json`` (inputs, schedule hash, versions,
timestamp) next to its payloads; payload CSVs are deterministic for a fixed
(config, seed) pair — byte-identical across runs — and every schedule-derived
row carries the schedule hash.  Exit codes: 0 success, 2 validation error,
3 resource refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from . import correlation as corr
from . import dynamics as dyn
from . import iceberg as ice
from . import rank as rank_mod
from . import spectral as spx
from . import words as words_mod
from .errors import ConfigurationError, ResourceRefusal

#: Environment variable naming the default output directory.
OUTPUT_DIR_ENV = "ICELAB_OUTDIR"

#: CLI guardrails (overridable with --force).
MAX_CLI_HEIGHT = 10_000_000
MAX_CLI_GRID = 2**22


@dataclass
class RunConfig:
    """Shared run-level options extracted from the command line."""

    command: str
    out_dir: Path
    seed: int | None
    threads: int
    force: bool
    overwrite: bool


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    """Deterministic cell formatting: shortest round-trip floats."""
    if isinstance(value, np.integer):
        value = int(value)
    elif isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _prepare(path: Path, overwrite: bool) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists() and not overwrite:
        raise ConfigurationError(f"{path} exists; pass --overwrite to replace it")
    return path


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], overwrite: bool) -> None:
    _prepare(path, overwrite)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _write_json(path: Path, payload: dict, overwrite: bool) -> None:
    _prepare(path, overwrite)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _write_manifest(cfg: RunConfig, argv: Sequence[str], schedule_hash: str | None) -> None:
    manifest = {
        "command": cfg.command,
        "argv": list(argv),
        "schedule_hash": schedule_hash,
        "versions": {
            "icelab": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    # The manifest is rewritten freely: determinism guarantees cover payloads.
    path = cfg.out_dir / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _parse_labels(text: str) -> dict[str, complex]:
    labels: dict[str, complex] = {}
    for item in text.split(","):
        if "=" not in item:
            raise ConfigurationError(f"label {item!r} is not of the form SYMBOL=VALUE")
        sym, _, val = item.partition("=")
        try:
            labels[sym.strip()] = complex(val.strip())
        except ValueError:
            raise ConfigurationError(f"label value {val!r} is not a complex literal") from None
    if not labels:
        raise ConfigurationError("empty label map")
    return labels


def _parse_qs(args) -> list[int]:
    if args.qs:
        try:
            return [int(tok) for tok in args.qs.split(",")]
        except ValueError:
            raise ConfigurationError(f"--qs {args.qs!r} is not a comma list of integers") from None
    if args.q is not None and args.depth is not None:
        return [args.q] * args.depth
    raise ConfigurationError("family needs --qs or --q with --depth")


def _seed_word_from_args(args, default_text: str, spacer: str | None) -> words_mod.Word:
    text = args.seed_word if args.seed_word is not None else default_text
    if args.alphabet:
        symbols = tuple(args.alphabet)
        spacer_symbol = args.spacer_symbol if args.spacer_symbol else spacer
    else:
        symbols = tuple(sorted(set(text) | (set(spacer) if spacer else set())))
        spacer_symbol = args.spacer_symbol if args.spacer_symbol else spacer
    alphabet = words_mod.Alphabet(symbols, spacer_symbol)
    return words_mod.word_from_text(alphabet, text)


def _schedule_from_args(args) -> words_mod.Schedule:
    if getattr(args, "schedule", None):
        return words_mod.load_schedule(args.schedule)
    family = getattr(args, "family", None)
    if not family:
        raise ConfigurationError("provide --schedule FILE or --family NAME")
    if family == "morse":
        if args.r is None or args.depth is None:
            raise ConfigurationError("morse family needs --r and --depth")
        seed_word = _seed_word_from_args(args, "01", None)
        return words_mod.morse_schedule(args.r, args.depth, seed_word)
    if family == "random":
        if args.seed is None:
            raise ConfigurationError("random families need --seed")
        seed_word = _seed_word_from_args(args, "01", None)
        return words_mod.random_schedule(_parse_qs(args), args.seed, seed_word)
    if family == "staircase":
        seed_word = _seed_word_from_args(args, "0", "1")
        return words_mod.rank_one_schedule("staircase", _parse_qs(args), seed_word=seed_word)
    if family == "ornstein":
        if args.seed is None:
            raise ConfigurationError("random families need --seed")
        seed_word = _seed_word_from_args(args, "0", "1")
        return words_mod.rank_one_schedule(
            "ornstein", _parse_qs(args), seed_word=seed_word, seed=args.seed, ratio=args.ratio
        )
    raise ConfigurationError(f"unknown family {family!r}")


def _add_schedule_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schedule", help="schedule JSON file")
    p.add_argument("--family", choices=["morse", "random", "staircase", "ornstein"],
                   help="generate the schedule from a named family")
    p.add_argument("--r", type=int, help="morse cut count r")
    p.add_argument("--depth", type=int, help="number of stages")
    p.add_argument("--q", type=int, help="copies per stage (with --depth)")
    p.add_argument("--qs", help="comma list of per-stage copy counts")
    p.add_argument("--seed-word", dest="seed_word", help="seed word text")
    p.add_argument("--alphabet", help="alphabet symbols as a string of characters")
    p.add_argument("--spacer-symbol", dest="spacer_symbol", help="spacer symbol character")
    p.add_argument("--ratio", type=int, default=4, help="ornstein spacer bound h/ratio")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./icelab-out)")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--threads", type=int, default=1, help="worker pool size for ensembles")
    p.add_argument("--force", action="store_true", help="override resource guardrails")
    p.add_argument("--overwrite", action="store_true", help="allow replacing existing outputs")
    p.add_argument("--labels", help="label map SYMBOL=VALUE[,SYMBOL=VALUE...]")
    p.add_argument("--zero-mean", dest="zero_mean", action="store_true",
                   help="subtract the mean when lifting labels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icelab",
        description="Rotated-word hierarchies: geometry, dynamics, correlations, spectra, rank.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="materialise words; optional codings and jump traces")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--coding-start", type=int, help="orbit coding start position")
    p.add_argument("--coding-length", type=int, help="orbit coding length")
    p.add_argument("--coding-level", type=int, help="orbit coding word level")
    p.add_argument("--jump-trace", action="store_true", help="emit per-position jump trace CSV")

    p = sub.add_parser("geometry", help="iceberg histograms, uniformity, jumps, body reports")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--body-base", type=int, help="base stage n for the body report")
    p.add_argument("--body-depth", type=int, help="depth r for the body report")

    p = sub.add_parser("correlate", help="correlation series and the stage recursion check")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--stage", type=int, help="stage to correlate (default: all feasible)")
    p.add_argument("--check-recursion", action="store_true",
                   help="verify the stage recursion identity for all shifts")

    p = sub.add_parser("decay", help="correlation decay profile across stages")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--from-stage", dest="from_stage", type=int, required=True)
    p.add_argument("--to-stage", dest="to_stage", type=int, required=True)
    p.add_argument("--statistic", choices=["max", "median", "rms"], default="median")

    p = sub.add_parser("simplicity", help="far-half diagnostic report")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--base", type=int, required=True, help="stage n of the diagnostic")
    p.add_argument("--diag-depth", dest="diag_depth", type=int, required=True,
                   help="truncation depth N")

    p = sub.add_parser("spectrum", help="Riesz products, flatness metrics, merit factors")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--mode", choices=["riesz", "flat", "merit"], required=True)
    p.add_argument("--base", type=int, default=0, help="riesz: base stage n0")
    p.add_argument("--last", type=int, help="riesz: last stage factor (default: depth-1)")
    p.add_argument("--grid-size", dest="grid_size", type=int, default=2**14,
                   help="circle grid size (power of two)")
    p.add_argument("--line", nargs=3, metavar=("A", "B", "POINTS"),
                   help="use a line grid on [A, B] with POINTS points")
    p.add_argument("--check-oracle", action="store_true",
                   help="riesz: compare against the direct word-spectrum oracle")
    p.add_argument("--exp-n", dest="exp_n", help="flat: comma list of term counts n")
    p.add_argument("--eps", type=float, default=0.1, help="flat: exponential parameter")
    p.add_argument("--merit-stages", dest="merit_stages", help="merit: comma list of stages")

    p = sub.add_parser("rank", help="rectangle certificate of a stage iceberg")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--stage", type=int, default=0, help="stage to certify")

    p = sub.add_parser("ensemble", help="seed fan-out for decay, jumps, or simplicity")
    _add_common(p)
    _add_schedule_options(p)
    p.add_argument("--task", choices=["decay", "jumps", "simplicity"], required=True)
    p.add_argument("--seeds", type=int, required=True, help="number of seeds")
    p.add_argument("--base-seed", dest="base_seed", type=int, default=0)
    p.add_argument("--h", type=int, help="jumps: fixed height h")
    p.add_argument("--q-list", dest="q_list", help="jumps: comma list of q values")
    p.add_argument("--from-stage", dest="from_stage", type=int, help="decay: first stage")
    p.add_argument("--to-stage", dest="to_stage", type=int, help="decay: last stage")
    p.add_argument("--base", type=int, help="simplicity: stage n")
    p.add_argument("--diag-depth", dest="diag_depth", type=int, help="simplicity: depth N")

    return parser


# ---------------------------------------------------------------------------
# Guardrails
# ---------------------------------------------------------------------------


def _check_height(schedule: words_mod.Schedule, depth: int, force: bool) -> None:
    h = schedule.heights()[depth]
    if h > MAX_CLI_HEIGHT and not force:
        raise ResourceRefusal(f"h_N = {h} > {MAX_CLI_HEIGHT}; pass --force to proceed")


def _check_grid(size: int, force: bool) -> None:
    if size > MAX_CLI_GRID and not force:
        raise ResourceRefusal(f"grid of {size} points > {MAX_CLI_GRID}; pass --force")


def _labels_or_error(args) -> dict[str, complex]:
    if not args.labels:
        raise ConfigurationError("this command needs --labels")
    return _parse_labels(args.labels)


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_build(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    depth = args.depth if args.depth is not None else sch.depth
    _check_height(sch, depth, cfg.force)
    sh = words_mod.schedule_hash(sch)
    stages = words_mod.build_word(sch, depth, force=True)
    rows = [(sh, n, w.h, w.text) for n, w in enumerate(stages)]
    _write_csv(cfg.out_dir / "words.csv", ["schedule_hash", "stage", "h", "word"], rows,
               cfg.overwrite)
    _prepare(cfg.out_dir / "schedule.json", cfg.overwrite)
    words_mod.save_schedule(sch, cfg.out_dir / "schedule.json")

    wants_coding = any(
        v is not None for v in (args.coding_start, args.coding_length, args.coding_level)
    )
    if wants_coding or args.jump_trace:
        pc = dyn.ProjectionChain.build(sch, depth, force=cfg.force)
        if wants_coding:
            start = args.coding_start or 0
            length = args.coding_length or pc.heights[depth]
            level = args.coding_level if args.coding_level is not None else 0
            coding = dyn.orbit_coding(pc, start, length, level)
            path = _prepare(cfg.out_dir / "coding.txt", cfg.overwrite)
            path.write_text(coding.text + "\n", encoding="utf-8")
        if args.jump_trace:
            reg = np.full(pc.heights[depth], depth, dtype=np.int64)
            for n in range(depth - 1, -1, -1):
                cur = dyn.project_all(pc, n)
                nxt = np.roll(cur, -1)
                plain = (
                    (cur != dyn.SPACER_MARK)
                    & (nxt != dyn.SPACER_MARK)
                    & (nxt == (cur + 1) % pc.heights[n])
                )
                reg[plain] = n
            jump_rows = [(sh, int(p), int(reg[p])) for p in np.nonzero(reg > 0)[0]]
            _write_csv(cfg.out_dir / "jumps.csv",
                       ["schedule_hash", "position", "regular_index"], jump_rows, cfg.overwrite)
    print(f"built {depth + 1} stages, h_N = {stages[-1].h}")
    return sh


def _cmd_geometry(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    sh = words_mod.schedule_hash(sch)
    col_rows, summary = [], {}
    for n in range(sch.depth):
        ib = ice.from_stage(sch, n, allow_spacers=True)
        for k, c in ib.counts:
            col_rows.append((sh, n, k, c, c / ib.q))
        jm = ice.jump_matrix(sch.stages[n], sch.height(n))
        summary[str(n)] = {
            "h": sch.height(n),
            "q": ib.q,
            "cyclic": ib.cyclic,
            "uniformity_deviation": ice.uniformity_deviation(ib),
            "jump_uniformity_deviation": ice.jump_uniformity_deviation(jm),
        }
    _write_csv(cfg.out_dir / "columns.csv",
               ["schedule_hash", "stage", "cut_value", "count", "weight"], col_rows,
               cfg.overwrite)
    payload: dict = {"schedule_hash": sh, "stages": summary}
    if args.body_base is not None and args.body_depth is not None:
        report = ice.body_report(sch, args.body_base, args.body_depth)
        payload["body"] = {
            "n": report.n,
            "r": report.r,
            "total_copies": report.total_copies,
            "intact_copies": report.intact_copies,
            "lower_bound": report.lower_bound,
            "exact_fraction": report.exact_fraction,
        }
    _write_json(cfg.out_dir / "geometry.json", payload, cfg.overwrite)
    return sh


def _cmd_correlate(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    labels = _labels_or_error(args)
    sh = words_mod.schedule_hash(sch)
    heights = sch.heights()
    if args.stage is not None:
        stages = [args.stage]
    else:
        stages = [n for n in range(sch.depth + 1) if heights[n] <= MAX_CLI_HEIGHT or cfg.force]
    top = max(stages)
    _check_height(sch, top, cfg.force)
    built = words_mod.build_word(sch, top, force=True)

    rows = []
    for n in stages:
        f = corr.lift(labels, built[n], n, zero_mean=args.zero_mean)
        series = corr.cyclic_correlation(f)
        for t, c in enumerate(series.values):
            rows.append((sh, n, t, c.real, c.imag))
    _write_csv(cfg.out_dir / "correlation.csv",
               ["schedule_hash", "stage", "t", "re", "im"], rows, cfg.overwrite)

    if args.check_recursion:
        res_rows, worst = [], 0.0
        for n in range(min(top, sch.depth)):
            st = sch.stages[n]
            if not st.pure or n + 1 > top:
                continue
            f_lo = corr.lift(labels, built[n], n, zero_mean=args.zero_mean)
            series = corr.cyclic_correlation(f_lo)
            f_hi = corr.lift(labels, built[n + 1], n + 1, zero_mean=args.zero_mean)
            shifts = list(range(1, st.q))
            lhs = corr.correlation_at_lags(f_hi, lags=[s * heights[n] for s in shifts])
            for s, left in zip(shifts, lhs):
                right = corr.recursion_rhs(series, st, s)
                residual = abs(left - right)
                worst = max(worst, residual)
                res_rows.append((sh, n, s, residual))
        _write_csv(cfg.out_dir / "recursion.csv",
                   ["schedule_hash", "stage", "s", "residual"], res_rows, cfg.overwrite)
        print(f"recursion residual <= {worst:.3e}")
    return sh


def _cmd_decay(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    labels = _labels_or_error(args)
    sh = words_mod.schedule_hash(sch)
    _check_height(sch, args.to_stage, cfg.force)
    profile = corr.decay_profile(
        sch, labels, args.from_stage, args.to_stage, statistic=args.statistic, force=True
    )
    rows = [
        (sh, s.n, s.h, s.max, s.median, s.rms, s.variance) for s in profile.stages
    ]
    _write_csv(cfg.out_dir / "decay.csv",
               ["schedule_hash", "stage", "h", "max", "median", "rms", "variance"],
               rows, cfg.overwrite)
    _write_json(cfg.out_dir / "decay.json", {
        "schedule_hash": sh,
        "slope": profile.slope,
        "statistic": profile.statistic,
        "variance_ratios": list(profile.variance_ratios),
        "predicted_ratios": list(profile.predicted_ratios),
    }, cfg.overwrite)
    print(f"decay slope {profile.slope:+.4f} ({profile.statistic})")
    return sh


def _cmd_simplicity(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    labels = _labels_or_error(args)
    sh = words_mod.schedule_hash(sch)
    _check_height(sch, args.diag_depth, cfg.force)
    rep = corr.simplicity_diagnostic(sch, labels, args.base, args.diag_depth, force=True)
    payload = {
        "schedule_hash": sh,
        "n": rep.n,
        "depth": rep.depth,
        "h_n": rep.h_n,
        "h_N": rep.h_N,
        "f2": rep.f2,
        "g2": rep.g2,
        "fg_diff2": rep.fg_diff2,
        "u2": rep.u2,
        "v2": rep.v2,
        "uv": [rep.uv.real, rep.uv.imag],
        "fv": [rep.fv.real, rep.fv.imag],
        "ratios": {
            "fg": rep.fg_ratio,
            "g": rep.g_ratio,
            "uv": rep.uv_ratio,
            "fv": rep.fv_ratio,
            "uv_norm_gap": rep.uv_norm_gap,
        },
    }
    _write_json(cfg.out_dir / "simplicity.json", payload, cfg.overwrite)
    _write_csv(cfg.out_dir / "simplicity.csv",
               ["schedule_hash", "n", "depth", "f2", "g2", "fg_diff2", "u2", "v2",
                "abs_uv", "abs_fv"],
               [(sh, rep.n, rep.depth, rep.f2, rep.g2, rep.fg_diff2, rep.u2, rep.v2,
                 abs(rep.uv), abs(rep.fv))],
               cfg.overwrite)
    print(
        f"|f-g|^2/|f|^2 = {rep.fg_ratio:.4f}, |g|^2/|f|^2 = {rep.g_ratio:.4f}, "
        f"norm gap = {rep.uv_norm_gap:.3e}"
    )
    return sh


def _grid_from_args(args, force: bool) -> spx.Grid:
    if args.line:
        a, b, m = float(args.line[0]), float(args.line[1]), int(args.line[2])
        _check_grid(m, force)
        return spx.LineGrid(a, b, m)
    _check_grid(args.grid_size, force)
    return spx.CircleGrid(args.grid_size)


def _cmd_spectrum(cfg: RunConfig, args) -> str | None:
    if args.mode == "flat":
        if not args.exp_n:
            raise ConfigurationError("flat mode needs --exp-n")
        grid = (
            _grid_from_args(args, cfg.force)
            if args.line
            else spx.LineGrid(1.0, 2.0, 10001)
        )
        if isinstance(grid, spx.CircleGrid):
            raise ConfigurationError("flat mode needs a line grid")
        rows = []
        for tok in args.exp_n.split(","):
            n = int(tok)
            fs = spx.exp_frequency_set(n, args.eps)
            pg = spx.eval_polynomial(fs, grid, "M_R")
            metrics = spx.flatness_metrics(pg)
            rows.append(("", n, args.eps, metrics.sup_deviation, metrics.mean_deviation,
                         metrics.rms_square_deviation))
        _write_csv(cfg.out_dir / "flat.csv",
                   ["schedule_hash", "n", "eps", "sup_dev", "mean_dev", "rms_sq_dev"],
                   rows, cfg.overwrite)
        print(f"flatness sup deviations: {[r[3] for r in rows]}")
        return None

    sch = _schedule_from_args(args)
    sh = words_mod.schedule_hash(sch)
    if args.mode == "merit":
        labels = _labels_or_error(args)
        stages = (
            [int(t) for t in args.merit_stages.split(",")]
            if args.merit_stages
            else list(range(sch.depth + 1))
        )
        _check_height(sch, max(stages), cfg.force)
        built = words_mod.build_word(sch, max(stages), force=True)
        rows = []
        for n in stages:
            f = corr.lift(labels, built[n], n)
            signs = f.values.real
            if np.any(np.abs(f.values.imag) > 0):
                raise ConfigurationError("merit mode needs real +-1 labels")
            rows.append((sh, n, built[n].h, spx.merit_factor(signs)))
        _write_csv(cfg.out_dir / "merit.csv",
                   ["schedule_hash", "stage", "h", "merit_factor"], rows, cfg.overwrite)
        return sh

    # riesz mode
    labels = _labels_or_error(args)
    grid = _grid_from_args(args, cfg.force)
    last = args.last if args.last is not None else sch.depth - 1
    product = spx.riesz_partial_product(
        sch, labels, args.base, last, grid, zero_mean=args.zero_mean
    )
    if isinstance(grid, spx.CircleGrid):
        axis = grid.angles()
    else:
        axis = grid.points()
    rows = [
        (sh, i, float(axis[i]), float(np.sqrt(product.values[i])), float(product.values[i]),
         float(product.weight[i]))
        for i in range(axis.size)
    ]
    _write_csv(cfg.out_dir / "spectrum.csv",
               ["schedule_hash", "index", "point", "abs_p", "product", "weight"],
               rows, cfg.overwrite)
    payload: dict = {
        "schedule_hash": sh,
        "n0": product.n0,
        "last": product.last,
        "masses": list(product.masses),
    }
    if args.check_oracle:
        direct = spx.direct_word_spectrum(
            sch, labels, last + 1, grid, args.base, zero_mean=args.zero_mean, force=True
        )
        mp = product.values / max(product.values.mean(), 1e-300)
        md = direct / max(direct.mean(), 1e-300)
        l1 = float(np.mean(np.abs(mp - md)))
        payload["oracle_l1"] = l1
        print(f"riesz oracle L1 distance = {l1:.3e}")
    _write_json(cfg.out_dir / "spectrum.json", payload, cfg.overwrite)
    return sh


def _cmd_rank(cfg: RunConfig, args) -> str | None:
    sch = _schedule_from_args(args)
    sh = words_mod.schedule_hash(sch)
    ib = ice.from_stage(sch, args.stage)
    cert = rank_mod.best_subtower_rectangle(ib)
    payload = cert.to_dict()
    payload["schedule_hash"] = sh
    payload["stage"] = args.stage
    payload["h"] = cert.h
    payload["multiplicity_bound"] = rank_mod.multiplicity_bound(cert.area)
    if sch.family_tag == "morse":
        r = sch.stages[args.stage].q
        beta = rank_mod.beta_morse(r)
        payload["beta_morse"] = float(beta)
        payload["beta_gap"] = abs(float(cert.area) - float(beta))
    _write_json(cfg.out_dir / "rank.json", payload, cfg.overwrite)
    _write_csv(cfg.out_dir / "rank.csv",
               ["schedule_hash", "stage", "h", "cut_lo", "cut_hi", "level_lo", "level_hi",
                "weight", "area"],
               [(sh, args.stage, cert.h, cert.cut_lo, cert.cut_hi, cert.level_lo,
                 cert.level_hi, float(cert.weight), float(cert.area))],
               cfg.overwrite)
    print(f"rectangle area {float(cert.area):.6f}")
    return sh


def _cmd_ensemble(cfg: RunConfig, args) -> str | None:
    seeds = [args.base_seed + i for i in range(args.seeds)]
    if args.seeds < 1:
        raise ConfigurationError("ensemble needs --seeds >= 1")

    if args.task == "jumps":
        if args.h is None or not args.q_list:
            raise ConfigurationError("jumps task needs --h and --q-list")
        qs = [int(t) for t in args.q_list.split(",")]

        def run_jump(seed: int) -> list[tuple]:
            out = []
            for idx, q in enumerate(qs):
                rng = np.random.default_rng([seed, idx])
                st = words_mod.Stage(
                    q=q, rotations=tuple(int(a) for a in rng.integers(0, args.h, q))
                )
                dev = ice.jump_uniformity_deviation(ice.jump_matrix(st, args.h))
                out.append((seed, "", q, dev))
            return out

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(run_jump, seeds))
        rows = [row for chunk in sorted(chunks, key=lambda c: c[0][0]) for row in chunk]
        _write_csv(cfg.out_dir / "ensemble.csv",
                   ["seed", "schedule_hash", "q", "jump_deviation"], rows, cfg.overwrite)
        medians = {
            str(q): float(np.median([r[3] for r in rows if r[2] == q])) for q in qs
        }
        _write_json(cfg.out_dir / "ensemble.json",
                    {"task": "jumps", "h": args.h, "medians": medians}, cfg.overwrite)
        print(f"jump deviation medians: {medians}")
        return None

    if args.task == "decay":
        labels = _labels_or_error(args)
        if args.from_stage is None or args.to_stage is None:
            raise ConfigurationError("decay task needs --from-stage and --to-stage")
        qs = _parse_qs(args)

        def run_decay(seed: int) -> tuple:
            sch = words_mod.random_schedule(qs, seed, _seed_word_from_args(args, "01", None))
            profile = corr.decay_profile(
                sch, labels, args.from_stage, args.to_stage, force=cfg.force
            )
            return (seed, words_mod.schedule_hash(sch), profile.slope)

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = sorted(pool.map(run_decay, seeds))
        _write_csv(cfg.out_dir / "ensemble.csv",
                   ["seed", "schedule_hash", "slope"], results, cfg.overwrite)
        median_slope = float(np.median([r[2] for r in results]))
        _write_json(cfg.out_dir / "ensemble.json",
                    {"task": "decay", "median_slope": median_slope}, cfg.overwrite)
        print(f"median decay slope {median_slope:+.4f}")
        return None

    # simplicity task
    labels = _labels_or_error(args)
    if args.base is None or args.diag_depth is None:
        raise ConfigurationError("simplicity task needs --base and --diag-depth")
    qs = _parse_qs(args)

    def run_simplicity(seed: int) -> tuple:
        sch = words_mod.random_schedule(qs, seed, _seed_word_from_args(args, "012", None))
        rep = corr.simplicity_diagnostic(sch, labels, args.base, args.diag_depth, force=cfg.force)
        return (seed, words_mod.schedule_hash(sch), rep.fg_ratio, rep.g_ratio,
                rep.uv_ratio, rep.fv_ratio, rep.uv_norm_gap)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = sorted(pool.map(run_simplicity, seeds))
    _write_csv(cfg.out_dir / "ensemble.csv",
               ["seed", "schedule_hash", "fg_ratio", "g_ratio", "uv_ratio", "fv_ratio",
                "uv_norm_gap"],
               results, cfg.overwrite)
    _write_json(cfg.out_dir / "ensemble.json", {
        "task": "simplicity",
        "median_fg_ratio": float(np.median([r[2] for r in results])),
        "median_norm_gap": float(np.median([r[6] for r in results])),
    }, cfg.overwrite)
    return None


_COMMANDS = {
    "build": _cmd_build,
    "geometry": _cmd_geometry,
    "correlate": _cmd_correlate,
    "decay": _cmd_decay,
    "simplicity": _cmd_simplicity,
    "spectrum": _cmd_spectrum,
    "rank": _cmd_rank,
    "ensemble": _cmd_ensemble,
}


def run(argv: Sequence[str]) -> int:
    """Parse and execute one command; returns the exit code (0/2/3)."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:  # argparse reports usage problems with code 2
        return int(exc.code or 0)
    out_dir = Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or "./icelab-out")
    cfg = RunConfig(
        command=args.command,
        out_dir=out_dir,
        seed=args.seed,
        threads=max(1, args.threads),
        force=args.force,
        overwrite=args.overwrite,
    )
    try:
        schedule_hash = _COMMANDS[args.command](cfg, args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    _write_manifest(cfg, argv, schedule_hash)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
