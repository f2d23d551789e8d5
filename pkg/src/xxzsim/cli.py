"""Command-line interface: run specs, sweep noise grids, post-hoc spectra.

Verbs: ``run <spec>``, ``sweep <spec>`` (Cartesian noise grids),
``fft <run-a.csv> <run-b.csv>``, ``validate <spec>``.  Exit codes: 0 ok,
1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .ensemble import EnsembleConfig, EnsembleSeries, run_ensemble
from .observables import fft_difference_spectrum
from .runspec import (
    NoisePoint,
    RunSpec,
    SpecError,
    emit_run_spec,
    make_components,
    noise_points,
    parse_run_spec,
    resolved_initial_sites,
)

WORKERS_ENV = "XXZSIM_WORKERS"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _site_columns(n_sites: int) -> list[str]:
    w = len(str(n_sites - 1))
    return [f"mag{i:0{w}d}" for i in range(n_sites)]


def write_point_csv(path: Path, series: EnsembleSeries) -> None:
    """Full-precision CSV: time, per-site magnetization, ipr (q=1), ier, width."""
    n_sites = series.mean["magnetization"].shape[1]
    cols = _site_columns(n_sites)
    header = ["time"]
    for c in cols:
        header += [f"{c}_mean", f"{c}_se"]
    if "ipr" in series.mean:
        header += ["ipr_mean", "ipr_se"]
    header += ["ier_mean", "ier_se", "width_mean", "width_se"]

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for g, t in enumerate(series.times):
            row = [_fmt(t)]
            for i in range(n_sites):
                row += [
                    _fmt(series.mean["magnetization"][g, i]),
                    _fmt(series.std_error["magnetization"][g, i]),
                ]
            if "ipr" in series.mean:
                row += [_fmt(series.mean["ipr"][g]), _fmt(series.std_error["ipr"][g])]
            row += [
                _fmt(series.mean["ier"][g]),
                _fmt(series.std_error["ier"][g]),
                _fmt(series.mean["width"][g]),
                _fmt(series.std_error["width"][g]),
            ]
            writer.writerow(row)


def read_csv_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, row)) for row in reader if row]
    data = np.asarray(rows)
    if data.size == 0:
        raise SpecError(f"{path}: empty CSV")
    return {name: data[:, j] for j, name in enumerate(header)}


def _resolve_workers(flag: int | None, spec: RunSpec) -> int | None:
    if flag is not None:
        return flag
    if spec.ensemble.workers is not None:
        return spec.ensemble.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"{WORKERS_ENV}: not an integer: {env!r}")
    return None


def _grid_index(times: np.ndarray, t: float) -> int:
    return int(np.argmin(np.abs(times - t)))


def execute(
    spec: RunSpec,
    out_dir,
    expand_grid: bool = False,
    seed_override: int | None = None,
    workers_override: int | None = None,
    no_plots: bool = False,
    log=print,
) -> dict:
    """Run every ensemble the spec requests and persist CSVs, metadata, plots.

    Partially written artifacts are deleted if the run aborts.
    """
    points = noise_points(spec, expand_grid)
    basis, H, traj = make_components(spec)
    master_seed = seed_override if seed_override is not None else spec.ensemble.master_seed
    workers = _resolve_workers(workers_override, spec)
    from .runspec import default_trajectories

    n_traj = spec.ensemble.n_trajectories or default_trajectories(spec.model)
    ens_config = EnsembleConfig(
        n_trajectories=n_traj, master_seed=master_seed, workers=workers
    )

    out_dir = Path(out_dir)
    created_dir = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    t_start = time.perf_counter()

    try:
        results: list[tuple[str, NoisePoint | None, EnsembleSeries]] = []
        point_meta = []
        for label, point, noise_config in points:
            t0 = time.perf_counter()
            log(f"[xxzsim] running {label} (M={n_traj}) ...")
            series = run_ensemble(H, noise_config, traj, ens_config)
            csv_path = out_dir / f"point_{label}.csv"
            write_point_csv(csv_path, series)
            created.append(csv_path)
            results.append((label, point, series))
            point_meta.append(
                {
                    "label": label,
                    "nu": point.nu if point else None,
                    "rc": point.rc if point else None,
                    "csv": csv_path.name,
                    "effective_t_final": series.effective_t_final,
                    "wall_time_s": time.perf_counter() - t0,
                    "conservation": series.metadata["conservation"],
                }
            )

        artifacts: dict = {"points": [str(out_dir / m["csv"]) for m in point_meta]}

        if spec.outputs.summary_time is not None:
            summary_path = out_dir / "summary.csv"
            with open(summary_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ["nu", "rc", "time", "ipr_mean", "ipr_se", "ier_mean", "ier_se"]
                )
                for label, point, series in results:
                    if point is None:
                        continue
                    g = _grid_index(series.times, spec.outputs.summary_time)
                    has_ipr = "ipr" in series.mean
                    writer.writerow(
                        [
                            _fmt(point.nu),
                            _fmt(point.rc),
                            _fmt(series.times[g]),
                            _fmt(series.mean["ipr"][g]) if has_ipr else "",
                            _fmt(series.std_error["ipr"][g]) if has_ipr else "",
                            _fmt(series.mean["ier"][g]),
                            _fmt(series.std_error["ier"][g]),
                        ]
                    )
            created.append(summary_path)
            artifacts["summary"] = str(summary_path)

        spectra_files = []
        if spec.outputs.fft_pairs:
            spectra_files = _write_fft_pairs(out_dir, results, spec, traj, created)
            artifacts["spectra"] = [str(p) for p in spectra_files]

        if not no_plots and spec.outputs.plots:
            plot_files = _write_plots(out_dir, results, spec, created)
            artifacts["plots"] = [str(p) for p in plot_files]

        meta_path = out_dir / "metadata.json"
        metadata = {
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "code_version": _code_version(),
            "spec": emit_run_spec(spec),
            "master_seed": master_seed,
            "n_trajectories": n_traj,
            "workers": workers,
            "points": point_meta,
            "wall_time_s": time.perf_counter() - t_start,
        }
        meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
        created.append(meta_path)
        artifacts["metadata"] = str(meta_path)
        return artifacts
    except BaseException:
        for path in created:
            path.unlink(missing_ok=True)
        plots_dir = out_dir / "plots"
        if plots_dir.is_dir() and not any(plots_dir.iterdir()):
            plots_dir.rmdir()
        if created_dir and out_dir.is_dir() and not any(out_dir.iterdir()):
            out_dir.rmdir()
        raise


def _tracked_site(spec: RunSpec) -> int:
    sites = resolved_initial_sites(spec.model)
    return sites[len(sites) // 2]


def _write_fft_pairs(out_dir, results, spec, traj, created) -> list[Path]:
    """Difference spectra for point pairs sharing rc (higher nu minus lower)."""
    by_rc: dict[float, list] = {}
    for label, point, series in results:
        if point is not None:
            by_rc.setdefault(point.rc, []).append((point, series))
    site = _tracked_site(spec)
    part_key = "ipr" if spec.model.n_excitations == 1 else "ier"
    out = []
    for rc, group in sorted(by_rc.items()):
        if len(group) != 2:
            continue
        group.sort(key=lambda item: -item[0].nu)  # higher nu first
        (pa, sa), (pb, sb) = group
        # use the common pre-boundary window of the pair
        t_stop = min(sa.effective_t_final, sb.effective_t_final)
        g_stop = _grid_index(sa.times, t_stop) + 1
        if g_stop < 8:
            raise SpecError(
                f"fft_pairs: common pre-boundary window at rc={rc:g} has only "
                f"{g_stop} samples; lengthen t_final or loosen boundary_epsilon"
            )
        freqs, amp_mag = fft_difference_spectrum(
            sa.mean["magnetization"][:g_stop, site],
            sb.mean["magnetization"][:g_stop, site],
            traj.sample_dt,
        )
        _, amp_part = fft_difference_spectrum(
            sa.mean[part_key][:g_stop], sb.mean[part_key][:g_stop], traj.sample_dt
        )
        path = out_dir / f"fft_rc{f'{rc:g}'.replace('.', 'p')}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency", "magnetization_amplitude", f"{part_key}_amplitude"])
            # DC bin removed
            for f, am, ap in zip(freqs[1:], amp_mag[1:], amp_part[1:]):
                writer.writerow([_fmt(f), _fmt(am), _fmt(ap)])
        created.append(path)
        out.append(path)
    return out


def _write_plots(out_dir, results, spec, created) -> list[Path]:
    from . import plotting

    plots_dir = out_dir / "plots"
    plots_dir.mkdir(exist_ok=True)
    kinds = spec.outputs.plots
    site = _tracked_site(spec)
    part_key = "ipr" if spec.model.n_excitations == 1 else "ier"
    out = []

    if "heatmap" in kinds:
        for label, _, series in results:
            p = plotting.save_heatmap(
                series.times,
                series.mean["magnetization"],
                plots_dir / f"heatmap_{label}.svg",
                title=label,
            )
            created.append(p)
            out.append(p)
    if "series" in kinds:
        part_curves = [
            (label, s.mean[part_key], s.std_error[part_key]) for label, _, s in results
        ]
        p = plotting.save_series(
            results[0][2].times,
            part_curves,
            plots_dir / f"{part_key}_vs_time.svg",
            ylabel=part_key.upper(),
        )
        created.append(p)
        out.append(p)
        mag_curves = [
            (
                label,
                s.mean["magnetization"][:, site] / 2.0,
                s.std_error["magnetization"][:, site] / 2.0,
            )
            for label, _, s in results
        ]
        p = plotting.save_series(
            results[0][2].times,
            mag_curves,
            plots_dir / "central_magnetization.svg",
            ylabel=rf"$\langle s_{{{site}}}^z\rangle$",
        )
        created.append(p)
        out.append(p)
    if "summary" in kinds and spec.outputs.summary_time is not None:
        rows = []
        for _, point, s in results:
            if point is None:
                continue
            g = _grid_index(s.times, spec.outputs.summary_time)
            rows.append(
                (point.nu, point.rc, s.mean[part_key][g], s.std_error[part_key][g])
            )
        if rows:
            p = plotting.save_summary(
                rows,
                plots_dir / "summary.svg",
                ylabel=f"{part_key.upper()} at t={spec.outputs.summary_time:g}",
            )
            created.append(p)
            out.append(p)
    if "spectra" in kinds and spec.outputs.fft_pairs:
        for path in sorted(out_dir.glob("fft_rc*.csv")):
            data = read_csv_columns(path)
            rc_label = path.stem.replace("fft_rc", "").replace("p", ".")
            p = plotting.save_spectrum(
                data["frequency"],
                [
                    ("magnetization", data["magnetization_amplitude"]),
                    (part_key, data[f"{part_key}_amplitude"]),
                ],
                plots_dir / f"{path.stem}.svg",
                mark=float(rc_label),
                title=f"rc={rc_label}",
            )
            created.append(p)
            out.append(p)
    return out


def _cmd_run(args, expand_grid: bool) -> int:
    spec = parse_run_spec(args.spec)
    out_dir = args.out_dir or spec.outputs.out_dir or f"out_{Path(args.spec).stem}"
    artifacts = execute(
        spec,
        out_dir,
        expand_grid=expand_grid,
        seed_override=args.seed,
        workers_override=args.workers,
        no_plots=args.no_plots,
    )
    print(f"[xxzsim] wrote {artifacts['metadata']}")
    return 0


def _cmd_fft(args) -> int:
    a = read_csv_columns(args.run_a)
    b = read_csv_columns(args.run_b)
    for name, data in (("run-a", a), ("run-b", b)):
        if "time" not in data:
            raise SpecError(f"{name}: CSV has no 'time' column")
        if args.column not in data:
            raise SpecError(f"{name}: CSV has no column {args.column!r}")
    if len(a["time"]) != len(b["time"]) or not np.allclose(a["time"], b["time"]):
        raise SpecError("run-a and run-b are not on the same time grid")
    dt = float(a["time"][1] - a["time"][0])
    freqs, amps = fft_difference_spectrum(
        a[args.column], b[args.column], dt, angular=args.angular
    )
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "amplitude"])
        for f, amp in zip(freqs[1:], amps[1:]):  # DC bin removed
            writer.writerow([_fmt(f), _fmt(amp)])
    peak = freqs[1:][np.argmax(amps[1:])]
    print(f"[xxzsim] wrote {out} (dominant peak at {peak:.6g})")
    return 0


def _cmd_validate(args) -> int:
    spec = parse_run_spec(args.spec)
    points = noise_points(spec, expand_grid=True)
    print(
        f"[xxzsim] OK: N={spec.model.n_sites} q={spec.model.n_excitations} "
        f"Delta={spec.model.Delta:g}, {len(points)} noise point(s), "
        f"t_final={spec.trajectory.t_final:g}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xxzsim",
        description="Spin-excitation transport in an XXZ chain under collision dephasing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("spec", help="JSON run spec file")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--out-dir", default=None, help="artifact directory")
        p.add_argument("--no-plots", action="store_true", help="skip SVG plots")

    add_run_flags(sub.add_parser("run", help="run the spec's noise points"))
    add_run_flags(sub.add_parser("sweep", help="run the Cartesian noise grid"))

    fft = sub.add_parser("fft", help="difference spectrum of two run CSVs")
    fft.add_argument("run_a")
    fft.add_argument("run_b")
    fft.add_argument("--column", default="ipr_mean", help="CSV column to transform")
    fft.add_argument("--out", default="fft.csv")
    fft.add_argument(
        "--angular", action="store_true", help="angular (2*pi-scaled) frequency axis"
    )

    val = sub.add_parser("validate", help="parse and validate a spec")
    val.add_argument("spec")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, expand_grid=False)
        if args.command == "sweep":
            return _cmd_run(args, expand_grid=True)
        if args.command == "fft":
            return _cmd_fft(args)
        if args.command == "validate":
            return _cmd_validate(args)
        raise AssertionError(f"unhandled command {args.command}")
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


def _code_version() -> str:
    from xxzsim import __version__

    return __version__


if __name__ == "__main__":
    sys.exit(main())
