"""Run specification files: parsing, validation, and emission.

A run spec is a JSON document with four required sections (model, noise,
trajectory, ensemble) and an optional outputs section.  Times are in units
of the inverse exchange constant; noise points are given as (nu, rc) pairs
and converted to Weibull scale parameters when the run is assembled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .basis import SectorBasis, build_sector
from .dynamics import TrajectoryConfig
from .model import ModelParams, SpectralHamiltonian, build_hamiltonian
from .noise import NoiseConfig, WeibullParams, params_for_rate


class SpecError(ValueError):
    """Invalid run specification; message names the offending field."""


PLOT_KINDS = ("heatmap", "series", "summary", "spectra")


@dataclass(frozen=True)
class ModelSpec:
    n_sites: int
    n_excitations: int
    J: float = 1.0
    Delta: float = 0.0
    h: float = 0.0
    initial_sites: tuple[int, ...] | None = None  # None -> centered block


@dataclass(frozen=True)
class NoisePoint:
    nu: float
    rc: float


@dataclass(frozen=True)
class NoiseSpec:
    enabled: bool = True
    points: tuple[NoisePoint, ...] | None = None
    grid_nu: tuple[float, ...] | None = None
    grid_rc: tuple[float, ...] | None = None
    per_site: tuple[WeibullParams, ...] | None = None


@dataclass(frozen=True)
class TrajectorySpec:
    t_final: float
    sample_dt: float = 0.02
    boundary_epsilon: float = 1e-3


@dataclass(frozen=True)
class EnsembleSpec:
    master_seed: int
    n_trajectories: int | None = None  # None -> 500 for q=1, 250 otherwise
    workers: int | None = None


@dataclass(frozen=True)
class OutputSpec:
    plots: tuple[str, ...] = ()
    summary_time: float | None = None
    fft_pairs: bool = False
    out_dir: str | None = None


@dataclass(frozen=True)
class RunSpec:
    model: ModelSpec
    noise: NoiseSpec
    trajectory: TrajectorySpec
    ensemble: EnsembleSpec
    outputs: OutputSpec = OutputSpec()


def _get(section: dict, path: str, key: str, required: bool = False, default=None):
    if key in section:
        return section[key]
    if required:
        raise SpecError(f"{path}.{key}: required field is missing")
    return default


def _expect_type(value, types, path: str):
    if isinstance(value, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise SpecError(f"{path}: expected number, got boolean")
    if not isinstance(value, types):
        raise SpecError(f"{path}: expected {types}, got {type(value).__name__}")
    return value


def _positive(value, path: str) -> float:
    _expect_type(value, (int, float), path)
    if not value > 0:
        raise SpecError(f"{path}: must be > 0, got {value}")
    return float(value)


def _parse_model(section, path="model") -> ModelSpec:
    _expect_type(section, dict, path)
    n_sites = _expect_type(_get(section, path, "n_sites", required=True), int, f"{path}.n_sites")
    if n_sites < 2:
        raise SpecError(f"{path}.n_sites: must be >= 2, got {n_sites}")
    q = _expect_type(
        _get(section, path, "n_excitations", required=True), int, f"{path}.n_excitations"
    )
    if not 0 <= q <= n_sites:
        raise SpecError(f"{path}.n_excitations: must be in [0, {n_sites}], got {q}")
    J = float(_expect_type(_get(section, path, "J", default=1.0), (int, float), f"{path}.J"))
    Delta = float(
        _expect_type(_get(section, path, "Delta", default=0.0), (int, float), f"{path}.Delta")
    )
    h = float(_expect_type(_get(section, path, "h", default=0.0), (int, float), f"{path}.h"))
    sites_raw = _get(section, path, "initial_sites")
    initial_sites = None
    if sites_raw is not None:
        _expect_type(sites_raw, list, f"{path}.initial_sites")
        sites = tuple(
            _expect_type(s, int, f"{path}.initial_sites[{i}]") for i, s in enumerate(sites_raw)
        )
        if len(sites) != q:
            raise SpecError(
                f"{path}.initial_sites: expected {q} sites for q={q}, got {len(sites)}"
            )
        if len(set(sites)) != len(sites):
            raise SpecError(f"{path}.initial_sites: sites must be distinct")
        for i, s in enumerate(sites):
            if not 0 <= s < n_sites:
                raise SpecError(
                    f"{path}.initial_sites[{i}]: site {s} out of range [0, {n_sites})"
                )
        initial_sites = sites
    return ModelSpec(n_sites, q, J, Delta, h, initial_sites)


def _parse_noise(section, n_sites: int, path="noise") -> NoiseSpec:
    _expect_type(section, dict, path)
    enabled = _expect_type(_get(section, path, "enabled", default=True), bool, f"{path}.enabled")
    points = grid_nu = grid_rc = per_site = None
    given = [k for k in ("points", "grid", "per_site") if section.get(k) is not None]
    if enabled and len(given) != 1:
        raise SpecError(
            f"{path}: exactly one of points/grid/per_site is required when enabled, got {given or 'none'}"
        )
    if not enabled and given:
        raise SpecError(f"{path}: {given[0]} given but noise is disabled")

    if "points" in given:
        raw = section["points"]
        _expect_type(raw, list, f"{path}.points")
        if not raw:
            raise SpecError(f"{path}.points: must not be empty")
        parsed = []
        for i, entry in enumerate(raw):
            _expect_type(entry, dict, f"{path}.points[{i}]")
            nu = _positive(_get(entry, f"{path}.points[{i}]", "nu", required=True), f"{path}.points[{i}].nu")
            rc = _positive(_get(entry, f"{path}.points[{i}]", "rc", required=True), f"{path}.points[{i}].rc")
            parsed.append(NoisePoint(nu, rc))
        points = tuple(parsed)
    elif "grid" in given:
        raw = section["grid"]
        _expect_type(raw, dict, f"{path}.grid")
        for axis in ("nu", "rc"):
            if not raw.get(axis):
                raise SpecError(f"{path}.grid.{axis}: required non-empty list is missing")
        grid_nu = tuple(
            _positive(v, f"{path}.grid.nu[{i}]") for i, v in enumerate(raw["nu"])
        )
        grid_rc = tuple(
            _positive(v, f"{path}.grid.rc[{i}]") for i, v in enumerate(raw["rc"])
        )
    elif "per_site" in given:
        raw = section["per_site"]
        _expect_type(raw, list, f"{path}.per_site")
        if len(raw) != n_sites:
            raise SpecError(
                f"{path}.per_site: expected {n_sites} entries, got {len(raw)}"
            )
        entries = []
        for i, entry in enumerate(raw):
            _expect_type(entry, dict, f"{path}.per_site[{i}]")
            shape = _positive(
                _get(entry, f"{path}.per_site[{i}]", "shape", required=True),
                f"{path}.per_site[{i}].shape",
            )
            scale = _positive(
                _get(entry, f"{path}.per_site[{i}]", "scale", required=True),
                f"{path}.per_site[{i}].scale",
            )
            entries.append(WeibullParams(shape, scale))
        per_site = tuple(entries)
    return NoiseSpec(enabled, points, grid_nu, grid_rc, per_site)


def _parse_trajectory(section, path="trajectory") -> TrajectorySpec:
    _expect_type(section, dict, path)
    t_final = _positive(_get(section, path, "t_final", required=True), f"{path}.t_final")
    sample_dt = _positive(_get(section, path, "sample_dt", default=0.02), f"{path}.sample_dt")
    epsilon = _positive(
        _get(section, path, "boundary_epsilon", default=1e-3), f"{path}.boundary_epsilon"
    )
    return TrajectorySpec(t_final, sample_dt, epsilon)


def _parse_ensemble(section, path="ensemble") -> EnsembleSpec:
    _expect_type(section, dict, path)
    master_seed = _expect_type(
        _get(section, path, "master_seed", required=True), int, f"{path}.master_seed"
    )
    n_traj = _get(section, path, "n_trajectories")
    if n_traj is not None:
        _expect_type(n_traj, int, f"{path}.n_trajectories")
        if n_traj < 1:
            raise SpecError(f"{path}.n_trajectories: must be >= 1, got {n_traj}")
    workers = _get(section, path, "workers")
    if workers is not None:
        _expect_type(workers, int, f"{path}.workers")
        if workers < 1:
            raise SpecError(f"{path}.workers: must be >= 1, got {workers}")
    return EnsembleSpec(master_seed, n_traj, workers)


def _parse_outputs(section, t_final: float, path="outputs") -> OutputSpec:
    if section is None:
        return OutputSpec()
    _expect_type(section, dict, path)
    plots_raw = _get(section, path, "plots", default=[])
    if isinstance(plots_raw, bool):
        plots = PLOT_KINDS if plots_raw else ()
    else:
        _expect_type(plots_raw, list, f"{path}.plots")
        for i, kind in enumerate(plots_raw):
            if kind not in PLOT_KINDS:
                raise SpecError(
                    f"{path}.plots[{i}]: unknown plot kind {kind!r}, choose from {PLOT_KINDS}"
                )
        plots = tuple(plots_raw)
    summary_time = _get(section, path, "summary_time")
    if summary_time is not None:
        summary_time = _positive(summary_time, f"{path}.summary_time")
        if summary_time > t_final:
            raise SpecError(
                f"{path}.summary_time: {summary_time} exceeds trajectory.t_final={t_final}"
            )
    fft_pairs = _expect_type(
        _get(section, path, "fft_pairs", default=False), bool, f"{path}.fft_pairs"
    )
    out_dir = _get(section, path, "out_dir")
    if out_dir is not None:
        _expect_type(out_dir, str, f"{path}.out_dir")
    return OutputSpec(plots, summary_time, fft_pairs, out_dir)


def parse_run_spec(source) -> RunSpec:
    """Parse and validate a run spec from a path, JSON string, or dict."""
    if isinstance(source, dict):
        data = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from exc
    _expect_type(data, dict, "run spec")
    for key in ("model", "noise", "trajectory", "ensemble"):
        if key not in data:
            raise SpecError(f"{key}: required section is missing")
    model = _parse_model(data["model"])
    noise = _parse_noise(data["noise"], model.n_sites)
    trajectory = _parse_trajectory(data["trajectory"])
    ensemble = _parse_ensemble(data["ensemble"])
    outputs = _parse_outputs(data.get("outputs"), trajectory.t_final)
    return RunSpec(model, noise, trajectory, ensemble, outputs)


def emit_run_spec(spec: RunSpec) -> dict:
    """Inverse of parse_run_spec: a JSON-serializable dict that parses back equal."""
    model: dict = {
        "n_sites": spec.model.n_sites,
        "n_excitations": spec.model.n_excitations,
        "J": spec.model.J,
        "Delta": spec.model.Delta,
        "h": spec.model.h,
    }
    if spec.model.initial_sites is not None:
        model["initial_sites"] = list(spec.model.initial_sites)
    noise: dict = {"enabled": spec.noise.enabled}
    if spec.noise.points is not None:
        noise["points"] = [{"nu": p.nu, "rc": p.rc} for p in spec.noise.points]
    if spec.noise.grid_nu is not None:
        noise["grid"] = {"nu": list(spec.noise.grid_nu), "rc": list(spec.noise.grid_rc)}
    if spec.noise.per_site is not None:
        noise["per_site"] = [
            {"shape": p.shape, "scale": p.scale} for p in spec.noise.per_site
        ]
    out: dict = {
        "model": model,
        "noise": noise,
        "trajectory": {
            "t_final": spec.trajectory.t_final,
            "sample_dt": spec.trajectory.sample_dt,
            "boundary_epsilon": spec.trajectory.boundary_epsilon,
        },
        "ensemble": {
            "master_seed": spec.ensemble.master_seed,
        },
    }
    if spec.ensemble.n_trajectories is not None:
        out["ensemble"]["n_trajectories"] = spec.ensemble.n_trajectories
    if spec.ensemble.workers is not None:
        out["ensemble"]["workers"] = spec.ensemble.workers
    outputs: dict = {}
    if spec.outputs.plots:
        outputs["plots"] = list(spec.outputs.plots)
    if spec.outputs.summary_time is not None:
        outputs["summary_time"] = spec.outputs.summary_time
    if spec.outputs.fft_pairs:
        outputs["fft_pairs"] = True
    if spec.outputs.out_dir is not None:
        outputs["out_dir"] = spec.outputs.out_dir
    if outputs:
        out["outputs"] = outputs
    return out


def resolved_initial_sites(model: ModelSpec) -> tuple[int, ...]:
    """Explicit sites, or a centered block of q sites (central site for q=1)."""
    if model.initial_sites is not None:
        return model.initial_sites
    start = (model.n_sites - model.n_excitations) // 2
    return tuple(range(start, start + model.n_excitations))


def default_trajectories(model: ModelSpec) -> int:
    # two-excitation sectors converge faster, matching the published sample sizes
    return 500 if model.n_excitations == 1 else 250


def point_label(point: NoisePoint | None) -> str:
    if point is None:
        return "noiseless"

    def fmt(x: float) -> str:
        return f"{x:g}".replace(".", "p").replace("-", "m")

    return f"nu{fmt(point.nu)}_rc{fmt(point.rc)}"


def noise_points(spec: RunSpec, expand_grid: bool) -> list[tuple[str, NoisePoint | None, NoiseConfig]]:
    """(label, point, NoiseConfig) triples for every ensemble the spec requests."""
    n = spec.model.n_sites
    if not spec.noise.enabled:
        return [("noiseless", None, NoiseConfig.disabled(n))]
    if spec.noise.per_site is not None:
        return [("per_site", None, NoiseConfig(per_site=spec.noise.per_site))]
    if spec.noise.grid_nu is not None:
        if not expand_grid:
            raise SpecError(
                "noise.grid: grids are run with the sweep command (or pass explicit points)"
            )
        points = [NoisePoint(nu, rc) for nu, rc in product(spec.noise.grid_nu, spec.noise.grid_rc)]
    else:
        points = list(spec.noise.points)
    out = []
    for p in points:
        config = NoiseConfig(per_site=(params_for_rate(p.nu, p.rc),) * n)
        out.append((point_label(p), p, config))
    return out


def make_components(spec: RunSpec) -> tuple[SectorBasis, SpectralHamiltonian, TrajectoryConfig]:
    """Build the sector, Hamiltonian, and trajectory config a spec describes."""
    basis = build_sector(spec.model.n_sites, spec.model.n_excitations)
    H = build_hamiltonian(
        basis, ModelParams(J=spec.model.J, Delta=spec.model.Delta, h=spec.model.h)
    )
    traj = TrajectoryConfig(
        initial_sites=resolved_initial_sites(spec.model),
        t_final=spec.trajectory.t_final,
        sample_dt=spec.trajectory.sample_dt,
        boundary_epsilon=spec.trajectory.boundary_epsilon,
    )
    return basis, H, traj
