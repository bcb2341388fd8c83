"""JSON experiment configuration: parsing with field-path error messages,
plus serialization helpers for matrices, observers, and synthesis reports.

Wire format: real matrices are row-major arrays of arrays; complex matrices
are {"re": [[...]], "im": [[...]]} pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ToolkitError
from .quadrature import QuadratureSystem, frobenius_norm
from .synthesis import ObserverModel, SynthesisReport

__all__ = [
    "ExperimentConfig",
    "MetricsSpec",
    "ObserverSpec",
    "SimulationSpec",
    "complex_matrix_to_json",
    "load_config",
    "matrix_to_json",
    "observer_from_json",
    "observer_to_json",
    "parse_config",
    "report_to_json",
]

DEFAULT_DT = 1e-3
DEFAULT_SAMPLE_STRIDE = 100


@dataclass(frozen=True, eq=False)
class ObserverSpec:
    """Observer request: gain, synthesis mode, output width, optional fixed B_o."""

    K: np.ndarray
    mode: str
    n_yo: int
    B_o: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    t_final: float
    dt: float
    sample_stride: int
    mu_p0: np.ndarray
    mu_o0: np.ndarray
    sigma_p0: np.ndarray
    sigma_o0: np.ndarray
    sigma_po0: np.ndarray


@dataclass(frozen=True)
class MetricsSpec:
    e_sigma_norm: bool = True
    e_mu_norm: bool = True
    nu_minus: bool = True
    fidelity: bool = True


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    plant: QuadratureSystem
    observer: ObserverSpec | None
    simulation: SimulationSpec
    metrics: MetricsSpec


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ConfigError(f"missing required field {path}.{key}")
    return data[key]


def _matrix(value, path: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} is not a numeric matrix")
    if arr.ndim != 2:
        raise ConfigError(f"{path} must be a matrix (list of rows)")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{path} contains non-finite entries")
    if rows is not None and arr.shape[0] != rows:
        raise ConfigError(f"{path} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ConfigError(f"{path} must have {cols} columns, got {arr.shape[1]}")
    return arr


def _vector(value, path: str, length: int | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} is not a numeric vector")
    if arr.ndim != 1:
        raise ConfigError(f"{path} must be a flat list of numbers")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{path} contains non-finite entries")
    if length is not None and arr.shape[0] != length:
        raise ConfigError(f"{path} must have length {length}, got {arr.shape[0]}")
    return arr


def _symmetric(arr: np.ndarray, path: str) -> np.ndarray:
    defect = frobenius_norm(arr - arr.T)
    if defect > 1e-8 * (1.0 + frobenius_norm(arr)):
        raise ConfigError(f"{path} must be symmetric (defect {defect:.3e})")
    return arr


def _parse_plant(data: dict) -> QuadratureSystem:
    plant = _require(data, "plant", "$")
    if not isinstance(plant, dict):
        raise ConfigError("$.plant must be an object")
    n_x = _require(plant, "n_x", "$.plant")
    n_w = _require(plant, "n_w", "$.plant")
    n_y = _require(plant, "n_y", "$.plant")
    for name, value in (("n_x", n_x), ("n_w", n_w), ("n_y", n_y)):
        if not isinstance(value, int) or value <= 0 or value % 2:
            raise ConfigError(f"$.plant.{name} must be a positive even integer, got {value!r}")
    A = _matrix(_require(plant, "A", "$.plant"), "$.plant.A", n_x, n_x)
    B = _matrix(_require(plant, "B", "$.plant"), "$.plant.B", n_x, n_w)
    C = _matrix(_require(plant, "C", "$.plant"), "$.plant.C", n_y, n_x)
    D = _matrix(_require(plant, "D", "$.plant"), "$.plant.D", n_y, n_w)
    try:
        return QuadratureSystem(A=A, B=B, C=C, D=D)
    except ToolkitError as exc:
        raise ConfigError(f"$.plant: {exc}")


def _parse_observer(data: dict, plant: QuadratureSystem) -> ObserverSpec | None:
    if "observer" not in data or data["observer"] is None:
        return None
    obs = data["observer"]
    if not isinstance(obs, dict):
        raise ConfigError("$.observer must be an object")
    K = _matrix(_require(obs, "K", "$.observer"), "$.observer.K", plant.n_x, plant.n_y)
    mode = obs.get("mode", "cmt")
    if mode not in ("mt", "cmt"):
        raise ConfigError(f"$.observer.mode must be 'mt' or 'cmt', got {mode!r}")
    n_yo = obs.get("n_yo", plant.n_y)
    if not isinstance(n_yo, int) or n_yo <= 0 or n_yo % 2:
        raise ConfigError(f"$.observer.n_yo must be a positive even integer, got {n_yo!r}")
    B_o = None
    if obs.get("B_o") is not None:
        B_o = _matrix(obs["B_o"], "$.observer.B_o", plant.n_x)
        if B_o.shape[1] % 2:
            raise ConfigError("$.observer.B_o must have an even number of columns")
    return ObserverSpec(K=K, mode=mode, n_yo=n_yo, B_o=B_o)


def _parse_simulation(data: dict, n_x: int) -> SimulationSpec:
    sim = _require(data, "simulation", "$")
    if not isinstance(sim, dict):
        raise ConfigError("$.simulation must be an object")
    t_final = _require(sim, "t_final", "$.simulation")
    dt = sim.get("dt", DEFAULT_DT)
    stride = sim.get("sample_stride", DEFAULT_SAMPLE_STRIDE)
    if not isinstance(t_final, (int, float)) or t_final < 0:
        raise ConfigError(f"$.simulation.t_final must be a nonnegative number, got {t_final!r}")
    if not isinstance(dt, (int, float)) or dt <= 0:
        raise ConfigError(f"$.simulation.dt must be positive, got {dt!r}")
    if not isinstance(stride, int) or stride < 1:
        raise ConfigError(f"$.simulation.sample_stride must be a positive integer, got {stride!r}")
    mu_p0 = _vector(_require(sim, "mu_p0", "$.simulation"), "$.simulation.mu_p0", n_x)
    mu_o0 = _vector(_require(sim, "mu_o0", "$.simulation"), "$.simulation.mu_o0", n_x)
    sigma_p0 = _symmetric(
        _matrix(_require(sim, "sigma_p0", "$.simulation"), "$.simulation.sigma_p0", n_x, n_x),
        "$.simulation.sigma_p0",
    )
    sigma_o0 = _symmetric(
        _matrix(_require(sim, "sigma_o0", "$.simulation"), "$.simulation.sigma_o0", n_x, n_x),
        "$.simulation.sigma_o0",
    )
    if sim.get("sigma_po0") is None:
        sigma_po0 = np.zeros((n_x, n_x))
    else:
        sigma_po0 = _matrix(sim["sigma_po0"], "$.simulation.sigma_po0", n_x, n_x)
    return SimulationSpec(
        t_final=float(t_final),
        dt=float(dt),
        sample_stride=stride,
        mu_p0=mu_p0,
        mu_o0=mu_o0,
        sigma_p0=sigma_p0,
        sigma_o0=sigma_o0,
        sigma_po0=sigma_po0,
    )


def _parse_metrics(data: dict) -> MetricsSpec:
    metrics = data.get("metrics", {})
    if not isinstance(metrics, dict):
        raise ConfigError("$.metrics must be an object of booleans")
    kwargs = {}
    for key in ("e_sigma_norm", "e_mu_norm", "nu_minus", "fidelity"):
        if key in metrics:
            if not isinstance(metrics[key], bool):
                raise ConfigError(f"$.metrics.{key} must be a boolean")
            kwargs[key] = metrics[key]
    unknown = set(metrics) - {"e_sigma_norm", "e_mu_norm", "nu_minus", "fidelity"}
    if unknown:
        raise ConfigError(f"$.metrics has unknown keys {sorted(unknown)}")
    return MetricsSpec(**kwargs)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a configuration dictionary (see the README for the schema)."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    plant = _parse_plant(data)
    observer = _parse_observer(data, plant)
    simulation = _parse_simulation(data, plant.n_x)
    metrics = _parse_metrics(data)
    return ExperimentConfig(plant=plant, observer=observer, simulation=simulation, metrics=metrics)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return parse_config(data)


def matrix_to_json(M: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(M)]


def complex_matrix_to_json(M: np.ndarray) -> dict:
    M = np.atleast_2d(M)
    return {"re": matrix_to_json(M.real), "im": matrix_to_json(M.imag)}


def _complex_matrix_from_json(data: dict, path: str) -> np.ndarray:
    if not isinstance(data, dict) or "re" not in data or "im" not in data:
        raise ConfigError(f"{path} must be an object with 're' and 'im' matrices")
    re = _matrix(data["re"], f"{path}.re")
    im = _matrix(data["im"], f"{path}.im")
    if re.shape != im.shape:
        raise ConfigError(f"{path}: 're' and 'im' shapes differ")
    return re + 1j * im


def observer_to_json(obs: ObserverModel) -> dict:
    doc = {
        "K": matrix_to_json(obs.K),
        "B_o": matrix_to_json(obs.B_o) if obs.B_o.size else [[] for _ in range(obs.n_x)],
        "C_o": matrix_to_json(obs.C_o),
        "D_o": matrix_to_json(obs.D_o),
        "n_wo": obs.n_wo,
        "n_yo": obs.n_yo,
    }
    if obs.Lambda_o is not None and obs.Lambda_o.size:
        doc["Lambda_o"] = complex_matrix_to_json(obs.Lambda_o)
    return doc


def observer_from_json(data: dict) -> ObserverModel:
    """Rebuild an observer from a synthesis artifact."""
    if not isinstance(data, dict):
        raise ConfigError("observer document must be an object")
    K = _matrix(_require(data, "K", "$.observer"), "$.K")
    B_o = _matrix(_require(data, "B_o", "$.observer"), "$.B_o") if data.get("B_o") else None
    if B_o is None or B_o.size == 0:
        B_o = np.zeros((K.shape[0], int(data.get("n_wo", 0))))
    C_o = _matrix(_require(data, "C_o", "$.observer"), "$.C_o")
    D_o = _matrix(_require(data, "D_o", "$.observer"), "$.D_o")
    Lambda_o = None
    if data.get("Lambda_o") is not None:
        Lambda_o = _complex_matrix_from_json(data["Lambda_o"], "$.Lambda_o")
    try:
        return ObserverModel(K=K, B_o=B_o, C_o=C_o, D_o=D_o, Lambda_o=Lambda_o)
    except ToolkitError as exc:
        raise ConfigError(f"observer document invalid: {exc}")


def report_to_json(report: SynthesisReport) -> dict:
    doc = {
        "mode": report.mode,
        "feasible": report.feasible,
        "hurwitz_margin": float(report.hurwitz_margin),
        "residuals": {k: float(v) for k, v in sorted(report.residuals.items())},
    }
    if report.psd_min_eigenvalue is not None:
        doc["psd_min_eigenvalue"] = float(report.psd_min_eigenvalue)
    if report.sigma_gap is not None:
        doc["sigma_gap"] = matrix_to_json(report.sigma_gap)
    if report.noise_gram_required is not None:
        doc["noise_gram_required"] = matrix_to_json(report.noise_gram_required)
    if report.reason is not None:
        doc["reason"] = report.reason
    return doc
