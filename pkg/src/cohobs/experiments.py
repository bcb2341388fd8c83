"""Built-in experiment definitions for the `reproduce` command.

Three worked examples ship with the package:

* ex1 - a single-mode optical parametric oscillator. Covariance tracking is
  feasible with K = I but not with K = 3I; a mean-tracking design with
  K = 3I and a fixed two-channel noise matrix serves as the comparison run.
* ex2 - a two-mode plant whose internal entanglement is tracked by a
  covariance-tracking observer with a hand-picked 4x4 gain.
* ex3 - a marginally stable single-mode plant (one undamped mode) for which
  covariance tracking is impossible for every gain, although mean tracking
  works fine.

Simulation horizons and step sizes below are choices of this package, made
to expose the asymptotic regimes; they are recorded here, in the exported
config files, and nowhere else.
"""

from __future__ import annotations

import math

import numpy as np

EXAMPLE_NAMES = ("ex1", "ex2", "ex3")

_SQRT2 = math.sqrt(2.0)


def _eye(n):
    return np.eye(n).tolist()


def _scaled_eye(c, n):
    return (c * np.eye(n)).tolist()


def _zeros(n):
    return np.zeros((n, n)).tolist()


def ex1_plant() -> dict:
    return {
        "n_x": 2,
        "n_w": 2,
        "n_y": 2,
        "A": [[-0.4, 0.0], [0.0, -0.6]],
        "B": _scaled_eye(-1.0, 2),
        "C": _eye(2),
        "D": _eye(2),
    }


def ex2_plant() -> dict:
    return {
        "n_x": 4,
        "n_w": 4,
        "n_y": 4,
        "A": [
            [-0.4, 0.0, 0.0, 0.0],
            [0.0, -0.6, 0.0, 0.0],
            [1.0, 0.0, -1.4, 0.0],
            [0.0, 1.0, 0.0, -1.6],
        ],
        "B": [
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 2.0],
        ],
        "C": [
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, -1.0],
            [0.0, 0.0, -2.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ],
        "D": _eye(4),
    }


def ex3_plant() -> dict:
    return {
        "n_x": 2,
        "n_w": 2,
        "n_y": 2,
        "A": [[-1.0, 1.0], [1.0, -1.0]],
        "B": _scaled_eye(-_SQRT2, 2),
        "C": _scaled_eye(_SQRT2, 2),
        "D": _eye(2),
    }


def ex2_gain() -> list:
    return [
        [0.2, 0.0, -0.1, 0.0],
        [0.0, 0.05, 0.0, -0.1],
        [0.6, 0.0, -0.1, 0.0],
        [0.0, 0.4, 0.0, -0.1],
    ]


_ALL_METRICS = {"e_sigma_norm": True, "e_mu_norm": True, "nu_minus": True, "fidelity": True}


def builtin_config(name: str) -> dict:
    """JSON-ready configuration for one of the bundled examples."""
    if name == "ex1":
        return {
            "plant": ex1_plant(),
            "observer": {"K": _eye(2), "mode": "cmt", "n_yo": 2},
            "simulation": {
                "t_final": 6.0,
                "dt": 0.001,
                "sample_stride": 10,
                "mu_p0": [1.0, 1.0],
                "mu_o0": [0.0, 0.0],
                "sigma_p0": _scaled_eye(1.1, 2),
                "sigma_o0": _scaled_eye(2.0, 2),
                "sigma_po0": _zeros(2),
            },
            "metrics": dict(_ALL_METRICS),
        }
    if name == "ex2":
        return {
            "plant": ex2_plant(),
            "observer": {"K": ex2_gain(), "mode": "cmt", "n_yo": 4},
            "simulation": {
                "t_final": 10.0,
                "dt": 0.001,
                "sample_stride": 10,
                "mu_p0": [0.0, 0.0, 0.0, 0.0],
                "mu_o0": [0.0, 0.0, 0.0, 0.0],
                "sigma_p0": [
                    [1.1, 0.0, 0.0, 0.0],
                    [0.0, 1.1, 0.0, 0.0],
                    [0.0, 0.0, 2.0, 0.0],
                    [0.0, 0.0, 0.0, 2.0],
                ],
                "sigma_o0": _scaled_eye(2.0, 4),
                "sigma_po0": _zeros(4),
            },
            "metrics": dict(_ALL_METRICS),
        }
    if name == "ex3":
        return {
            "plant": ex3_plant(),
            "observer": {"K": _eye(2), "mode": "mt", "n_yo": 2},
            "simulation": {
                "t_final": 6.0,
                "dt": 0.001,
                "sample_stride": 10,
                "mu_p0": [1.0, 1.0],
                "mu_o0": [0.0, 0.0],
                "sigma_p0": _eye(2),
                "sigma_o0": _eye(2),
                "sigma_po0": _zeros(2),
            },
            "metrics": dict(_ALL_METRICS),
        }
    raise KeyError(f"unknown example {name!r}; expected one of {EXAMPLE_NAMES}")


def ex1_mt_config() -> dict:
    """Mean-tracking comparison run for ex1: K = 3I and a fixed noise matrix."""
    config = builtin_config("ex1")
    config["observer"] = {
        "K": _scaled_eye(3.0, 2),
        "mode": "mt",
        "n_yo": 2,
        "B_o": [[1.0, 0.0], [0.0, -2.0]],
    }
    return config


def ex1_infeasible_gain() -> np.ndarray:
    """The gain for which covariance tracking fails on ex1."""
    return 3.0 * np.eye(2)


def ex3_gain_grid() -> list[np.ndarray]:
    """Deterministic grid of 26 candidate gains for the impossible plant."""
    grid: list[np.ndarray] = []
    for c in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0):
        grid.append(c * np.eye(2))
    for a, b in ((0.5, 1.0), (1.0, 0.5), (1.0, 2.0), (2.0, 1.0), (0.5, 2.0), (2.0, 0.5), (1.5, 0.75), (3.0, 1.0)):
        grid.append(np.diag([a, b]))
    rot = np.array([[1.0, 1.0], [-1.0, 1.0]])
    for c in (0.5, 1.0, 1.5):
        grid.append(c * rot)
    sym = np.array([[1.0, 0.5], [0.5, 1.0]])
    for c in (0.5, 1.0, 2.0):
        grid.append(c * sym)
    grid.append(np.array([[1.0, 0.3], [-0.2, 0.8]]))
    grid.append(np.array([[2.0, -0.5], [0.5, 1.0]]))
    return grid
