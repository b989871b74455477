"""Trajectory and series files.

Binary layout: little-endian header ``int64 n, float64 L, float64 dt``
followed by row-major float64 rows ``t, u_0 .. u_{n-1}``.
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from ..errors import InvalidArgument
from .solvers import EvolutionConfig, Trajectory, conserved_quantities

_HEADER = struct.Struct("<qdd")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t"] + [f"u{j}" for j in range(traj.states.shape[1])])
        for t, u in zip(traj.times, traj.states):
            out.writerow([repr(float(t))] + [repr(float(v)) for v in u])


def read_trajectory_csv(path, config: EvolutionConfig) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return _from_rows(data, config)


def write_trajectory_binary(traj: Trajectory, path) -> None:
    cfg = traj.config
    rows = np.column_stack([traj.times, traj.states]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(cfg.grid_points, cfg.domain_length, cfg.dt))
        fh.write(rows.tobytes(order="C"))


def read_trajectory_binary(path, config: EvolutionConfig = None) -> Trajectory:
    """Read a binary trajectory; ``config`` defaults to a KdV config from the header."""
    with open(path, "rb") as fh:
        n, L, dt = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size % (n + 1):
        raise InvalidArgument("binary trajectory size does not match its header")
    rows = data.reshape(-1, n + 1)
    if config is None:
        t_end = max(float(rows[-1, 0]), dt)
        config = EvolutionConfig(domain_length=L, grid_points=int(n), dt=dt, t_end=t_end)
    elif config.grid_points != n:
        raise InvalidArgument("config and file disagree on grid_points")
    return _from_rows(rows, config)


def _from_rows(rows: np.ndarray, config: EvolutionConfig) -> Trajectory:
    times = rows[:, 0].copy()
    states = rows[:, 1:].copy()
    mass, energy = zip(*(conserved_quantities(u, config) for u in states))
    return Trajectory(times, states, config, {"mass": np.array(mass), "energy": np.array(energy)})


def write_series_csv(path, times, lam, asymmetry, drift) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "lambda", "asymmetry", "drift"])
        for row in zip(times, lam, asymmetry, drift):
            out.writerow([repr(float(v)) for v in row])
