"""Jump-process simulation from a generator and spectral field reconstruction.

Paths are piecewise constant and right-continuous: the state on
``[jump_times[k], jump_times[k+1])`` is ``states[k]``, and the last state
holds until the horizon.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .generators import GeneratorMatrix
from .spaces import EigenSequence, SpectralVector, image_space, tau_inverse, weighted_norm


@dataclass(frozen=True)
class Trajectory:
    jump_times: np.ndarray
    states: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.jump_times, dtype=float)
        s = np.asarray(self.states, dtype=int)
        if t.size == 0 or t[0] != 0.0 or t.shape != s.shape:
            raise ValueError("a trajectory starts at time 0 with one state per interval")
        if np.any(np.diff(t) <= 0) or t[-1] > self.horizon:
            raise ValueError("jump times must increase strictly and stay below the horizon")
        object.__setattr__(self, "jump_times", t)
        object.__setattr__(self, "states", s)

    @property
    def n_jumps(self) -> int:
        return self.states.size - 1

    def durations(self) -> np.ndarray:
        return np.diff(np.append(self.jump_times, self.horizon))

    def state_at(self, t):
        """State at time(s) t, right-continuous at the jumps."""
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise ValueError("time outside [0, horizon]")
        k = np.searchsorted(self.jump_times, t, side="right") - 1
        return self.states[k]

    def occupation(self, n_states: int) -> np.ndarray:
        """Fraction of ``[0, horizon]`` spent in each state."""
        occ = np.bincount(self.states, weights=self.durations(), minlength=n_states)
        return occ / self.horizon

    def to_csv(self, coords=None) -> str:
        """CSV with columns ``t, state`` and, given per-state coordinates, ``x0, x1, ...``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["t", "state"]
        if coords is not None:
            coords = np.atleast_2d(np.asarray(coords, dtype=float).T).T
            header += [f"x{j}" for j in range(coords.shape[1])]
        w.writerow(header)
        for t, s in zip(self.jump_times, self.states):
            row = [repr(float(t)), int(s)]
            if coords is not None:
                row += [repr(float(c)) for c in coords[s]]
            w.writerow(row)
        return buf.getvalue()


def simulate(gen: GeneratorMatrix, x0: int, T: float, seed) -> Trajectory:
    """Exact jump-chain simulation: exponential holding times of rate ``A(x,x)``,
    then a jump to ``y`` with probability ``-A(x,y) / A(x,x)``.
    """
    if not T > 0:
        raise ValueError("horizon must be positive")
    A = np.asarray(gen.A, dtype=float)
    n = A.shape[0]
    if not 0 <= x0 < n:
        raise ValueError("initial state out of range")
    rng = np.random.default_rng(seed)
    rates = np.diag(A).copy()
    jump = np.where(np.eye(n, dtype=bool), 0.0, -A)
    jump = np.clip(jump, 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        cum = np.cumsum(jump, axis=1) / jump.sum(axis=1, keepdims=True)
    times, states = [0.0], [x0]
    t, x = 0.0, x0
    while True:
        r = rates[x]
        if r <= 0:
            break  # absorbing
        t += rng.exponential(1.0 / r)
        if t >= T:
            break
        x = int(min(np.searchsorted(cum[x], rng.random(), side="right"), n - 1))
        times.append(t)
        states.append(x)
    return Trajectory(np.array(times), np.array(states), float(T))


def stationary_start(mu, seed) -> int:
    """Draw an initial state from mu (its own stream, separate from the path's)."""
    mu = np.asarray(mu, dtype=float)
    return int(np.random.default_rng(seed).choice(mu.size, p=mu))


@dataclass
class InvarianceCheck:
    tv: float
    occupation: np.ndarray
    inconclusive: bool


def empirical_invariance(traj: Trajectory, mu, min_jumps: int = 100) -> InvarianceCheck:
    """Total-variation distance between the time-occupation measure and mu."""
    mu = np.asarray(mu, dtype=float)
    occ = traj.occupation(mu.size)
    tv = 0.5 * float(np.sum(np.abs(occ - mu)))
    return InvarianceCheck(tv, occ, traj.n_jumps < min_jumps)


def lag_transition_counts(traj: Trajectory, lag: float, n_states: int) -> np.ndarray:
    """Counts of ``(X_{k lag}, X_{(k+1) lag})`` pairs over the horizon."""
    if not lag > 0:
        raise ValueError("lag must be positive")
    grid = np.arange(0.0, traj.horizon + 1e-12 * traj.horizon, lag)
    s = traj.state_at(grid[grid <= traj.horizon])
    counts = np.zeros((n_states, n_states), dtype=int)
    np.add.at(counts, (s[:-1], s[1:]), 1)
    return counts


def jump_rate_estimate(traj: Trajectory, state: int) -> tuple[float, float]:
    """Jumps out of ``state`` per unit time spent there, with its Poisson SE."""
    time_in = float(traj.durations()[traj.states == state].sum())
    leaving = int(np.sum(traj.states[:-1] == state))
    if time_in == 0:
        return math.nan, math.inf
    return leaving / time_in, math.sqrt(max(leaving, 1)) / time_in


@dataclass(frozen=True)
class FieldTrajectory:
    """Coefficient snapshots ``X(t)`` of ``Y_t = sum_i X_i(t) phi_i`` and their norms."""

    times: np.ndarray
    coeffs: np.ndarray
    norms: np.ndarray
    lambdas: np.ndarray
    level: int

    def level_norms(self) -> np.ndarray:
        """The same norms computed from the level-m coefficients ``a_i = lambda_i^-m X_i``."""
        eig = EigenSequence(self.lambdas)
        return np.array([tau_inverse(x, eig, self.level).norm() for x in self.coeffs])


def reconstruct_field(traj: Trajectory, coords, eig: EigenSequence, m: int) -> FieldTrajectory:
    """Attach the field ``Y_t = sum_i X_i(t) phi_i`` to a coordinate-valued path.

    ``coords[s]`` is the point of state ``s`` in the truncated space; the norm
    of ``Y_t`` at level m is the ``l^2_(lambda^-2m)`` norm of ``X(t)``.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.shape[1] != len(eig):
        raise ValueError(f"states have {coords.shape[1]} coordinates, eigen sequence has {len(eig)}")
    X = coords[traj.states]
    space = image_space(eig, m)
    norms = np.array([weighted_norm(x, space) for x in X])
    return FieldTrajectory(traj.jump_times, X, norms, eig.lambdas, m)
