"""Simplex utilities shared by the optimizers: grids, projections, line search."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np


@dataclass
class OptimizerConfig:
    """Knobs for every numerical optimizer in the package.

    ``grid_step=None`` picks the adaptive simplex grid for the inner
    maximization (1e-2 up to three support symbols, 5e-2 up to six, random
    Dirichlet samples beyond).  ``seed`` drives every random start.
    """

    seed: int = 0
    n_starts: int = 8
    f_starts: int = 4
    grid_step: float | None = None
    eta: float = 1e-9
    max_iter: int = 400
    tol: float = 1e-13
    fd_step: float = 1e-6
    oracle_tol: float = 1e-4
    feasibility_tol: float = 1e-9
    decomposition_points: int = 400
    polish: bool = True
    verify_oracle: bool = False

    def rng(self, *stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, *stream])


@lru_cache(maxsize=32)
def _compositions(k: int, n: int) -> np.ndarray:
    """All k-tuples of non-negative integers summing to n, first entry descending."""
    parts = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([n], dtype=np.int64)
    for _ in range(k - 1):
        counts = rem + 1
        idx = np.repeat(np.arange(rem.size), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        first = rem[idx] - offs
        parts = np.column_stack([parts[idx], first])
        rem = rem[idx] - first
    out = np.column_stack([parts, rem])
    out.setflags(write=False)
    return out


def simplex_grid(k: int, n: int) -> np.ndarray:
    """Points of the (k-1)-simplex with coordinates in multiples of 1/n."""
    return _compositions(k, n) / n


def grid_size(k: int, n: int) -> int:
    return comb(n + k - 1, k - 1)


def resolution_for(k: int, max_points: int) -> int:
    """Largest n such that the k-simplex grid at step 1/n has at most max_points."""
    n = 1
    while grid_size(k, n + 1) <= max_points:
        n += 1
    return n


def project_simplex(y: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection of the rows of ``y`` onto {x >= 0, sum x = radius}."""
    y = np.atleast_2d(y)
    u = -np.sort(-y, axis=1)
    css = np.cumsum(u, axis=1) - radius
    ind = np.arange(1, y.shape[1] + 1)
    cond = u - css / ind > 0
    rho = y.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(len(y)), rho] / (rho + 1)
    return np.maximum(y - theta[:, None], 0.0)


def project_interior(y: np.ndarray, eta: float) -> np.ndarray:
    """Projection onto the eta-interior {x >= eta, sum x = 1} of the simplex."""
    k = y.shape[-1]
    return eta + project_simplex(y - eta, 1.0 - k * eta)


def clamp_interior(x: np.ndarray, eta: float) -> np.ndarray:
    """Affine shrink of simplex points into the eta-interior."""
    k = x.shape[-1]
    return eta + (1.0 - k * eta) * x


def projected_ascent(fun, grad, x0, eta, max_iter=400, tol=1e-13):
    """Projected-gradient ascent with Armijo backtracking on the eta-simplex.

    ``fun`` and ``grad`` act on a single point.  Returns ``(x, value, iters)``.
    """
    x = project_interior(np.asarray(x0, dtype=float)[None, :], eta)[0]
    fx = fun(x)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        g = grad(x)
        if not np.all(np.isfinite(g)):
            break
        improved = False
        while step > 1e-16:
            cand = project_interior((x + step * g)[None, :], eta)[0]
            fc = fun(cand)
            if np.isfinite(fc) and fc >= fx + 1e-4 * g @ (cand - x):
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        moved = np.max(np.abs(cand - x))
        gain = fc - fx
        x, fx = cand, fc
        step = min(step * 2.0, 1e6)
        if moved < 1e-14 or gain < tol:
            break
    return x, fx, it


def golden_section(fun, a: float, b: float, iters: int = 60):
    """Golden-section search for the maximum of a unimodal ``fun`` on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)
