"""The inner maximization f and its companions.

For a channel quadruple (P_{Y|X}, P_{Z|X}, Q_{Y|X}, Q_{Z|X}) and reference law
Q_X, ``f(P_X)`` is the largest value of

    D(P_Y || Qhat_Y) - D(P_Z || Qhat_Z)

over all Qhat_X << Q_X, where the hatted outputs are Qhat_X pushed through the
Q-channels.  The objective is a difference of convex functions of Qhat_X, so
:func:`f_max` seeds projected-gradient ascent from a simplex grid and reports
the best witness it found: the value is always attained by the witness and is
therefore a certified lower bound on the supremum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, ValidationError
from .optimize import (
    OptimizerConfig,
    clamp_interior,
    project_interior,
    projected_ascent,
    simplex_grid,
)
from .prob import JointTable, as_kernel, as_simplex, ext_sub, kl_divergence


@dataclass(frozen=True)
class ChannelQuad:
    p_y_given_x: np.ndarray
    p_z_given_x: np.ndarray
    q_y_given_x: np.ndarray
    q_z_given_x: np.ndarray

    def __post_init__(self):
        for name in ("p_y_given_x", "p_z_given_x", "q_y_given_x", "q_z_given_x"):
            object.__setattr__(self, name, as_kernel(getattr(self, name), name))
        n = {k.shape[0] for k in self.kernels()}
        if len(n) != 1:
            raise ValidationError(f"ChannelQuad: kernels disagree on |X|: {sorted(n)}")
        if self.p_y_given_x.shape != self.q_y_given_x.shape:
            raise ValidationError("ChannelQuad: P_{Y|X} and Q_{Y|X} shapes differ")
        if self.p_z_given_x.shape != self.q_z_given_x.shape:
            raise ValidationError("ChannelQuad: P_{Z|X} and Q_{Z|X} shapes differ")

    def kernels(self):
        return self.p_y_given_x, self.p_z_given_x, self.q_y_given_x, self.q_z_given_x

    @property
    def n_x(self) -> int:
        return self.p_y_given_x.shape[0]


@dataclass(frozen=True)
class FResult:
    value: float
    witness_qhat: np.ndarray
    boundary_flag: bool
    cap: float | None = None
    skipped: int = 0
    diagnostics: dict = field(default_factory=dict)


def _kl_rows(p: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """D(p || q) for every row q of ``qs``."""
    s = p > 0
    ps, q = p[s], qs[:, s]
    with np.errstate(divide="ignore"):
        out = np.sum(ps * (np.log(ps) - np.log(q)), axis=1)
    out[np.any(q <= 0, axis=1)] = np.inf
    return out


class _Problem:
    """Precomputed pieces of the objective for one (P_X, quad, Q_X)."""

    def __init__(self, p_x, quad: ChannelQuad, q_x):
        self.p_x = p_x
        self.quad = quad
        self.support = np.flatnonzero(q_x > 0)
        self.p_y = p_x @ quad.p_y_given_x
        self.p_z = p_x @ quad.p_z_given_x
        self.b = quad.q_y_given_x[self.support]
        self.e = quad.q_z_given_x[self.support]

    def batch(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Objective on support-coordinates ``v`` (rows); also an indeterminate mask."""
        dy = _kl_rows(self.p_y, v @ self.b)
        dz = _kl_rows(self.p_z, v @ self.e)
        bad = np.isinf(dy) & np.isinf(dz)
        with np.errstate(invalid="ignore"):
            val = dy - dz
        val[bad] = np.nan
        return val, bad

    def value(self, v: np.ndarray) -> float:
        val, _ = self.batch(v[None, :])
        return float(val[0])

    def grad(self, v: np.ndarray) -> np.ndarray:
        qy = v @ self.b
        qz = v @ self.e
        with np.errstate(divide="ignore", invalid="ignore"):
            gy = np.where(self.p_y > 0, self.p_y / qy, 0.0)
            gz = np.where(self.p_z > 0, self.p_z / qz, 0.0)
        return -(self.b @ gy) + self.e @ gz

    def full(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.quad.n_x)
        out[self.support] = v
        return out


def _check_inputs(p_x, quad: ChannelQuad, q_x):
    p_x = as_simplex(p_x, "p_x")
    q_x = as_simplex(q_x, "q_x")
    if p_x.size != quad.n_x or q_x.size != quad.n_x:
        raise ValidationError(
            f"|X| mismatch: p_x {p_x.size}, q_x {q_x.size}, channels {quad.n_x}"
        )
    return p_x, q_x


def f_objective(qhat_x, p_x, quad: ChannelQuad, q_x) -> float:
    """D(P_Y || Qhat_Y) - D(P_Z || Qhat_Z) at a single Qhat_X << Q_X."""
    p_x, q_x = _check_inputs(p_x, quad, q_x)
    qhat_x = as_simplex(qhat_x, "qhat_x")
    if qhat_x.shape != q_x.shape:
        raise ValidationError("qhat_x and q_x have different lengths")
    if np.any((q_x <= 0) & (qhat_x > 0)):
        raise ValidationError("qhat_x is not absolutely continuous w.r.t. q_x")
    dy = kl_divergence(p_x @ quad.p_y_given_x, qhat_x @ quad.q_y_given_x)
    dz = kl_divergence(p_x @ quad.p_z_given_x, qhat_x @ quad.q_z_given_x)
    return ext_sub(dy, dz)


def _seed_grid(k: int, cfg: OptimizerConfig) -> np.ndarray:
    step = cfg.grid_step
    if step is None:
        if k <= 3:
            step = 1e-2
        elif k <= 6:
            step = 5e-2
    if step is not None:
        return simplex_grid(k, int(round(1.0 / step)))
    rng = cfg.rng(k, 7)
    return np.vstack([np.eye(k), np.full((1, k), 1.0 / k), rng.dirichlet(np.ones(k), 4000)])


def _pick_seeds(points: np.ndarray, values: np.ndarray, n: int) -> list[int]:
    """Indices of the n best grid points, suppressing near-duplicates."""
    order = np.argsort(-values, kind="stable")
    order = order[np.isfinite(values[order])]
    chosen: list[int] = []
    for i in order:
        if all(np.max(np.abs(points[i] - points[j])) > 0.05 for j in chosen):
            chosen.append(int(i))
        if len(chosen) >= n:
            break
    return chosen


def f_max(p_x, quad: ChannelQuad, q_x, cfg: OptimizerConfig | None = None, coupling=None) -> FResult:
    """Maximize the f objective over Qhat_X << Q_X.

    ``coupling`` optionally supplies ``(p_yz_given_x, q_y_given_z)`` where
    ``p_yz_given_x`` has shape (|X|, |Y|, |Z|); the cap
    D(P_YZ || P_Z Q_{Y|Z}) is then attached to the result.
    """
    cfg = cfg or OptimizerConfig()
    p_x, q_x = _check_inputs(p_x, quad, q_x)
    prob = _Problem(p_x, quad, q_x)
    k = prob.support.size

    if k == 1:
        v = np.ones(1)
        value = prob.value(v)
        if np.isnan(value):
            raise EvaluationError("f objective is inf - inf at the only admissible Qhat_X")
        return FResult(value, prob.full(v), False, _cap(p_x, coupling))

    grid = clamp_interior(_seed_grid(k, cfg), cfg.eta)
    values, bad = prob.batch(grid)
    skipped = int(bad.sum())
    if skipped == len(grid):
        raise EvaluationError("f objective is inf - inf at every grid point")

    ref = q_x[prob.support] / q_x[prob.support].sum()
    seeds = [grid[i] for i in _pick_seeds(grid, values, cfg.f_starts)] + [ref]

    best_v, best_val = None, -np.inf
    finite_best = np.nanmax(values)
    if np.isposinf(finite_best):
        i = int(np.flatnonzero(np.isposinf(values))[0])
        best_v, best_val = grid[i], np.inf
    else:
        for s in seeds:
            v, val, _ = projected_ascent(prob.value, prob.grad, s, cfg.eta, cfg.max_iter, cfg.tol)
            if np.isfinite(val) and val > best_val:
                best_v, best_val = v, val
        i = int(np.nanargmax(values))
        if best_v is None or values[i] > best_val:
            best_v, best_val = grid[i], float(values[i])

    boundary = bool(np.min(best_v) <= 2 * cfg.eta)
    witness = prob.full(best_v)
    return FResult(
        float(best_val),
        witness,
        boundary,
        _cap(p_x, coupling),
        skipped,
        {"grid_points": len(grid), "starts": len(seeds)},
    )


def f_local(p_x, quad: ChannelQuad, q_x, qhat0, cfg: OptimizerConfig) -> tuple[float, np.ndarray]:
    """Warm-started local ascent from ``qhat0``; no grid, no validation."""
    prob = _Problem(p_x, quad, q_x)
    v0 = qhat0[prob.support]
    v0 = v0 / v0.sum()
    v, val, _ = projected_ascent(prob.value, prob.grad, v0, cfg.eta, cfg.max_iter, cfg.tol)
    return val, prob.full(v)


def grad_wrt_p(p_x, qhat_x, quad: ChannelQuad) -> np.ndarray:
    """Gradient in P_X of the objective at a fixed Qhat_X.

    By the envelope theorem this is a (super)gradient of f at P_X when
    ``qhat_x`` is a maximizer.
    """
    py = p_x @ quad.p_y_given_x
    pz = p_x @ quad.p_z_given_x
    qy = qhat_x @ quad.q_y_given_x
    qz = qhat_x @ quad.q_z_given_x
    tiny = 1e-300
    ly = np.log(np.maximum(py, tiny)) - np.log(np.maximum(qy, tiny))
    lz = np.log(np.maximum(pz, tiny)) - np.log(np.maximum(qz, tiny))
    return quad.p_y_given_x @ ly - quad.p_z_given_x @ lz


def _cap(p_x, coupling) -> float | None:
    if coupling is None:
        return None
    p_yz_given_x, q_y_given_z = coupling
    p_yz_given_x = np.asarray(p_yz_given_x, dtype=float)
    nx, ny, nz = p_yz_given_x.shape
    joint = JointTable(("U", "X", "Y", "Z"), (p_x[:, None, None] * p_yz_given_x)[None])
    return thm2_cap(joint, q_y_given_z)


def thm2_cap(p_uxyz: JointTable, q_y_given_z) -> float:
    """D(P_{YZU} || P_{UZ} Q_{Y|Z}) for a joint table with axes U, X, Y, Z."""
    for a in ("U", "X", "Y", "Z"):
        p_uxyz.index(a)
    t = p_uxyz.reorder(("U", "X", "Y", "Z")).table
    q = as_kernel(q_y_given_z, "q_y_given_z")
    nu, nx, ny, nz = t.shape
    if q.shape != (nz, ny):
        raise ValidationError(f"q_y_given_z has shape {q.shape}, expected {(nz, ny)}")
    p_uyz = t.sum(axis=1)
    p_uz = p_uyz.sum(axis=1)
    ref = p_uz[:, None, :] * q.T[None, :, :]
    return kl_divergence(p_uyz.ravel(), ref.ravel())


def gaussian_unbounded_check(sigma_q_y: float, sigma_q_z: float) -> bool:
    """True when f is +inf for additive-Gaussian channels (sigma_Q,Y|X < sigma_Q,Z|X)."""
    if not (sigma_q_y > 0 and sigma_q_z > 0):
        raise ValidationError("noise standard deviations must be positive")
    return bool(sigma_q_y < sigma_q_z)
