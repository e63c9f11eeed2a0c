"""Brute-force reference for the inner maximization on small alphabets.

Scans Qhat_X over a fine grid of the closed simplex on supp(Q_X) and refines
the best cell with golden-section line searches.  Slow but assumption-free;
used to audit :func:`dhtbound.inner.f_max`.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .inner import ChannelQuad, f_objective
from .optimize import golden_section, simplex_grid

ORACLE_STEP = 1e-3


def _objective_rows(qhat: np.ndarray, py, pz, b, e) -> np.ndarray:
    """D(py || qhat B) - D(pz || qhat E) per row; nan where undefined or -inf."""
    qy = qhat @ b
    qz = qhat @ e
    with np.errstate(divide="ignore", invalid="ignore"):
        dy = np.where(py > 0, py * np.log(py / qy), 0.0).sum(axis=1)
        dz = np.where(pz > 0, pz * np.log(pz / qz), 0.0).sum(axis=1)
        out = dy - dz
    return np.where(np.isinf(dy) & np.isinf(dz), np.nan, out)


def f_grid_oracle(p_x, quad: ChannelQuad, q_x, step: float = ORACLE_STEP) -> tuple[float, np.ndarray]:
    """Grid-plus-refinement maximum of the f objective; supports |supp Q_X| <= 3."""
    p_x = np.asarray(p_x, dtype=float)
    q_x = np.asarray(q_x, dtype=float)
    sup = np.flatnonzero(q_x > 0)
    k = sup.size
    py = p_x @ quad.p_y_given_x
    pz = p_x @ quad.p_z_given_x
    b = quad.q_y_given_x[sup]
    e = quad.q_z_given_x[sup]

    def one(v):
        val = _objective_rows(np.asarray(v)[None, :], py, pz, b, e)[0]
        return -np.inf if np.isnan(val) else val

    def embed(v):
        full = np.zeros(q_x.size)
        full[sup] = v
        return full

    if k == 1:
        v = np.ones(1)
        return one(v), embed(v)
    if k > 3:
        raise ValidationError("grid oracle supports at most three support symbols")

    n = int(round(1.0 / step))
    grid = simplex_grid(k, n)
    vals = _objective_rows(grid, py, pz, b, e)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i = int(np.argmax(vals))
    best_v, best = grid[i].copy(), float(vals[i])
    if np.isposinf(best):
        return best, embed(best_v)

    if k == 2:
        lo, hi = max(best_v[0] - step, 0.0), min(best_v[0] + step, 1.0)
        t, val = golden_section(lambda t: one(np.array([t, 1.0 - t])), lo, hi)
        if val > best:
            best_v, best = np.array([t, 1.0 - t]), val
        return best, embed(best_v)

    # k == 3: cyclic searches along the three edge directions
    dirs = [np.array(d, dtype=float) for d in ((1, -1, 0), (1, 0, -1), (0, 1, -1))]
    for _ in range(20):
        start = best
        for d in dirs:
            pos = d > 0
            neg = d < 0
            hi = min(step, best_v[neg].min())
            lo = -min(step, best_v[pos].min())
            if hi - lo <= 0:
                continue
            base = best_v.copy()
            t, val = golden_section(lambda t: one(base + t * d), lo, hi)
            if val > best:
                best_v, best = np.clip(base + t * d, 0.0, None), val
        if best - start < 1e-15:
            break
    return best, embed(best_v)


def verify_f_values(p_x, quad: ChannelQuad, q_x, dec_result, cfg) -> dict:
    """Compare the inner values at a decomposition witness against the grid oracle."""
    if np.sum(np.asarray(q_x) > 0) > 3:
        return {"checked": 0, "skipped": "support of Q_X larger than 3"}
    gaps = []
    for w, post, qhat in zip(dec_result.weights, dec_result.posteriors, dec_result.payloads):
        if qhat is None or w <= 0:
            continue
        ours = f_objective(qhat, post / post.sum(), quad, q_x)
        ref, _ = f_grid_oracle(post, quad, q_x)
        gaps.append(ref - ours)
    worst = max(gaps, default=0.0)
    return {"checked": len(gaps), "max_shortfall": worst, "ok": bool(worst <= cfg.oracle_tol)}
