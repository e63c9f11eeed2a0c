"""Rate-constrained maximization over decompositions of P_X.

Every single-letter bound in the package has the form

    max_{P_{U|X}}  sum_u P(u) phi(P_{X|U=u})
    s.t.           total_j - sum_u P(u) h_j(P_{X|U=u}) <= R   for each j

because the mutual-information constraints I(U;X|Y) = H(X|Y) - H(X|Y,U) are
weighted sums of per-posterior conditional entropies.  The solver works in
two stages:

1. a linear program over mixing weights of a fixed grid of candidate
   posteriors (a global search on the grid; basic solutions use at most
   |X|+2 atoms),
2. multi-start local refinement of P_{U|X} with SLSQP, followed by a
   feasibility projection that mixes the channel toward a constant U.

The reported value is recomputed exactly at the final witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize

from .optimize import OptimizerConfig, resolution_for, simplex_grid

Vec = Callable[[np.ndarray], np.ndarray]


@dataclass
class RateTerm:
    """One constraint ``total - sum_u P(u) h(p_u) <= rate``."""

    name: str
    h: Vec  # rows of posteriors -> values
    grad: Callable[[np.ndarray], np.ndarray]
    total: float


@dataclass
class Objective:
    """Per-posterior objective.

    ``values`` is evaluated on a batch of candidate posteriors.  ``local``
    returns ``(value, gradient)`` at one posterior and may keep warm-start
    state keyed by ``slot``; ``final`` gives the certified value (plus any
    witness payload) used for the reported result.
    """

    values: Vec
    local: Callable[[np.ndarray, int], tuple[float, np.ndarray]]
    final: Callable[[np.ndarray], tuple[float, object]]
    seed_payload: Callable[[int], object] | None = None


@dataclass
class Decomposition:
    value: float
    u_channel: np.ndarray  # |X| x |U|
    weights: np.ndarray
    posteriors: np.ndarray  # |U| x |X|
    payloads: list
    rates: dict
    trace: dict = field(default_factory=dict)


def posteriors(p_x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """U-marginal and posteriors P_{X|U=u} (rows) of channel ``c``."""
    m = p_x[:, None] * c
    w = m.sum(axis=0)
    post = np.where(w[:, None] > 0, m.T / np.where(w > 0, w, 1.0)[:, None], p_x[None, :])
    return w, post


def rate_values(p_x, c, terms: list[RateTerm]) -> dict:
    w, post = posteriors(p_x, c)
    live = w > 0
    return {t.name: max(t.total - float(w[live] @ t.h(post[live])), 0.0) for t in terms}


def candidate_posteriors(p_x: np.ndarray, cfg: OptimizerConfig) -> np.ndarray:
    support = np.flatnonzero(p_x > 0)
    k = support.size
    if k == 1:
        pts = np.ones((1, 1))
    elif k <= 5:
        pts = simplex_grid(k, max(resolution_for(k, cfg.decomposition_points), 2))
    else:
        rng = cfg.rng(k, 11)
        pts = np.vstack([np.eye(k), rng.dirichlet(np.ones(k) * 0.5, cfg.decomposition_points)])
    out = np.zeros((len(pts) + 1, p_x.size))
    out[:-1, support] = pts
    out[-1] = p_x
    return out


def _lp(cands, phi, p_x, terms, rate):
    support = np.flatnonzero(p_x > 0)
    a_eq = cands[:, support].T
    b_eq = p_x[support]
    a_ub = np.array([-t.h(cands) for t in terms]) if terms else None
    b_ub = np.array([rate - t.total for t in terms]) if terms else None
    res = linprog(-phi, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None
    return res.x


def _channel_from_atoms(p_x, atoms, weights, n_u):
    c = np.zeros((p_x.size, n_u))
    pos = p_x > 0
    for u, (p, w) in enumerate(zip(atoms, weights)):
        c[pos, u] = w * p[pos] / p_x[pos]
    c[pos] /= c[pos].sum(axis=1, keepdims=True)
    w_u = p_x @ c
    c[~pos] = w_u
    return c


def project_feasible(p_x, c, terms, rate, tol):
    """Mix ``c`` toward the constant channel until every rate term is within ``rate``.

    Conditional mutual information is convex in the channel, so the mixture
    with weight lam on the constant channel satisfies I <= (1 - lam) I(c).
    """
    def excess(lam):
        cc = (1 - lam) * c + lam * (p_x @ c)[None, :]
        r = rate_values(p_x, cc, terms)
        return max((v - rate for v in r.values()), default=-1.0), cc

    ex, cc = excess(0.0)
    if ex <= tol:
        return cc, 0.0
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ex, _ = excess(mid)
        if ex <= tol * 0.5:
            hi = mid
        else:
            lo = mid
    return excess(hi)[1], hi


def _polish(p_x, c0, objective, terms, rate, cfg, start_id):
    support = np.flatnonzero(p_x > 0)
    k, n_u = support.size, c0.shape[1]
    px = p_x[support]

    def unpack(z):
        c = np.clip(z.reshape(k, n_u), 0.0, 1.0)
        return c

    def pieces(z):
        c = unpack(z)
        m = px[:, None] * c
        w = m.sum(axis=0)
        safe = np.where(w > 1e-300, w, 1.0)
        post = (m / safe).T
        post[w <= 1e-300] = px
        return c, w, post

    cache: dict = {}

    def fun_jac(z):
        key = z.tobytes()
        if key in cache:
            return cache[key]
        c, w, post = pieces(z)
        val = 0.0
        jac = np.zeros((k, n_u))
        for u in range(n_u):
            full = np.zeros(p_x.size)
            full[support] = post[u]
            f, g = objective.local(full, start_id * 64 + u)
            g = g[support]
            val += w[u] * f
            jac[:, u] = px * (f + g - post[u] @ g)
        cache.clear()
        cache[key] = (-val, -jac.ravel())
        return cache[key]

    def cons_fun(z):
        c, w, post = pieces(z)
        full = np.zeros((n_u, p_x.size))
        full[:, support] = post
        return np.array([rate - (t.total - w @ t.h(full)) for t in terms])

    def cons_jac(z):
        c, w, post = pieces(z)
        rows = []
        for t in terms:
            jac = np.zeros((k, n_u))
            full = np.zeros((n_u, p_x.size))
            full[:, support] = post
            hv = t.h(full)
            for u in range(n_u):
                g = t.grad(full[u])[support]
                jac[:, u] = px * (hv[u] + g - post[u] @ g)
            rows.append(jac.ravel())
        return np.array(rows)

    row_sum = np.zeros((k, k * n_u))
    for i in range(k):
        row_sum[i, i * n_u:(i + 1) * n_u] = 1.0
    constraints = [{"type": "eq", "fun": lambda z: row_sum @ z - 1.0, "jac": lambda z: row_sum}]
    if terms:
        constraints.append({"type": "ineq", "fun": cons_fun, "jac": cons_jac})
    res = minimize(
        lambda z: fun_jac(z)[0],
        c0[support].ravel(),
        jac=lambda z: fun_jac(z)[1],
        method="SLSQP",
        bounds=[(0.0, 1.0)] * (k * n_u),
        constraints=constraints,
        options={"maxiter": 200, "ftol": 1e-12},
    )
    c = np.clip(res.x.reshape(k, n_u), 0.0, None)
    c /= c.sum(axis=1, keepdims=True)
    full = np.zeros((p_x.size, n_u))
    full[support] = c
    full[p_x <= 0] = p_x @ full
    return full, int(res.nit)


def evaluate_channel(p_x, c, objective):
    w, post = posteriors(p_x, c)
    total = 0.0
    payloads = []
    for u in range(c.shape[1]):
        if w[u] <= 1e-14:
            payloads.append(None)
            continue
        val, payload = objective.final(post[u])
        total += w[u] * val
        payloads.append(payload)
    return total, payloads


def _unbounded(p_x, atom, objective, terms, rate, cfg, n_u):
    """Try a small-weight atom at a posterior where phi is +inf."""
    pos = atom > 0
    eps = 0.5 * float(np.min(p_x[pos] / atom[pos]))
    rest = (p_x - eps * atom) / (1.0 - eps)
    c = _channel_from_atoms(p_x, [atom, np.clip(rest, 0.0, None)], [eps, 1.0 - eps], n_u)
    c, lam = project_feasible(p_x, c, terms, rate, cfg.feasibility_tol)
    val, payloads = evaluate_channel(p_x, c, objective)
    if not np.isposinf(val):
        return None
    w, post = posteriors(p_x, c)
    return Decomposition(np.inf, c, w, post, payloads, rate_values(p_x, c, terms),
                         {"unbounded_atom": True, "lp_projection": lam})


def maximize(p_x, objective: Objective, terms: list[RateTerm], rate: float, cfg: OptimizerConfig) -> Decomposition:
    """Solve the rate-constrained decomposition problem (see module docstring)."""
    p_x = np.asarray(p_x, dtype=float)
    n_u = p_x.size + 2
    cands = candidate_posteriors(p_x, cfg)
    phi = objective.values(cands)
    if np.isposinf(phi[-1]):
        c = np.tile(np.eye(1, n_u), (p_x.size, 1))
        return Decomposition(np.inf, c, p_x @ c, posteriors(p_x, c)[1], [None] * n_u,
                             rate_values(p_x, c, terms), {"infinite_at_p_x": True})
    ok = np.isfinite(phi)
    inf_hit = int(np.sum(np.isposinf(phi)))
    if inf_hit and rate > 0:
        hit = _unbounded(p_x, cands[np.isposinf(phi)][0], objective, terms, rate, cfg, n_u)
        if hit is not None:
            return hit
    x = _lp(cands[ok], phi[ok], p_x, terms, rate)
    if x is None:
        atoms, weights = [p_x], [1.0]
    else:
        idx = np.flatnonzero(x > 1e-12)
        order = idx[np.argsort(-x[idx], kind="stable")][:n_u]
        atoms = list(cands[ok][order])
        weights = list(x[order])
    c_lp = _channel_from_atoms(p_x, atoms, weights, n_u)
    c_lp, lam = project_feasible(p_x, c_lp, terms, rate, cfg.feasibility_tol)

    starts = [c_lp]
    if cfg.polish and np.sum(p_x > 0) > 1:
        rng = cfg.rng(p_x.size, 23)
        n_extra = max(cfg.n_starts - 1, 0)
        for _ in range(n_extra):
            if rng.random() < 0.5:
                noise = rng.dirichlet(np.ones(n_u), p_x.size)
                c = 0.9 * c_lp + 0.1 * noise
            else:
                c = rng.dirichlet(np.ones(n_u) * 0.5, p_x.size)
            starts.append(c)

    best = None
    trace = {"lp_atoms": len(atoms), "lp_projection": lam, "starts": len(starts), "polish_iters": []}
    for s_id, c in enumerate(starts):
        cand_channels = [c] if (s_id == 0 or not cfg.polish) else []
        if cfg.polish and np.sum(p_x > 0) > 1:
            try:
                pc, nit = _polish(p_x, c, objective, terms, rate, cfg, s_id)
                trace["polish_iters"].append(nit)
                pc, _ = project_feasible(p_x, pc, terms, rate, cfg.feasibility_tol)
                cand_channels.append(pc)
            except (ValueError, FloatingPointError, np.linalg.LinAlgError):
                pass
        for cc in cand_channels:
            val, payloads = evaluate_channel(p_x, cc, objective)
            if best is None or val > best[0] + 1e-15:
                best = (val, cc, payloads)
    value, c, payloads = best
    w, post = posteriors(p_x, c)
    trace["inf_candidate"] = inf_hit
    return Decomposition(
        value=float(value),
        u_channel=c,
        weights=w,
        posteriors=post,
        payloads=payloads,
        rates=rate_values(p_x, c, terms),
        trace=trace,
    )


# per-posterior entropy pieces ----------------------------------------------


def cond_entropy_x(post: np.ndarray, k: np.ndarray) -> np.ndarray:
    """H(X|G) for X ~ post (rows) and G drawn from kernel ``k``."""
    j = post[:, :, None] * k[None, :, :]
    marg = j.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(j > 0, j * np.log(j / marg), 0.0)
    return -t.sum(axis=(1, 2))


def cond_entropy_x_grad(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    j = p[:, None] * k
    marg = j.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(j > 0, k * np.log(j / marg), 0.0)
    return -t.sum(axis=1)


def cond_entropy_out(post: np.ndarray, k3: np.ndarray) -> np.ndarray:
    """H(A|B) where (A,B) is drawn from kernel ``k3`` of shape (|X|, |A|, |B|)."""
    r = np.einsum("nx,xab->nab", post, k3)
    rb = r.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(r > 0, r * np.log(r / rb), 0.0)
    return -t.sum(axis=(1, 2))


def cond_entropy_out_grad(p: np.ndarray, k3: np.ndarray) -> np.ndarray:
    r = np.einsum("x,xab->ab", p, k3)
    rb = r.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r > 0, np.log(r / rb), 0.0)
    return -np.einsum("xab,ab->x", k3, lg)


def entropy_term(name, kernel, p_x) -> RateTerm:
    """Rate term for I(U;X|G) with G drawn from ``kernel`` given X."""
    kernel = np.asarray(kernel, dtype=float)
    return RateTerm(
        name,
        lambda post: cond_entropy_x(post, kernel),
        lambda p: cond_entropy_x_grad(p, kernel),
        float(cond_entropy_x(p_x[None, :], kernel)[0]),
    )
