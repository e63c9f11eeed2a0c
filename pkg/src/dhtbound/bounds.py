"""Single-letter bounds on the distributed hypothesis-testing exponent.

Upper bounds: the add-and-subtract bound ``G + E(X,Z)`` (with its chained and
J-augmented variants), the Rahman-Wagner bound and its weaker
two-constraint form.  Lower bound: the Ahlswede-Csiszar quantization bound.  Plus the
centralized (Neyman-Pearson) benchmark and membership tests for the
auxiliary-receiver classes R and R-tilde.

All values are in nats.  Auxiliary receivers are supplied by the caller;
the outer minimization over receivers is not searched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import decomposition as dec
from .errors import EvaluationError, ValidationError
from .inner import ChannelQuad, f_local, f_max, f_objective, grad_wrt_p
from .optimize import OptimizerConfig
from .prob import (
    JointTable,
    as_kernel,
    compose_joint,
    condition,
    conditional_mi,
    extend,
    kl_divergence,
    kl_tables,
    marginalize,
    merge_axes,
)

log = logging.getLogger(__name__)

Terminal = Union[str, float]
ZERO_TERMINAL_TOL = 1e-9


# data model -----------------------------------------------------------------


def _xy_table(t) -> JointTable:
    if isinstance(t, JointTable):
        return t.reorder(("X", "Y"))
    return JointTable(("X", "Y"), np.asarray(t, dtype=float))


@dataclass(frozen=True)
class DiscreteScenario:
    """Joint laws of (X, Y) under both hypotheses and the rate in nats."""

    p_xy: JointTable
    q_xy: JointTable
    rate: float

    def __post_init__(self):
        p, q = _xy_table(self.p_xy), _xy_table(self.q_xy)
        if p.table.shape != q.table.shape:
            raise ValidationError(f"p_xy shape {p.table.shape} != q_xy shape {q.table.shape}")
        rate = float(self.rate)
        if not np.isfinite(rate) or rate < 0:
            raise ValidationError(f"rate must be a finite non-negative number, got {self.rate!r}")
        object.__setattr__(self, "p_xy", p)
        object.__setattr__(self, "q_xy", q)
        object.__setattr__(self, "rate", rate)

    @property
    def n_x(self) -> int:
        return self.p_xy.table.shape[0]

    @property
    def n_y(self) -> int:
        return self.p_xy.table.shape[1]

    @property
    def p_x(self) -> np.ndarray:
        return self.p_xy.table.sum(axis=1)

    @property
    def q_x(self) -> np.ndarray:
        return self.q_xy.table.sum(axis=1)

    @property
    def p_y_given_x(self) -> np.ndarray:
        return condition(self.p_xy, "X", "Y")[0]

    @property
    def q_y_given_x(self) -> np.ndarray:
        return condition(self.q_xy, "X", "Y")[0]

    def with_rate(self, rate: float) -> "DiscreteScenario":
        return DiscreteScenario(self.p_xy, self.q_xy, rate)


@dataclass(frozen=True)
class AuxiliaryReceiver:
    """Channel pair (P_{Z|XY}, Q_{Z|XY}); rows indexed by x * |Y| + y."""

    p_z_given_xy: np.ndarray
    q_z_given_xy: np.ndarray

    def __post_init__(self):
        p = as_kernel(self.p_z_given_xy, "p_z_given_xy")
        q = as_kernel(self.q_z_given_xy, "q_z_given_xy")
        if p.shape != q.shape:
            raise ValidationError(f"aux kernels differ in shape: {p.shape} vs {q.shape}")
        object.__setattr__(self, "p_z_given_xy", p)
        object.__setattr__(self, "q_z_given_xy", q)

    @property
    def n_z(self) -> int:
        return self.p_z_given_xy.shape[1]

    @classmethod
    def from_x_kernels(cls, p_z_given_x, q_z_given_x, n_y: int) -> "AuxiliaryReceiver":
        """Receiver that sees X only (Z independent of Y given X)."""
        p = np.repeat(np.asarray(p_z_given_x, dtype=float), n_y, axis=0)
        q = np.repeat(np.asarray(q_z_given_x, dtype=float), n_y, axis=0)
        return cls(p, q)

    @classmethod
    def copy_of_y(cls, n_x: int, n_y: int) -> "AuxiliaryReceiver":
        k = np.tile(np.eye(n_y), (n_x, 1))
        return cls(k, k)

    @classmethod
    def constant(cls, n_x: int, n_y: int) -> "AuxiliaryReceiver":
        k = np.ones((n_x * n_y, 1))
        return cls(k, k)

    def _check(self, scn: DiscreteScenario):
        if self.p_z_given_xy.shape[0] != scn.n_x * scn.n_y:
            raise ValidationError(
                f"aux kernel has {self.p_z_given_xy.shape[0]} rows, expected |X||Y| = {scn.n_x * scn.n_y}"
            )

    def joints(self, scn: DiscreteScenario) -> tuple[JointTable, JointTable]:
        self._check(scn)
        return (
            extend(scn.p_xy, ("X", "Y"), self.p_z_given_xy, "Z"),
            extend(scn.q_xy, ("X", "Y"), self.q_z_given_xy, "Z"),
        )

    def x_kernels(self, scn: DiscreteScenario) -> tuple[np.ndarray, np.ndarray]:
        """(P_{Z|X}, Q_{Z|X}) induced through the scenario's Y channels."""
        self._check(scn)
        pz = np.einsum("xy,xyz->xz", scn.p_y_given_x, self.p_z_given_xy.reshape(scn.n_x, scn.n_y, -1))
        qz = np.einsum("xy,xyz->xz", scn.q_y_given_x, self.q_z_given_xy.reshape(scn.n_x, scn.n_y, -1))
        return pz, qz


@dataclass
class BoundResult:
    name: str
    value: float
    witness_u_channel: np.ndarray | None = None
    witness_qhat_per_u: list | None = None
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class MembershipReport:
    in_set: bool
    factorization_residual: float
    second_residual: float
    flagged_symbols: tuple = ()

    def __bool__(self) -> bool:
        return self.in_set


# membership -------------------------------------------------------------------


def _factorization_residual(q_xyz: JointTable) -> float:
    """max_x |Q_{YZ|X} - Q_{Z|X} Q_{Y|Z}| over x with Q_X(x) > 0."""
    nx, ny, nz = q_xyz.reorder(("X", "Y", "Z")).table.shape
    q_yz_x, zero_x = condition(q_xyz, "X", ("Y", "Z"))
    q_z_x, _ = condition(q_xyz, "X", "Z")
    q_y_z, _ = condition(q_xyz, "Z", "Y")
    prod = q_z_x[:, None, :] * q_y_z.T[None, :, :]
    diff = np.abs(q_yz_x.reshape(nx, ny, nz) - prod)[~zero_x]
    return float(diff.max()) if diff.size else 0.0


def membership_R_check(scn: DiscreteScenario, aux: AuxiliaryReceiver, tol: float = 1e-9) -> MembershipReport:
    """Is the receiver in R: Q_{YZ|X} = Q_{Z|X} Q_{Y|Z} and P_XZ = Q_XZ?"""
    p_xyz, q_xyz = aux.joints(scn)
    fact = _factorization_residual(q_xyz)
    marg = float(np.max(np.abs(marginalize(p_xyz, ("X", "Z")).table - marginalize(q_xyz, ("X", "Z")).table)))
    return MembershipReport(fact <= tol and marg <= tol, fact, marg)


def membership_Rtilde_check(scn: DiscreteScenario, aux: AuxiliaryReceiver, tol: float = 1e-9) -> MembershipReport:
    """Is the receiver in R-tilde: Q_{YZ|X} = Q_{Z|X} Q_{Y|Z} and P_{Y|Z} = Q_{Y|Z}?

    Rows of P_{Y|Z} and Q_{Y|Z} are compared only where both Z-marginals are
    positive; other symbols are returned in ``flagged_symbols``.
    """
    p_xyz, q_xyz = aux.joints(scn)
    fact = _factorization_residual(q_xyz)
    p_y_z, zp = condition(p_xyz, "Z", "Y")
    q_y_z, zq = condition(q_xyz, "Z", "Y")
    live = ~zp & ~zq
    cond = float(np.max(np.abs(p_y_z - q_y_z)[live])) if live.any() else 0.0
    flagged = tuple(int(z) for z in np.flatnonzero(~live))
    return MembershipReport(fact <= tol and cond <= tol, fact, cond, flagged)


# helpers ------------------------------------------------------------------------


def centralized_bound(scn: DiscreteScenario) -> float:
    """D(P_XY || Q_XY)."""
    return kl_tables(scn.p_xy, scn.q_xy)


def _require_finite(value: float, what: str):
    if not np.isfinite(value):
        raise ValidationError(f"finiteness condition violated: {what} = inf")


def _result(name, d: dec.Decomposition, rate, extra=None) -> BoundResult:
    diag = {
        "rate": rate,
        "rates": dict(d.rates),
        "slacks": {k: rate - v for k, v in d.rates.items()},
        "optimizer": d.trace,
    }
    if extra:
        diag.update(extra)
    return BoundResult(name, d.value, d.u_channel, None, diag)


# G -------------------------------------------------------------------------------


class _FObjective:
    """Decomposition objective backed by the inner maximization f."""

    def __init__(self, quad: ChannelQuad, q_x: np.ndarray, cfg: OptimizerConfig):
        self.quad, self.q_x, self.cfg = quad, q_x, cfg
        self.cand = None
        self.cand_q = None
        self.warm: dict[int, np.ndarray] = {}
        self.boundary = 0

    def values(self, cands):
        # screening pass: one grid seed plus Q_X per candidate
        quick = replace(self.cfg, f_starts=1)
        out = np.empty(len(cands))
        qs = []
        for i, p in enumerate(cands):
            r = f_max(p, self.quad, self.q_x, quick)
            out[i] = r.value
            qs.append(r.witness_qhat)
        self.cand, self.cand_q = cands, np.array(qs)
        return out

    def _nearest(self, p):
        i = int(np.argmin(np.abs(self.cand - p).sum(axis=1)))
        return self.cand_q[i]

    def local(self, p, slot):
        q0 = self.warm.get(slot)
        if q0 is None:
            q0 = self._nearest(p)
        val, q = f_local(p, self.quad, self.q_x, q0, self.cfg)
        self.warm[slot] = q
        return val, grad_wrt_p(p, q, self.quad)

    def final(self, p):
        p = p / p.sum()
        r = f_max(p, self.quad, self.q_x, self.cfg)
        val, q = r.value, r.witness_qhat
        if self.cand is not None:
            lv, lq = f_local(p, self.quad, self.q_x, self._nearest(p), self.cfg)
            if lv > val:
                val, q = lv, lq
        self.boundary += int(r.boundary_flag)
        return val, q

    def as_objective(self) -> dec.Objective:
        return dec.Objective(self.values, self.local, self.final)


def _g_core(p_x, q_x, quad: ChannelQuad, rate: float, cfg: OptimizerConfig, name="g_bound") -> BoundResult:
    terms = [
        dec.entropy_term("I(U;X|Y)", quad.p_y_given_x, p_x),
        dec.entropy_term("I(U;X|Z)", quad.p_z_given_x, p_x),
    ]
    fo = _FObjective(quad, q_x, cfg)
    d = dec.maximize(p_x, fo.as_objective(), terms, rate, cfg)
    res = _result(name, d, rate, {"boundary_flags": fo.boundary})
    res.witness_qhat_per_u = d.payloads
    if cfg.verify_oracle:
        from .oracles import verify_f_values

        res.diagnostics["oracle"] = verify_f_values(p_x, quad, q_x, d, cfg)
    return res


def g_bound(scn: DiscreteScenario, p_z_given_x, q_z_given_x, cfg: OptimizerConfig | None = None) -> BoundResult:
    """G: max over P_{U|X} in T of sum_u P(u) f(P_{X|U=u}), |U| = |X| + 2."""
    cfg = cfg or OptimizerConfig()
    quad = ChannelQuad(scn.p_y_given_x, p_z_given_x, scn.q_y_given_x, q_z_given_x)
    if quad.n_x != scn.n_x:
        raise ValidationError("Z kernels do not match |X| of the scenario")
    p_x, q_x = scn.p_x, scn.q_x
    _require_finite(centralized_bound(scn), "D(P_XY || Q_XY)")
    _require_finite(
        kl_tables(compose_joint(p_x, quad.p_z_given_x), compose_joint(q_x, quad.q_z_given_x)),
        "D(P_XZ || Q_XZ)",
    )
    return _g_core(p_x, q_x, quad, scn.rate, cfg)


def _terminal_value(terminal: Terminal, p_xz: JointTable, q_xz: JointTable) -> tuple[float, str]:
    d = kl_tables(p_xz, q_xz)
    if isinstance(terminal, str):
        if terminal == "centralized":
            return d, "centralized"
        if terminal == "zero":
            gap = float(np.max(np.abs(p_xz.table - q_xz.reorder(p_xz.axes).table)))
            if gap > ZERO_TERMINAL_TOL:
                raise ValidationError(f"zero terminal requires P_XZ = Q_XZ; max difference {gap:.3g}")
            return 0.0, "zero"
        raise ValidationError(f"unknown terminal {terminal!r}; use 'centralized', 'zero' or a number")
    value = float(terminal)
    if np.isnan(value) or value < 0:
        raise ValidationError(f"terminal value must be a non-negative number, got {terminal!r}")
    return value, "user"


def addsub_upper_bound(
    scn: DiscreteScenario,
    aux: AuxiliaryReceiver,
    terminal: Terminal = "centralized",
    cfg: OptimizerConfig | None = None,
) -> BoundResult:
    """E <= G + E(P_XZ, Q_XZ), with the second exponent replaced by ``terminal``."""
    cfg = cfg or OptimizerConfig()
    pz, qz = aux.x_kernels(scn)
    p_xz, q_xz = compose_joint(scn.p_x, pz, ("X", "Z")), compose_joint(scn.q_x, qz, ("X", "Z"))
    term, kind = _terminal_value(terminal, p_xz, q_xz)
    g = g_bound(scn, pz, qz, cfg)
    total = g.value + term
    g.diagnostics.update({"G": g.value, "terminal": term, "terminal_kind": kind})
    return BoundResult("addsub_upper_bound", total, g.witness_u_channel, g.witness_qhat_per_u, g.diagnostics)


def chain_bound(
    scn: DiscreteScenario,
    chain: Sequence[tuple],
    terminal: Terminal = "centralized",
    cfg: OptimizerConfig | None = None,
) -> BoundResult:
    """G(Y -> Z_1) + sum_j G(Z_j -> Z_{j+1}) + terminal on (X, Z_k).

    ``chain`` is a list of ``(P_{Z_j|X}, Q_{Z_j|X})`` kernel pairs.
    """
    cfg = cfg or OptimizerConfig()
    if not chain:
        raise ValidationError("chain_bound needs at least one link")
    p_x, q_x = scn.p_x, scn.q_x
    _require_finite(centralized_bound(scn), "D(P_XY || Q_XY)")
    links = [(scn.p_y_given_x, scn.q_y_given_x)]
    for j, (pk, qk) in enumerate(chain, start=1):
        pk, qk = as_kernel(pk, f"link {j} P kernel"), as_kernel(qk, f"link {j} Q kernel")
        if pk.shape[0] != scn.n_x or qk.shape != pk.shape:
            raise ValidationError(f"link {j}: kernels must both have |X| = {scn.n_x} rows and equal shapes")
        d = kl_tables(compose_joint(p_x, pk, ("X", "Z")), compose_joint(q_x, qk, ("X", "Z")))
        if not np.isfinite(d):
            raise ValidationError(f"link {j}: D(P_XZ_{j} || Q_XZ_{j}) = inf")
        links.append((pk, qk))

    parts = []
    for j in range(len(links) - 1):
        (py, qy), (pz, qz) = links[j], links[j + 1]
        try:
            r = _g_core(p_x, q_x, ChannelQuad(py, pz, qy, qz), scn.rate, cfg, name=f"G[{j}->{j + 1}]")
        except EvaluationError as exc:
            raise EvaluationError(f"chain link {j + 1}: {exc}") from exc
        parts.append(r)
    pk, qk = links[-1]
    term, kind = _terminal_value(
        terminal, compose_joint(p_x, pk, ("X", "Z")), compose_joint(q_x, qk, ("X", "Z"))
    )
    total = sum(r.value for r in parts) + term
    diag = {"parts": [r.value for r in parts], "terminal": term, "terminal_kind": kind, "links": parts}
    return BoundResult("chain_bound", total, parts[0].witness_u_channel, parts[0].witness_qhat_per_u, diag)


def augment(scn: DiscreteScenario, aux: AuxiliaryReceiver, p_j_given_xyz, q_j_given_xyz):
    """Joint tables of (X, Y') and (X, Z') with Y' = (Y, J), Z' = (Z, J)."""
    p_xyz, q_xyz = aux.joints(scn)
    p_j = as_kernel(p_j_given_xyz, "p_j_given_xyz")
    q_j = as_kernel(q_j_given_xyz, "q_j_given_xyz")
    out = []
    for joint, kj in ((p_xyz, p_j), (q_xyz, q_j)):
        full = extend(joint, ("X", "Y", "Z"), kj, "J")
        xy = merge_axes(marginalize(full, ("X", "Y", "J")), ("Y", "J"), "Y'")
        xz = merge_axes(marginalize(full, ("X", "Z", "J")), ("Z", "J"), "Z'")
        out.append((xy, xz))
    return out


def j_augmented_bound(
    scn: DiscreteScenario,
    p_j_given_xyz,
    q_j_given_xyz,
    aux: AuxiliaryReceiver,
    terminal: Terminal = "centralized",
    cfg: OptimizerConfig | None = None,
) -> BoundResult:
    """G(X; Y' -> Z') + terminal on (X, Z') for Y' = (Y, J), Z' = (Z, J).

    Kernel rows of J are indexed by (x, y, z) in row-major order.
    """
    cfg = cfg or OptimizerConfig()
    (p_xy2, p_xz2), (q_xy2, q_xz2) = augment(scn, aux, p_j_given_xyz, q_j_given_xyz)
    _require_finite(kl_tables(p_xy2, q_xy2), "D(P_XYJ || Q_XYJ)")
    _require_finite(kl_tables(p_xz2, q_xz2), "D(P_XZJ || Q_XZJ)")
    quad = ChannelQuad(
        condition(p_xy2, "X", "Y'")[0],
        condition(p_xz2, "X", "Z'")[0],
        condition(q_xy2, "X", "Y'")[0],
        condition(q_xz2, "X", "Z'")[0],
    )
    g = _g_core(scn.p_x, scn.q_x, quad, scn.rate, cfg, name="j_augmented_bound")
    term, kind = _terminal_value(terminal, p_xz2, q_xz2)
    g.diagnostics.update({"G": g.value, "terminal": term, "terminal_kind": kind})
    return BoundResult("j_augmented_bound", g.value + term, g.witness_u_channel, g.witness_qhat_per_u, g.diagnostics)


# closed-form objectives ---------------------------------------------------------


class _ClosedForm:
    """Objective phi(p) = const + sign * H(A|B)(p), homogeneous extension."""

    def __init__(self, value_fn, grad_fn):
        self.value_fn, self.grad_fn = value_fn, grad_fn

    def as_objective(self) -> dec.Objective:
        return dec.Objective(
            self.value_fn,
            lambda p, slot: (float(self.value_fn(p[None, :])[0]), self.grad_fn(p)),
            lambda p: (float(self.value_fn(p[None, :])[0]), None),
        )


def _rw_problem(scn: DiscreteScenario, aux: AuxiliaryReceiver, tol: float, name: str):
    rep = membership_R_check(scn, aux, tol)
    if not rep.in_set:
        raise ValidationError(
            f"{name}: auxiliary receiver is not in R "
            f"(factorization residual {rep.factorization_residual:.3g}, "
            f"P_XZ - Q_XZ residual {rep.second_residual:.3g})"
        )
    p_xyz, q_xyz = aux.joints(scn)
    k3 = condition(p_xyz, "X", ("Y", "Z"))[0].reshape(scn.n_x, scn.n_y, aux.n_z)
    p_x = scn.p_x
    d_yz = kl_tables(marginalize(p_xyz, ("Y", "Z")), marginalize(q_xyz, ("Y", "Z")))
    h_tot = float(dec.cond_entropy_out(p_x[None, :], k3)[0])
    const = h_tot + d_yz

    def values(post):
        return const - dec.cond_entropy_out(post, k3)

    def grad(p):
        return const - dec.cond_entropy_out_grad(p, k3)

    pz = k3.sum(axis=1)
    return _ClosedForm(values, grad), pz, d_yz, rep


def rw_bound(scn: DiscreteScenario, aux: AuxiliaryReceiver, cfg: OptimizerConfig | None = None,
             tol: float = 1e-9) -> BoundResult:
    """D(P_YZ || Q_YZ) + max I_P(Y;U|Z) over P_{U|X} with I_P(X;U|Z) <= R."""
    cfg = cfg or OptimizerConfig()
    obj, pz, d_yz, rep = _rw_problem(scn, aux, tol, "rw_bound")
    terms = [dec.entropy_term("I(U;X|Z)", pz, scn.p_x)]
    d = dec.maximize(scn.p_x, obj.as_objective(), terms, scn.rate, cfg)
    return _result("rw_bound", d, scn.rate, {"D(P_YZ||Q_YZ)": d_yz, "membership": rep})


def corollary1_bound(scn: DiscreteScenario, aux: AuxiliaryReceiver, cfg: OptimizerConfig | None = None,
                     tol: float = 1e-9) -> BoundResult:
    """As :func:`rw_bound` but U also satisfies I_P(X;U|Y) <= R."""
    cfg = cfg or OptimizerConfig()
    obj, pz, d_yz, rep = _rw_problem(scn, aux, tol, "corollary1_bound")
    terms = [
        dec.entropy_term("I(U;X|Y)", scn.p_y_given_x, scn.p_x),
        dec.entropy_term("I(U;X|Z)", pz, scn.p_x),
    ]
    d = dec.maximize(scn.p_x, obj.as_objective(), terms, scn.rate, cfg)
    return _result("corollary1_bound", d, scn.rate, {"D(P_YZ||Q_YZ)": d_yz, "membership": rep})


def ac_lower_bound(scn: DiscreteScenario, cfg: OptimizerConfig | None = None) -> BoundResult:
    """max over I_P(U;X) <= R of D(P_X || Q_X) + D(P_UY || Q_UY), U - X - Y."""
    cfg = cfg or OptimizerConfig()
    p_x, q_x = scn.p_x, scn.q_x
    d_x = kl_divergence(p_x, q_x)
    n_u = scn.n_x + 2
    if not np.isfinite(d_x):
        c = np.tile(np.eye(1, n_u), (scn.n_x, 1))
        return BoundResult("ac_lower_bound", np.inf, c, None, {"D(P_X||Q_X)": d_x})
    a = scn.p_y_given_x
    safe = np.where(p_x > 0, p_x, 1.0)
    kq = np.where(p_x[:, None] > 0, scn.q_xy.table / safe[:, None], 0.0)

    def values(post):
        r = post @ a
        s = post @ kq
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(r > 0, r * (np.log(r) - np.log(s)), 0.0)
        t = np.where((r > 0) & (s <= 0), np.inf, t)
        return d_x + t.sum(axis=1)

    def grad(p):
        r = p @ a
        s = p @ kq
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.where(r > 0, np.log(r) - np.log(s), 0.0)
            ratio = np.where(r > 0, r / s, 0.0)
        return d_x + a @ (lr + 1.0) - kq @ ratio

    terms = [dec.entropy_term("I(U;X)", np.ones((scn.n_x, 1)), p_x)]
    d = dec.maximize(p_x, _ClosedForm(values, grad).as_objective(), terms, scn.rate, cfg)
    return _result("ac_lower_bound", d, scn.rate, {"D(P_X||Q_X)": d_x})


# witness re-evaluation (independent path through prob-core) ----------------------


def _with_u(joint: JointTable, u_channel) -> JointTable:
    return extend(joint, "X", np.asarray(u_channel, dtype=float), "U")


def rates_at(p_xy: JointTable, u_channel, given: str = "Y") -> float:
    """I_P(U;X|given) for U drawn from ``u_channel`` given X."""
    j = _with_u(p_xy, u_channel)
    return conditional_mi(j, "U", "X", (given,) if given else ())


def g_value_at(p_x, q_x, quad: ChannelQuad, u_channel, qhats) -> float:
    """sum_u P(u) [D(P_{Y|u} || Qhat_{Y,u}) - D(P_{Z|u} || Qhat_{Z,u})] at a witness."""
    total = 0.0
    joint = compose_joint(p_x, np.asarray(u_channel), ("X", "U"))
    w = marginalize(joint, "U").table
    post, _ = condition(joint, "U", "X")
    for u, q in enumerate(qhats):
        if q is None or w[u] <= 0:
            continue
        total += w[u] * f_objective(q, post[u] / post[u].sum(), quad, q_x)
    return total


def rw_value_at(scn: DiscreteScenario, aux: AuxiliaryReceiver, u_channel) -> float:
    """I_P(Y;U|Z) + D(P_YZ || Q_YZ) at a given P_{U|X}."""
    p_xyz, q_xyz = aux.joints(scn)
    j = _with_u(p_xyz, u_channel)
    return conditional_mi(j, "Y", "U", "Z") + kl_tables(
        marginalize(p_xyz, ("Y", "Z")), marginalize(q_xyz, ("Y", "Z"))
    )


def ac_value_at(scn: DiscreteScenario, u_channel) -> float:
    """D(P_X || Q_X) + D(P_UY || Q_UY) at a given P_{U|X}."""
    pu = _with_u(scn.p_xy, u_channel)
    qu = _with_u(scn.q_xy, u_channel)
    return kl_divergence(scn.p_x, scn.q_x) + kl_tables(marginalize(pu, ("U", "Y")), marginalize(qu, ("U", "Y")))


# Example 1: testing against conditional independence ------------------------------


def conditional_independence_scenario(
    p_xjz,
    p_yhat_given_xjz,
    rate: float,
    q_xjz=None,
    q_yhat_given_xjz=None,
    tol: float = 1e-10,
) -> tuple[DiscreteScenario, AuxiliaryReceiver]:
    """Scenario with Y = (J, Z, Yhat) and the receiver Z' = (Z, J).

    By default Q_XJZ = P_XJZ and Q_{Yhat|XJZ} = P_{Yhat|Z}, which satisfies
    I_Q(Yhat; XJ | Z) = 0, P_XJZ = Q_XJZ and P_{Yhat Z} = Q_{Yhat Z}.  Explicit
    Q pieces may be supplied; they are validated against the same three
    constraints.  Y symbols are indexed row-major in (J, Z, Yhat), Z' symbols
    in (Z, J).
    """
    p_xjz = np.asarray(p_xjz, dtype=float)
    if p_xjz.ndim != 3:
        raise ValidationError("p_xjz must be a 3-D table over (X, J, Z)")
    nx, nj, nz = p_xjz.shape
    p_base = JointTable(("X", "J", "Z"), p_xjz)
    p_full = extend(p_base, ("X", "J", "Z"), p_yhat_given_xjz, "Yh")
    q_base = p_base if q_xjz is None else JointTable(("X", "J", "Z"), q_xjz)
    if q_yhat_given_xjz is None:
        k = condition(p_full, "Z", "Yh")[0]
        q_yhat_given_xjz = np.tile(k, (nx * nj, 1))
    q_full = extend(q_base, ("X", "J", "Z"), q_yhat_given_xjz, "Yh")

    ci = conditional_mi(q_full, "Yh", ("X", "J"), "Z")
    if ci > tol:
        raise ValidationError(f"constraint I_Q(Yhat; XJ | Z) = 0 fails: value {ci:.3g}")
    gap = float(np.max(np.abs(p_base.table - q_base.table)))
    if gap > tol:
        raise ValidationError(f"constraint P_XJZ = Q_XJZ fails: max difference {gap:.3g}")
    gap = float(np.max(np.abs(marginalize(p_full, ("Yh", "Z")).table - marginalize(q_full, ("Yh", "Z")).table)))
    if gap > tol:
        raise ValidationError(f"constraint P_YhatZ = Q_YhatZ fails: max difference {gap:.3g}")

    def to_xy(full: JointTable) -> JointTable:
        return merge_axes(full.reorder(("X", "J", "Z", "Yh")), ("J", "Z", "Yh"), "Y").reorder(("X", "Y"))

    scn = DiscreteScenario(to_xy(p_full), to_xy(q_full), rate)
    nyh = p_full.table.shape[3]
    k = np.zeros((nx * nj * nz * nyh, nz * nj))
    for x in range(nx):
        for j in range(nj):
            for z in range(nz):
                for yh in range(nyh):
                    y = (j * nz + z) * nyh + yh
                    k[x * scn.n_y + y, z * nj + j] = 1.0
    return scn, AuxiliaryReceiver(k, k)
