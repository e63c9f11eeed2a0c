"""Finite-alphabet probability arithmetic.

Distributions are plain read-only numpy arrays: a probability vector is 1-D,
a kernel (conditional distribution) is 2-D and row-stochastic, row-indexed by
the conditioning symbol.  Joint tables carry named axes so that marginals,
conditionals and (conditional) mutual informations can be requested by name.

All quantities are in nats.  ``+inf`` is a legitimate value for divergences;
``inf - inf`` is never silently produced (see :func:`ext_sub`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IndeterminateError, ValidationError

MAX_ALPHABET = 16
NORM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_simplex(p, name: str = "p") -> np.ndarray:
    """Validate a probability vector and return it as a read-only array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{name}: expected a non-empty 1-D vector, got shape {p.shape}")
    if p.size > MAX_ALPHABET:
        raise ValidationError(f"{name}: alphabet size {p.size} exceeds cap {MAX_ALPHABET}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError(f"{name}: entries must be finite and non-negative")
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"{name}: entries sum to {total:.12g}, not 1")
    return _frozen(p)


def as_kernel(k, name: str = "kernel") -> np.ndarray:
    """Validate a row-stochastic matrix (rows = conditioning symbols)."""
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.size == 0:
        raise ValidationError(f"{name}: expected a non-empty 2-D matrix, got shape {k.shape}")
    if k.shape[1] > MAX_ALPHABET:
        raise ValidationError(f"{name}: output alphabet {k.shape[1]} exceeds cap {MAX_ALPHABET}")
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ValidationError(f"{name}: entries must be finite and non-negative")
    sums = k.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"{name}: row {i} sums to {sums[i]:.12g}, not 1")
    return _frozen(k)


# extended-real helpers ------------------------------------------------------


def ext_sub(a: float, b: float) -> float:
    """``a - b`` on the extended reals; raises on ``inf - inf``."""
    if np.isinf(a) and np.isinf(b) and np.sign(a) == np.sign(b):
        raise IndeterminateError("indeterminate form inf - inf")
    return float(a - b)


def ext_add(a: float, b: float) -> float:
    """``a + b`` on the extended reals; raises on ``inf + (-inf)``."""
    if np.isinf(a) and np.isinf(b) and np.sign(a) != np.sign(b):
        raise IndeterminateError("indeterminate form inf - inf")
    return float(a + b)


def ext_sum(terms: Iterable[float]) -> float:
    total = 0.0
    for t in terms:
        total = ext_add(total, t)
    return total


# divergences ----------------------------------------------------------------


def kl_divergence(p, q) -> float:
    """D(p || q) in nats with 0 ln(0/q) = 0; ``inf`` when p is not << q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValidationError(f"kl_divergence: shape mismatch {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        return float("inf")
    ps, qs = p[support], q[support]
    return float(np.sum(ps * np.log(ps / qs)))


def conditional_kl(pk, qk, w) -> float:
    """sum_u w(u) D(pk[u] || qk[u]); rows with zero weight are ignored."""
    pk = np.asarray(pk, dtype=float)
    qk = np.asarray(qk, dtype=float)
    w = np.asarray(w, dtype=float)
    if pk.shape != qk.shape or pk.ndim != 2 or w.shape != (pk.shape[0],):
        raise ValidationError(
            f"conditional_kl: shapes {pk.shape}, {qk.shape}, weights {w.shape} do not match"
        )
    return ext_sum(w[u] * kl_divergence(pk[u], qk[u]) for u in range(w.size) if w[u] > 0)


def entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def push_forward(p, k) -> np.ndarray:
    """Output marginal of input distribution ``p`` through kernel ``k``."""
    p = np.asarray(p, dtype=float)
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or p.shape != (k.shape[0],):
        raise ValidationError(f"push_forward: vector {p.shape} does not match kernel {k.shape}")
    return p @ k


# joint tables ---------------------------------------------------------------


@dataclass(frozen=True)
class JointTable:
    """Dense joint distribution over named finite alphabets."""

    axes: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        table = np.asarray(self.table, dtype=float)
        if len(set(axes)) != len(axes):
            raise ValidationError(f"JointTable: duplicate axis names {axes}")
        if table.ndim != len(axes):
            raise ValidationError(f"JointTable: {len(axes)} axes but table has ndim {table.ndim}")
        if any(n > MAX_ALPHABET for n in table.shape):
            raise ValidationError(f"JointTable: alphabet sizes {table.shape} exceed cap {MAX_ALPHABET}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise ValidationError("JointTable: entries must be finite and non-negative")
        if abs(table.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"JointTable: total mass {table.sum():.12g}, not 1")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", _frozen(table))

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.axes, self.table.shape))

    def index(self, axis: str) -> int:
        try:
            return self.axes.index(axis)
        except ValueError:
            raise ValidationError(f"unknown axis {axis!r}; table has {self.axes}") from None

    def reorder(self, axes: Sequence[str]) -> "JointTable":
        axes = tuple(axes)
        if sorted(axes) != sorted(self.axes):
            raise ValidationError(f"reorder: {axes} is not a permutation of {self.axes}")
        return JointTable(axes, np.transpose(self.table, [self.index(a) for a in axes]))

    def __getitem__(self, axes) -> "JointTable":
        return marginalize(self, _as_axes(axes))


def _as_axes(a) -> tuple[str, ...]:
    if isinstance(a, str):
        return (a,)
    return tuple(a)


def compose_joint(p_x, k, axes: tuple[str, str] = ("X", "Y")) -> JointTable:
    """Joint table of (input, output) from an input law and a kernel."""
    p_x = np.asarray(p_x, dtype=float)
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or p_x.shape != (k.shape[0],):
        raise ValidationError(f"compose_joint: vector {p_x.shape} does not match kernel {k.shape}")
    return JointTable(axes, p_x[:, None] * k)


def extend(joint: JointTable, given, kernel, new_axis: str) -> JointTable:
    """Append ``new_axis`` drawn from ``kernel`` conditioned on the ``given`` axes.

    Kernel rows are indexed by the given axes in row-major order.
    """
    given = _as_axes(given)
    kernel = np.asarray(kernel, dtype=float)
    if new_axis in joint.axes:
        raise ValidationError(f"extend: axis {new_axis!r} already present")
    idx = [joint.index(a) for a in given]
    n_rows = int(np.prod([joint.table.shape[i] for i in idx])) if idx else 1
    if kernel.ndim != 2 or kernel.shape[0] != n_rows:
        raise ValidationError(
            f"extend: kernel has shape {kernel.shape}, expected {n_rows} rows for axes {given}"
        )
    # broadcast kernel over the remaining axes
    rest = [i for i in range(len(joint.axes)) if i not in idx]
    t = np.transpose(joint.table, idx + rest)
    gshape = t.shape[: len(idx)]
    k = kernel.reshape(gshape + (1,) * len(rest) + (kernel.shape[1],))
    out = t[..., None] * k
    inverse = np.argsort(idx + rest)
    out = np.transpose(out, list(inverse) + [len(joint.axes)])
    return JointTable(joint.axes + (new_axis,), out)


def marginalize(joint: JointTable, axes) -> JointTable:
    """Keep ``axes`` (in the given order), summing out everything else."""
    axes = _as_axes(axes)
    keep = [joint.index(a) for a in axes]
    drop = tuple(i for i in range(len(joint.axes)) if i not in keep)
    t = joint.table.sum(axis=drop) if drop else joint.table
    remaining = [i for i in range(len(joint.axes)) if i in keep]
    t = np.transpose(t, [remaining.index(i) for i in keep])
    return JointTable(axes, t)


def condition(joint: JointTable, given, target=None) -> tuple[np.ndarray, np.ndarray]:
    """Kernel P(target | given) with rows in row-major order of ``given``.

    Returns ``(kernel, zero_mass)`` where ``zero_mass`` flags conditioning
    symbols of probability zero; their rows are uniform placeholders.
    """
    given = _as_axes(given)
    if target is None:
        target = tuple(a for a in joint.axes if a not in given)
    target = _as_axes(target)
    if set(given) & set(target):
        raise ValidationError(f"condition: overlapping axes {given} and {target}")
    m = marginalize(joint, given + target).table
    n_in = int(np.prod(m.shape[: len(given)])) if given else 1
    flat = m.reshape(n_in, -1)
    mass = flat.sum(axis=1)
    zero = mass <= 0
    out = np.empty_like(flat)
    out[~zero] = flat[~zero] / mass[~zero, None]
    out[zero] = 1.0 / flat.shape[1]
    return out, zero


def merge_axes(joint: JointTable, axes, name: str) -> JointTable:
    """Fuse several axes into one product axis (row-major), placed last."""
    axes = _as_axes(axes)
    others = tuple(a for a in joint.axes if a not in axes)
    t = joint.reorder(others + axes).table
    shape = t.shape[: len(others)] + (int(np.prod(t.shape[len(others):])),)
    return JointTable(others + (name,), t.reshape(shape))


def joint_entropy(joint: JointTable, axes) -> float:
    axes = _as_axes(axes)
    if not axes:
        return 0.0
    return entropy(marginalize(joint, axes).table)


def conditional_mi(joint: JointTable, a, b, c=()) -> float:
    """I(A;B|C) in nats; each argument is an axis name or a tuple of names."""
    a, b, c = _as_axes(a), _as_axes(b), _as_axes(c)
    for x in a + b + c:
        joint.index(x)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c) or len(set(a + b + c)) != len(a + b + c):
        raise ValidationError(f"conditional_mi: axes must be disjoint, got {a}, {b}, {c}")
    h = lambda ax: joint_entropy(joint, ax)  # noqa: E731
    value = h(a + c) + h(b + c) - h(a + b + c) - h(c)
    return max(value, 0.0)


def kl_tables(p: JointTable, q: JointTable) -> float:
    """KL divergence between two joint tables over the same axes."""
    q = q.reorder(p.axes)
    if p.table.shape != q.table.shape:
        raise ValidationError(f"kl_tables: shapes {p.table.shape} vs {q.table.shape}")
    return kl_divergence(p.table.ravel(), q.table.ravel())
