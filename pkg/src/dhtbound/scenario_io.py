"""Reading and writing discrete scenario files.

A scenario file is a JSON document::

    {
      "schema_version": 1,
      "alphabets": {"X": 2, "Y": 2},
      "rate": 0.2,
      "p_xy": [[0.45, 0.05], [0.05, 0.45]],
      "q_xy": [[0.40, 0.10], [0.10, 0.40]],
      "aux": {
        "noisy": {"p_z_given_x": [[0.7, 0.3], [0.3, 0.7]],
                  "q_z_given_x": [[0.7, 0.3], [0.3, 0.7]]},
        "full":  {"p_z_given_xy": [...], "q_z_given_xy": [...]}
      },
      "j_augment": {"jx": {"aux": "noisy", "p_j_given_xyz": [...], "q_j_given_xyz": [...]}},
      "chains": {"two": [{"p_z_given_x": [...], "q_z_given_x": [...]}, ...]}
    }

Kernel rows are indexed by the conditioning symbols in row-major order
(``x * |Y| + y`` for ``z_given_xy``).  ``aux``, ``j_augment`` and ``chains``
are optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import AuxiliaryReceiver, DiscreteScenario
from .errors import ValidationError
from .prob import NORM_TOL, compose_joint, kl_tables

SCHEMA_VERSION = 1


@dataclass
class JAugment:
    aux: str
    p_j_given_xyz: np.ndarray
    q_j_given_xyz: np.ndarray


@dataclass
class LoadedScenario:
    scenario: DiscreteScenario
    aux: dict[str, AuxiliaryReceiver] = field(default_factory=dict)
    j_augment: dict[str, JAugment] = field(default_factory=dict)
    chains: dict[str, list[tuple[np.ndarray, np.ndarray]]] = field(default_factory=dict)
    report: dict = field(default_factory=dict)


def _matrix(doc: dict, key: str, where: str) -> np.ndarray:
    if key not in doc:
        raise ValidationError(f"{where}: missing field '{key}'")
    try:
        a = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}.{key}: not a rectangular numeric table") from None
    if a.ndim != 2:
        raise ValidationError(f"{where}.{key}: expected a 2-D table, got {a.ndim}-D")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{where}.{key}: non-finite entry")
    neg = np.argwhere(a < 0)
    if neg.size:
        r, c = neg[0]
        raise ValidationError(f"{where}.{key}: negative entry at row {r}, column {c}")
    return a


def _kernel(doc: dict, key: str, where: str, rows: int) -> np.ndarray:
    k = _matrix(doc, key, where)
    if k.shape[0] != rows:
        raise ValidationError(f"{where}.{key}: {k.shape[0]} rows, expected {rows}")
    sums = k.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"{where}.{key}: row {i} sums to {sums[i]:.12g}, not 1")
    return k


def _joint(doc: dict, key: str, shape: tuple[int, int]) -> np.ndarray:
    t = _matrix(doc, key, "scenario")
    if t.shape != shape:
        raise ValidationError(f"scenario.{key}: shape {t.shape} does not match alphabets {shape}")
    if abs(t.sum() - 1.0) > NORM_TOL:
        raise ValidationError(f"scenario.{key}: total mass {t.sum():.12g}, not 1")
    return t


def _aux_entry(doc: dict, name: str, nx: int, ny: int) -> AuxiliaryReceiver:
    where = f"aux.{name}"
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: expected an object")
    if "p_z_given_xy" in doc or "q_z_given_xy" in doc:
        p = _kernel(doc, "p_z_given_xy", where, nx * ny)
        q = _kernel(doc, "q_z_given_xy", where, nx * ny)
        if p.shape != q.shape:
            raise ValidationError(f"{where}: P and Q kernels differ in shape")
        return AuxiliaryReceiver(p, q)
    p = _kernel(doc, "p_z_given_x", where, nx)
    q = _kernel(doc, "q_z_given_x", where, nx)
    if p.shape != q.shape:
        raise ValidationError(f"{where}: P and Q kernels differ in shape")
    return AuxiliaryReceiver.from_x_kernels(p, q, ny)


def parse_scenario(doc: dict) -> LoadedScenario:
    """Validate a decoded scenario document."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario: top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"scenario.schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    alph = doc.get("alphabets")
    if not isinstance(alph, dict) or "X" not in alph or "Y" not in alph:
        raise ValidationError("scenario.alphabets: must declare sizes for X and Y")
    nx, ny = int(alph["X"]), int(alph["Y"])
    if "rate" not in doc:
        raise ValidationError("scenario: missing field 'rate'")
    scn = DiscreteScenario(_joint(doc, "p_xy", (nx, ny)), _joint(doc, "q_xy", (nx, ny)), float(doc["rate"]))
    out = LoadedScenario(scn)

    for name, entry in (doc.get("aux") or {}).items():
        out.aux[name] = _aux_entry(entry, name, nx, ny)
        if "Z" in alph and out.aux[name].n_z != int(alph["Z"]):
            raise ValidationError(f"aux.{name}: |Z| = {out.aux[name].n_z}, alphabets declare {alph['Z']}")

    for name, entry in (doc.get("j_augment") or {}).items():
        where = f"j_augment.{name}"
        ref = entry.get("aux")
        if ref not in out.aux:
            raise ValidationError(f"{where}.aux: unknown receiver {ref!r}")
        rows = nx * ny * out.aux[ref].n_z
        pj = _kernel(entry, "p_j_given_xyz", where, rows)
        qj = _kernel(entry, "q_j_given_xyz", where, rows)
        if pj.shape != qj.shape:
            raise ValidationError(f"{where}: P and Q kernels differ in shape")
        out.j_augment[name] = JAugment(ref, pj, qj)

    for name, links in (doc.get("chains") or {}).items():
        if not isinstance(links, list) or not links:
            raise ValidationError(f"chains.{name}: expected a non-empty list of links")
        chain = []
        for j, link in enumerate(links):
            where = f"chains.{name}[{j}]"
            p = _kernel(link, "p_z_given_x", where, nx)
            q = _kernel(link, "q_z_given_x", where, nx)
            if p.shape != q.shape:
                raise ValidationError(f"{where}: P and Q kernels differ in shape")
            chain.append((p, q))
        out.chains[name] = chain

    out.report = finiteness_report(out)
    return out


def finiteness_report(ls: LoadedScenario) -> dict:
    """KL finiteness of (P_XY, Q_XY) and of every (P_XZ, Q_XZ)."""
    scn = ls.scenario
    rep = {"D(P_XY||Q_XY)": kl_tables(scn.p_xy, scn.q_xy)}
    for name, aux in ls.aux.items():
        pz, qz = aux.x_kernels(scn)
        rep[f"D(P_XZ||Q_XZ)[{name}]"] = kl_tables(compose_joint(scn.p_x, pz), compose_joint(scn.q_x, qz))
    for name, chain in ls.chains.items():
        for j, (p, q) in enumerate(chain):
            rep[f"D(P_XZ||Q_XZ)[{name}:{j}]"] = kl_tables(compose_joint(scn.p_x, p), compose_joint(scn.q_x, q))
    rep["all_finite"] = bool(all(np.isfinite(v) for v in rep.values()))
    return rep


def load_scenario(path) -> LoadedScenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(doc)


def to_document(ls: LoadedScenario) -> dict:
    scn = ls.scenario
    doc = {
        "schema_version": SCHEMA_VERSION,
        "alphabets": {"X": scn.n_x, "Y": scn.n_y},
        "rate": scn.rate,
        "p_xy": scn.p_xy.table.tolist(),
        "q_xy": scn.q_xy.table.tolist(),
    }
    if ls.aux:
        doc["aux"] = {
            n: {"p_z_given_xy": a.p_z_given_xy.tolist(), "q_z_given_xy": a.q_z_given_xy.tolist()}
            for n, a in ls.aux.items()
        }
    if ls.j_augment:
        doc["j_augment"] = {
            n: {"aux": j.aux, "p_j_given_xyz": np.asarray(j.p_j_given_xyz).tolist(),
                "q_j_given_xyz": np.asarray(j.q_j_given_xyz).tolist()}
            for n, j in ls.j_augment.items()
        }
    if ls.chains:
        doc["chains"] = {
            n: [{"p_z_given_x": np.asarray(p).tolist(), "q_z_given_x": np.asarray(q).tolist()} for p, q in c]
            for n, c in ls.chains.items()
        }
    return doc


def save_scenario(ls: LoadedScenario, path) -> None:
    Path(path).write_text(json.dumps(to_document(ls), indent=2) + "\n")
