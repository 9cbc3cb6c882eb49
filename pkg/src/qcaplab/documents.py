"""JSON documents: load, validate, convert, save.

Every file is ``{"kind": ..., "version": "1", "payload": {...}}``. Complex
matrices are row-major nested lists whose entries are ``[re, im]`` pairs;
real data (graphs, classical channels) use plain numbers. Saving writes the
canonical encoding (sorted keys, shortest round-trip floats), so
``save(load(x))`` reproduces ``canonical(x)`` byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg_core as la
from .channels import (
    CPTP_TOL,
    Channel,
    CQChannel,
    DirectSumChannel,
    KrausChannel,
    MeasPrepChannel,
    QCChannel,
    validate_cptp,
)
from .errors import QCapError
from .reductions import LocalHamInstance, QSatInstance, Sat24Instance
from .serialize import canonical_json, encode_complex
from .zero_error import ClassicalChannel, CliqueInstance, Graph

VERSION = "1"
KINDS = ("graph", "classical_channel", "channel", "localham", "qsat", "sat24", "clique", "report")


class ValidationError(QCapError, ValueError):
    """A document does not match its schema; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Document:
    kind: str
    payload: dict
    version: str = VERSION

    def to_json(self) -> dict:
        return {"kind": self.kind, "version": self.version, "payload": self.payload}


# ---------------------------------------------------------------------------
# field helpers
# ---------------------------------------------------------------------------


def _field(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ValidationError(path, "expected an object")
    if key not in obj:
        raise ValidationError(f"{path}.{key}", "missing field")
    return obj[key]


def _int(x, path: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(path, f"expected an integer, got {x!r}")
    if lo is not None and x < lo:
        raise ValidationError(path, f"must be >= {lo}")
    return x


def _real(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(path, f"expected a number, got {x!r}")
    if not np.isfinite(x):
        raise ValidationError(path, "must be finite")
    return float(x)


def _complex_array(x, path: str, ndim: int) -> np.ndarray:
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(path, "expected a rectangular array of [re, im] pairs") from None
    if a.ndim != ndim + 1 or a.shape[-1] != 2:
        raise ValidationError(path, f"expected a {ndim}-D array of [re, im] pairs")
    if not np.all(np.isfinite(a)):
        raise ValidationError(path, "entries must be finite")
    return a[..., 0] + 1j * a[..., 1]


def _matrix_list(x, path: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ValidationError(path, "expected a non-empty list of matrices")
    mats = [_complex_array(m, f"{path}[{i}]", 2) for i, m in enumerate(x)]
    if any(m.shape != mats[0].shape for m in mats):
        raise ValidationError(path, "matrices must share one shape")
    return np.array(mats)


def _square_list(x, path: str) -> np.ndarray:
    mats = _matrix_list(x, path)
    if mats.shape[1] != mats.shape[2]:
        raise ValidationError(path, "matrices must be square")
    if mats.shape[1] > la.DIM_CAP:
        raise ValidationError(path, f"dimension exceeds cap {la.DIM_CAP}")
    return mats


# ---------------------------------------------------------------------------
# channel payloads
# ---------------------------------------------------------------------------


def channel_from_payload(p: dict, path: str = "payload", check: bool = True) -> Channel:
    """Build a channel; with ``check`` reject anything that is not CPTP within 1e-9."""
    form = _field(p, "form", path)
    if form == "kraus":
        ops = _matrix_list(_field(p, "kraus", path), f"{path}.kraus")
        ch = KrausChannel(ops)
        key = "kraus"
    elif form in ("meas_prep", "qc"):
        effects = _square_list(_field(p, "effects", path), f"{path}.effects")
        if check:
            for i, m in enumerate(effects):
                if la.max_abs(m - m.conj().T) > CPTP_TOL or np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -CPTP_TOL:
                    raise ValidationError(f"{path}.effects[{i}]", "effect is not positive semidefinite")
        if form == "qc":
            ch = QCChannel(effects)
        else:
            preps = _square_list(_field(p, "preps", path), f"{path}.preps")
            if len(preps) != len(effects):
                raise ValidationError(f"{path}.preps", "need one preparation per effect")
            if check:
                _check_states(preps, f"{path}.preps")
            ch = MeasPrepChannel(effects, preps)
        key = "effects"
    elif form == "cq":
        preps = _square_list(_field(p, "preps", path), f"{path}.preps")
        if check:
            _check_states(preps, f"{path}.preps")
        ch = CQChannel(preps)
        key = "preps"
    elif form == "direct_sum":
        weights = _field(p, "weights", path)
        parts = _field(p, "parts", path)
        if not isinstance(weights, list) or not isinstance(parts, list) or len(weights) != len(parts) or not parts:
            raise ValidationError(f"{path}.parts", "need matching non-empty weights and parts")
        w = np.array([_real(x, f"{path}.weights[{i}]") for i, x in enumerate(weights)])
        if np.any(w < 0) or abs(w.sum() - 1.0) > la.TOL_ALGEBRA:
            raise ValidationError(f"{path}.weights", "weights must form a probability vector")
        chans = [channel_from_payload(q, f"{path}.parts[{i}]", check) for i, q in enumerate(parts)]
        if any(c.dim_in != chans[0].dim_in for c in chans):
            raise ValidationError(f"{path}.parts", "parts must share the input dimension")
        return DirectSumChannel(w, chans)
    else:
        raise ValidationError(f"{path}.form", f"unknown channel form {form!r}")
    if check:
        rep = validate_cptp(ch)
        if rep.completeness_residual > CPTP_TOL:
            raise ValidationError(f"{path}.{key}",
                                  f"completeness residual {rep.completeness_residual:.3e} exceeds {CPTP_TOL}")
        if rep.choi_min_eigenvalue < -CPTP_TOL:
            raise ValidationError(f"{path}.{key}",
                                  f"Choi matrix has eigenvalue {rep.choi_min_eigenvalue:.3e} < 0")
    return ch


def _check_states(preps: np.ndarray, path: str) -> None:
    for i, s in enumerate(preps):
        try:
            la.as_density(s, herm_tol=CPTP_TOL, trace_tol=CPTP_TOL)
        except QCapError as exc:
            raise ValidationError(f"{path}[{i}]", str(exc)) from None


def channel_payload(ch: Channel) -> dict:
    if isinstance(ch, KrausChannel):
        return {"form": "kraus", "kraus": encode_complex(ch.kraus)}
    if isinstance(ch, MeasPrepChannel):
        return {"form": "meas_prep", "effects": encode_complex(ch.effects), "preps": encode_complex(ch.preps)}
    if isinstance(ch, QCChannel):
        return {"form": "qc", "effects": encode_complex(ch.effects)}
    if isinstance(ch, CQChannel):
        return {"form": "cq", "preps": encode_complex(ch.preps)}
    if isinstance(ch, DirectSumChannel):
        return {"form": "direct_sum", "weights": ch.weights.tolist(), "parts": [channel_payload(c) for c in ch.parts]}
    raise TypeError(f"unsupported channel type {type(ch).__name__}")


# ---------------------------------------------------------------------------
# per-kind parsing
# ---------------------------------------------------------------------------


def _graph(p: dict) -> Graph:
    n = _int(_field(p, "n", "payload"), "payload.n", lo=0)
    edges = _field(p, "edges", "payload")
    if not isinstance(edges, list):
        raise ValidationError("payload.edges", "expected a list of [u, v] pairs")
    clean = []
    for i, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise ValidationError(f"payload.edges[{i}]", "expected [u, v]")
        u, v = (_int(x, f"payload.edges[{i}]", lo=0) for x in e)
        if u == v or u >= n or v >= n:
            raise ValidationError(f"payload.edges[{i}]", f"invalid edge ({u}, {v}) for n={n}")
        clean.append((u, v))
    return Graph(n, clean)


def _classical(p: dict) -> ClassicalChannel:
    rows = _field(p, "p", "payload")
    try:
        a = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("payload.p", "expected a rectangular matrix of numbers") from None
    if a.ndim != 2 or a.size == 0:
        raise ValidationError("payload.p", "expected a non-empty matrix")
    if np.any(~np.isfinite(a)) or np.any(a < 0):
        raise ValidationError("payload.p", "entries must be finite and non-negative")
    bad = np.nonzero(np.abs(a.sum(axis=1) - 1.0) > la.TOL_ALGEBRA)[0]
    if bad.size:
        raise ValidationError(f"payload.p[{int(bad[0])}]", "row does not sum to 1")
    return ClassicalChannel(a)


def _terms(items, path: str) -> list:
    if not isinstance(items, list):
        raise ValidationError(path, "expected a list")
    out = []
    for i, t in enumerate(items):
        sup = _field(t, "support", f"{path}[{i}]")
        if not isinstance(sup, list):
            raise ValidationError(f"{path}[{i}].support", "expected a list of qubit indices")
        sup = [_int(q, f"{path}[{i}].support", lo=0) for q in sup]
        out.append((sup, _complex_array(_field(t, "matrix", f"{path}[{i}]"), f"{path}[{i}].matrix", 2)))
    return out


def _wrap(fn, path: str):
    try:
        return fn()
    except ValidationError:
        raise
    except (QCapError, ValueError) as exc:
        raise ValidationError(path, str(exc)) from None


def _localham(p: dict) -> LocalHamInstance:
    q = _int(_field(p, "qubits", "payload"), "payload.qubits", lo=1)
    terms = _terms(_field(p, "terms", "payload"), "payload.terms")
    a = _real(_field(p, "a", "payload"), "payload.a")
    b = _real(_field(p, "b", "payload"), "payload.b")
    return _wrap(lambda: LocalHamInstance(q, terms, a, b), "payload.terms")


def _qsat(p: dict) -> QSatInstance:
    q = _int(_field(p, "qubits", "payload"), "payload.qubits", lo=1)
    projs = _terms(_field(p, "projections", "payload"), "payload.projections")
    eps = _real(_field(p, "epsilon", "payload"), "payload.epsilon")
    return _wrap(lambda: QSatInstance(q, projs, eps), "payload.projections")


def _sat24(p: dict) -> Sat24Instance:
    n = _int(_field(p, "n", "payload"), "payload.n", lo=1)
    clauses = _field(p, "clauses", "payload")
    if not isinstance(clauses, list):
        raise ValidationError("payload.clauses", "expected a list")
    clean = []
    for i, c in enumerate(clauses):
        vars_ = _field(c, "vars", f"payload.clauses[{i}]")
        signs = _field(c, "signs", f"payload.clauses[{i}]")
        if not isinstance(vars_, list) or not isinstance(signs, list):
            raise ValidationError(f"payload.clauses[{i}]", "vars and signs must be lists")
        vars_ = [_int(v, f"payload.clauses[{i}].vars") for v in vars_]
        signs = [_int(s, f"payload.clauses[{i}].signs") for s in signs]
        clean.append((vars_, signs))
        _wrap(lambda: Sat24Instance(n, [clean[-1]]), f"payload.clauses[{i}]")
    return Sat24Instance(n, clean)


def _clique(p: dict) -> CliqueInstance:
    ch = channel_from_payload(_field(p, "channel", "payload"), "payload.channel")
    k = _int(_field(p, "k", "payload"), "payload.k", lo=1)
    a = _real(_field(p, "a", "payload"), "payload.a")
    b = _real(_field(p, "b", "payload"), "payload.b")
    notes = p.get("notes", {})
    return _wrap(lambda: CliqueInstance(ch, k, a, b, dict(notes)), "payload.a")


def _report(p: dict) -> dict:
    for key in ("reduction", "seed", "verdict", "instance"):
        _field(p, key, "payload")
    inst = p["instance"]
    parse(Document(_field(inst, "kind", "payload.instance"), _field(inst, "payload", "payload.instance")))
    return p


_PARSERS = {
    "graph": _graph,
    "classical_channel": _classical,
    "channel": channel_from_payload,
    "localham": _localham,
    "qsat": _qsat,
    "sat24": _sat24,
    "clique": _clique,
    "report": _report,
}


def parse(doc: Document):
    """Validate the payload and return the domain object it describes."""
    if doc.kind not in _PARSERS:
        raise ValidationError("kind", f"unknown kind {doc.kind!r}; expected one of {', '.join(KINDS)}")
    if not isinstance(doc.payload, dict):
        raise ValidationError("payload", "expected an object")
    return _PARSERS[doc.kind](doc.payload)


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def loads(text: str, validate: bool = True) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("$", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError("$", "document must be a JSON object")
    kind = _field(raw, "kind", "$")
    version = _field(raw, "version", "$")
    if version != VERSION:
        raise ValidationError("version", f"unsupported version {version!r}")
    doc = Document(kind, _field(raw, "payload", "$"), version)
    if validate:
        parse(doc)
    elif kind not in KINDS:
        raise ValidationError("kind", f"unknown kind {kind!r}")
    return doc


def load(path, validate: bool = True) -> Document:
    return loads(Path(path).read_text(encoding="utf-8"), validate)


def dumps(doc: Document) -> str:
    return canonical_json(doc.to_json())


def save(doc: Document, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def canonical(text: str) -> str:
    """Canonical form of a JSON text (what ``save`` would write for it)."""
    return canonical_json(json.loads(text))


# ---------------------------------------------------------------------------
# domain object -> document
# ---------------------------------------------------------------------------


def graph_document(g: Graph) -> Document:
    return Document("graph", {"n": g.n, "edges": g.sorted_edges()})


def classical_channel_document(ch: ClassicalChannel) -> Document:
    return Document("classical_channel", {"p": ch.p.tolist()})


def channel_document(ch: Channel) -> Document:
    return Document("channel", channel_payload(ch))


def instance_document(inst) -> Document:
    kinds = {LocalHamInstance: "localham", QSatInstance: "qsat", Sat24Instance: "sat24"}
    for cls, kind in kinds.items():
        if isinstance(inst, cls):
            return Document(kind, json.loads(canonical_json(inst.to_payload(), indent=None)))
    if isinstance(inst, (KrausChannel, MeasPrepChannel, QCChannel, CQChannel, DirectSumChannel)):
        return channel_document(inst)
    raise TypeError(f"no document kind for {type(inst).__name__}")


def clique_document(c: CliqueInstance) -> Document:
    return Document("clique", {"channel": channel_payload(c.channel), "k": c.k, "a": c.a, "b": c.b,
                               "notes": json.loads(canonical_json(c.notes, indent=None))})


def report_document(report, instance_doc: Document) -> Document:
    payload = json.loads(canonical_json(report, indent=None))
    payload["instance"] = instance_doc.to_json()
    return Document("report", payload)
