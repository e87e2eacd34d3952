"""
JSON interchange format for all five automaton kinds.

Complex numbers are ``[re, im]`` pairs (a bare real number is accepted on
input), matrices are row-major nested arrays, and classical states are
referred to by name. Emitted documents have a fixed field order and print
floats with Python's shortest round-trip repr, so ``parse(emit(m))``
reproduces ``m`` bit for bit.

Example::

    {
      "model": "dfa",
      "alphabet": ["a"],
      "states": ["even", "odd"],
      "initial": "even",
      "accepting": ["even"],
      "transitions": {"even": {"a": "odd"}, "odd": {"a": "even"}}
    }
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from semiqfa.linalg import VALIDATION_TOL, ComplexMatrix
from semiqfa.models import (
    ClQfa,
    Dfa,
    InvalidModelError,
    Model,
    ModelStructureError,
    MoGqfa,
    QcfaAut,
    QfacAut,
    validate_model,
)


class FormatError(ValueError):
    """Structural problem in a document; ``path`` points at the offending node."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _reject_constant(name: str) -> float:
    raise ValueError(f"non-finite number {name} is not allowed")


def _obj(v: Any, path: str) -> dict:
    if not isinstance(v, dict):
        raise FormatError(path, f"expected an object, got {type(v).__name__}")
    return v


def _keys(doc: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> None:
    for key in required:
        if key not in doc:
            raise FormatError(path, f"missing field {key!r}")
    extra = set(doc) - set(required) - set(optional)
    if extra:
        raise FormatError(path, f"unknown field(s) {sorted(extra)}")


def _list(v: Any, path: str, nonempty: bool = True) -> list:
    if not isinstance(v, list):
        raise FormatError(path, f"expected an array, got {type(v).__name__}")
    if nonempty and not v:
        raise FormatError(path, "array must not be empty")
    return v


def _str(v: Any, path: str) -> str:
    if not isinstance(v, str):
        raise FormatError(path, f"expected a string, got {type(v).__name__}")
    return v


def _int(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(path, f"expected an integer, got {v!r}")
    return v


def _real(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise FormatError(path, "number must be finite")
    return float(v)


def _complex(v: Any, path: str) -> complex:
    if isinstance(v, list):
        if len(v) != 2:
            raise FormatError(path, "complex number must be [re, im]")
        return complex(_real(v[0], f"{path}[0]"), _real(v[1], f"{path}[1]"))
    return complex(_real(v, path))


def _matrix(v: Any, path: str) -> ComplexMatrix:
    rows = _list(v, path)
    width = None
    out = []
    for i, row in enumerate(rows):
        row = _list(row, f"{path}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
        out.append([_complex(e, f"{path}[{i}][{j}]") for j, e in enumerate(row)])
    return np.array(out, dtype=np.complex128)


def _symbols(v: Any, path: str) -> tuple[str, ...]:
    syms = tuple(_str(s, f"{path}[{i}]") for i, s in enumerate(_list(v, path)))
    if len(set(syms)) != len(syms):
        raise FormatError(path, "duplicate symbols")
    return syms


def _state(v: Any, index: dict[str, int], path: str) -> int:
    name = _str(v, path)
    if name not in index:
        raise FormatError(path, f"unknown state {name!r}")
    return index[name]


def _per_symbol(v: Any, alphabet: tuple[str, ...], path: str) -> dict:
    table = _obj(v, path)
    _keys(table, path, alphabet)
    return table


def _parse_dfa(doc: dict, path: str) -> Dfa:
    _keys(doc, path, ("model", "alphabet", "states", "initial", "accepting", "transitions"))
    alphabet = _symbols(doc["alphabet"], f"{path}.alphabet")
    names = _symbols(doc["states"], f"{path}.states")
    index = {n: i for i, n in enumerate(names)}
    trans_doc = _obj(doc["transitions"], f"{path}.transitions")
    _keys(trans_doc, f"{path}.transitions", names)
    trans = []
    for name in names:
        p = f"{path}.transitions.{name}"
        row = _per_symbol(trans_doc[name], alphabet, p)
        trans.append({sym: _state(row[sym], index, f"{p}.{sym}") for sym in alphabet})
    accepting = _list(doc["accepting"], f"{path}.accepting", nonempty=False)
    return Dfa(
        alphabet=alphabet,
        states=names,
        initial=_state(doc["initial"], index, f"{path}.initial"),
        accepting=frozenset(_state(a, index, f"{path}.accepting[{i}]") for i, a in enumerate(accepting)),
        trans=tuple(trans),
    )


def _parse_mo(doc: dict, path: str) -> MoGqfa:
    _keys(doc, path, ("model", "alphabet", "dim", "rho0", "channels", "p_acc"))
    alphabet = _symbols(doc["alphabet"], f"{path}.alphabet")
    chans = _per_symbol(doc["channels"], alphabet, f"{path}.channels")
    channels = {
        sym: [_matrix(e, f"{path}.channels.{sym}[{i}]") for i, e in enumerate(_list(chans[sym], f"{path}.channels.{sym}"))]
        for sym in alphabet
    }
    return MoGqfa(
        dim=_int(doc["dim"], f"{path}.dim"),
        alphabet=alphabet,
        rho0=_matrix(doc["rho0"], f"{path}.rho0"),
        channels=channels,
        p_acc=_matrix(doc["p_acc"], f"{path}.p_acc"),
    )


def _parse_cl(doc: dict, path: str) -> ClQfa:
    _keys(doc, path, ("model", "alphabet", "q_dim", "outcomes", "q_init", "unitaries", "measurement", "control"))
    alphabet = _symbols(doc["alphabet"], f"{path}.alphabet")
    outcomes = _symbols(doc["outcomes"], f"{path}.outcomes")
    units = _per_symbol(doc["unitaries"], alphabet, f"{path}.unitaries")
    meas = _per_symbol(doc["measurement"], outcomes, f"{path}.measurement")
    control_doc = _obj(doc["control"], f"{path}.control")
    if control_doc.get("model") != "dfa":
        raise FormatError(f"{path}.control.model", "control must be a dfa document")
    return ClQfa(
        q_dim=_int(doc["q_dim"], f"{path}.q_dim"),
        alphabet=alphabet,
        outcomes=outcomes,
        q_init=_int(doc["q_init"], f"{path}.q_init"),
        unitaries={sym: _matrix(units[sym], f"{path}.unitaries.{sym}") for sym in alphabet},
        measurement={c: _matrix(meas[c], f"{path}.measurement.{c}") for c in outcomes},
        control=_parse_dfa(control_doc, f"{path}.control"),
    )


def _parse_qfac(doc: dict, path: str) -> QfacAut:
    _keys(doc, path, ("model", "alphabet", "q_dim", "c_states", "q_init", "c_init", "unitaries", "transitions", "accept_projs"))
    alphabet = _symbols(doc["alphabet"], f"{path}.alphabet")
    names = _symbols(doc["c_states"], f"{path}.c_states")
    index = {n: i for i, n in enumerate(names)}
    units = _obj(doc["unitaries"], f"{path}.unitaries")
    trans_doc = _obj(doc["transitions"], f"{path}.transitions")
    projs = _obj(doc["accept_projs"], f"{path}.accept_projs")
    for key, table in (("unitaries", units), ("transitions", trans_doc), ("accept_projs", projs)):
        _keys(table, f"{path}.{key}", names)
    unitaries, trans = [], []
    for name in names:
        urow = _per_symbol(units[name], alphabet, f"{path}.unitaries.{name}")
        trow = _per_symbol(trans_doc[name], alphabet, f"{path}.transitions.{name}")
        unitaries.append({sym: _matrix(urow[sym], f"{path}.unitaries.{name}.{sym}") for sym in alphabet})
        trans.append({sym: _state(trow[sym], index, f"{path}.transitions.{name}.{sym}") for sym in alphabet})
    return QfacAut(
        q_dim=_int(doc["q_dim"], f"{path}.q_dim"),
        c_states=names,
        alphabet=alphabet,
        q_init=_int(doc["q_init"], f"{path}.q_init"),
        c_init=_state(doc["c_init"], index, f"{path}.c_init"),
        unitaries=tuple(unitaries),
        trans=tuple(trans),
        accept_projs=tuple(_matrix(projs[n], f"{path}.accept_projs.{n}") for n in names),
    )


def _parse_qcfa(doc: dict, path: str) -> QcfaAut:
    _keys(doc, path, ("model", "alphabet", "q_dim", "c_states", "outcomes", "q_init", "c_init",
                      "measurements", "transitions", "accepting"))
    alphabet = _symbols(doc["alphabet"], f"{path}.alphabet")
    names = _symbols(doc["c_states"], f"{path}.c_states")
    outcomes = _symbols(doc["outcomes"], f"{path}.outcomes")
    index = {n: i for i, n in enumerate(names)}
    meas_doc = _obj(doc["measurements"], f"{path}.measurements")
    trans_doc = _obj(doc["transitions"], f"{path}.transitions")
    _keys(meas_doc, f"{path}.measurements", names)
    _keys(trans_doc, f"{path}.transitions", names)
    meas, trans = [], []
    for name in names:
        mrow = _per_symbol(meas_doc[name], alphabet, f"{path}.measurements.{name}")
        trow = _per_symbol(trans_doc[name], alphabet, f"{path}.transitions.{name}")
        m_s, t_s = {}, {}
        for sym in alphabet:
            mp, tp = f"{path}.measurements.{name}.{sym}", f"{path}.transitions.{name}.{sym}"
            ops = _per_symbol(mrow[sym], outcomes, mp)
            targets = _per_symbol(trow[sym], outcomes, tp)
            m_s[sym] = {c: _matrix(ops[c], f"{mp}.{c}") for c in outcomes}
            t_s[sym] = {c: _state(targets[c], index, f"{tp}.{c}") for c in outcomes}
        meas.append(m_s)
        trans.append(t_s)
    accepting = _list(doc["accepting"], f"{path}.accepting", nonempty=False)
    return QcfaAut(
        q_dim=_int(doc["q_dim"], f"{path}.q_dim"),
        c_states=names,
        alphabet=alphabet,
        outcomes=outcomes,
        q_init=_int(doc["q_init"], f"{path}.q_init"),
        c_init=_state(doc["c_init"], index, f"{path}.c_init"),
        measurements=tuple(meas),
        trans=tuple(trans),
        accepting=frozenset(_state(a, index, f"{path}.accepting[{i}]") for i, a in enumerate(accepting)),
    )


_PARSERS = {
    "dfa": _parse_dfa,
    "mo1gqfa": _parse_mo,
    "cl1qfa": _parse_cl,
    "1qfac": _parse_qfac,
    "1qcfa": _parse_qcfa,
}


def parse_automaton(text: str, validate: bool = True, tol: float = VALIDATION_TOL) -> Model:
    """
    Parse a JSON document into a model.

    Raises
    ------
    FormatError
        Invalid JSON or a structural problem; ``path`` locates it.
    InvalidModelError
        The model is well formed but fails :func:`validate_model` (only
        when ``validate`` is set).
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise FormatError("$", f"not a valid JSON document: {exc}") from None
    doc = _obj(doc, "$")
    kind = doc.get("model")
    if kind not in _PARSERS:
        raise FormatError("$.model", f"unknown model tag {kind!r}; expected one of {sorted(_PARSERS)}")
    try:
        model = _PARSERS[kind](doc, "$")
    except ModelStructureError as exc:
        raise FormatError("$", str(exc)) from None
    if validate:
        report = validate_model(model, tol)
        if not report.ok:
            raise InvalidModelError(report)
    return model


def load_automaton(path: str, validate: bool = True, tol: float = VALIDATION_TOL) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_automaton(fh.read(), validate, tol)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _mat(m: ComplexMatrix) -> list[list[list[float]]]:
    return [[_cplx(z) for z in row] for row in m]


def _dfa_doc(d: Dfa) -> dict:
    return {
        "model": "dfa",
        "alphabet": list(d.alphabet),
        "states": list(d.states),
        "initial": d.states[d.initial],
        "accepting": [d.states[s] for s in sorted(d.accepting)],
        "transitions": {d.states[s]: {sym: d.states[d.trans[s][sym]] for sym in d.alphabet} for s in range(d.size)},
    }


def to_document(m: Model) -> dict:
    """The model as plain JSON-compatible data, fields in canonical order."""
    if isinstance(m, Dfa):
        return _dfa_doc(m)
    if isinstance(m, MoGqfa):
        return {
            "model": m.kind,
            "alphabet": list(m.alphabet),
            "dim": m.dim,
            "rho0": _mat(m.rho0),
            "channels": {sym: [_mat(e) for e in m.channels[sym]] for sym in m.alphabet},
            "p_acc": _mat(m.p_acc),
        }
    if isinstance(m, ClQfa):
        return {
            "model": m.kind,
            "alphabet": list(m.alphabet),
            "q_dim": m.q_dim,
            "outcomes": list(m.outcomes),
            "q_init": m.q_init,
            "unitaries": {sym: _mat(m.unitaries[sym]) for sym in m.alphabet},
            "measurement": {c: _mat(m.measurement[c]) for c in m.outcomes},
            "control": _dfa_doc(m.control),
        }
    if isinstance(m, QfacAut):
        names = m.c_states
        return {
            "model": m.kind,
            "alphabet": list(m.alphabet),
            "q_dim": m.q_dim,
            "c_states": list(names),
            "q_init": m.q_init,
            "c_init": names[m.c_init],
            "unitaries": {names[s]: {sym: _mat(m.unitaries[s][sym]) for sym in m.alphabet} for s in range(len(names))},
            "transitions": {names[s]: {sym: names[m.trans[s][sym]] for sym in m.alphabet} for s in range(len(names))},
            "accept_projs": {names[s]: _mat(m.accept_projs[s]) for s in range(len(names))},
        }
    if isinstance(m, QcfaAut):
        names = m.c_states
        k = len(names)
        return {
            "model": m.kind,
            "alphabet": list(m.alphabet),
            "q_dim": m.q_dim,
            "c_states": list(names),
            "outcomes": list(m.outcomes),
            "q_init": m.q_init,
            "c_init": names[m.c_init],
            "measurements": {
                names[s]: {sym: {c: _mat(m.measurements[s][sym][c]) for c in m.outcomes} for sym in m.alphabet}
                for s in range(k)
            },
            "transitions": {
                names[s]: {sym: {c: names[m.trans[s][sym][c]] for c in m.outcomes} for sym in m.alphabet}
                for s in range(k)
            },
            "accepting": [names[s] for s in sorted(m.accepting)],
        }
    raise TypeError(f"not an automaton model: {type(m).__name__}")


def _is_leaf(v: Any) -> bool:
    return isinstance(v, (int, float, str)) or (isinstance(v, list) and all(isinstance(e, (int, float, str)) for e in v))


def _render(v: Any, depth: int) -> str:
    pad = "  " * (depth + 1)
    if isinstance(v, dict):
        if not v:
            return "{}"
        if all(_is_leaf(e) and not isinstance(e, list) for e in v.values()):
            return json.dumps(v, ensure_ascii=False, separators=(", ", ": "))
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_render(e, depth + 1)}" for k, e in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(v, list) and not all(_is_leaf(e) for e in v):
        items = [pad + _render(e, depth + 1) for e in v]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    return json.dumps(v, ensure_ascii=False, separators=(", ", ": "))


def emit_automaton(m: Model) -> str:
    """Serialise ``m``. Matrix rows are kept on one line each; output ends with a newline."""
    return _render(to_document(m), 0) + "\n"


def save_automaton(m: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_automaton(m))


def models_identical(a: Model, b: Model) -> bool:
    """Field-by-field equality with bit-exact matrices."""
    if type(a) is not type(b):
        return False
    return _same(to_document(a), to_document(b))


def _same(x: Any, y: Any) -> bool:
    if isinstance(x, dict):
        return isinstance(y, dict) and list(x) == list(y) and all(_same(x[k], y[k]) for k in x)
    if isinstance(x, list):
        return isinstance(y, list) and len(x) == len(y) and all(_same(a, b) for a, b in zip(x, y))
    if isinstance(x, float) and isinstance(y, float):
        return x == y and math.copysign(1.0, x) == math.copysign(1.0, y)
    return type(x) is type(y) and x == y
