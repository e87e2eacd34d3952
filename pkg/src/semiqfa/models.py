"""
In-memory automata and their acceptance semantics.

Five models are represented: a classical :class:`Dfa`, the measure-once
general QFA :class:`MoGqfa` (mixed states, one trace-preserving operation
per symbol), and three semi-quantum automata :class:`ClQfa` (QFA with a
control language), :class:`QfacAut` (QFA with classical states) and
:class:`QcfaAut` (QFA with quantum and classical states).

Classical states are indices ``0..k-1`` internally; their names are kept
only so that files round-trip. Input words are sequences of symbols. A
plain ``str`` is read one character per symbol.

Construction checks *structure* (shapes, totality, index ranges) and raises
:class:`ModelStructureError`. Numerical invariants (unitarity, completeness,
density) are checked separately by :func:`validate_model`, which returns a
report instead of raising.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import ClassVar, Iterator, Mapping, Sequence, Union

import numpy as np
import numpy.typing as npt

from semiqfa import linalg
from semiqfa.linalg import VALIDATION_TOL, ComplexMatrix

logger = logging.getLogger(__name__)

Word = tuple[str, ...]
WordLike = Union[str, Sequence[str]]

ORACLE_CAP = 10
# 4 outcomes over 10 symbols; the brute-force oracles refuse anything larger.
MAX_BRANCHES = 4**10


class ModelStructureError(ValueError):
    """Malformed model: missing transitions, bad indices, shape mismatches."""


class CorruptModelError(ArithmeticError):
    """A computed probability left ``[-eps, 1 + eps]``."""


class OracleCapError(ValueError):
    """Input too long for a brute-force enumeration oracle."""


def _freeze(a: npt.ArrayLike) -> ComplexMatrix:
    m = linalg.as_matrix(a).copy()
    m.setflags(write=False)
    return m


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ModelStructureError(msg)


def _symbols(seq: Sequence[str], what: str) -> tuple[str, ...]:
    out = tuple(str(s) for s in seq)
    _need(len(out) > 0, f"{what} must be non-empty")
    _need(len(set(out)) == len(out), f"{what} has duplicate symbols: {list(out)}")
    return out


def _index(i: int, n: int, what: str) -> int:
    _need(isinstance(i, (int, np.integer)) and 0 <= int(i) < n, f"{what} {i!r} out of range 0..{n - 1}")
    return int(i)


def _square_of(m: ComplexMatrix, n: int, what: str) -> None:
    _need(m.shape == (n, n), f"{what} has shape {m.shape}, expected ({n}, {n})")


def _names(names: Sequence[str] | None, n: int, what: str) -> tuple[str, ...]:
    if names is None:
        return tuple(str(i) for i in range(n))
    out = tuple(str(s) for s in names)
    _need(len(out) == n, f"{what} has {len(out)} names for {n} states")
    _need(len(set(out)) == n, f"{what} has duplicate names")
    return out


def as_word(x: WordLike, alphabet: Sequence[str]) -> Word:
    """Normalise ``x`` to a tuple of symbols, rejecting symbols outside ``alphabet``."""
    word = tuple(x)
    allowed = set(alphabet)
    for i, sym in enumerate(word):
        if sym not in allowed:
            raise ValueError(f"symbol {sym!r} at position {i} is not in alphabet {list(alphabet)}")
    return word


def basis_ket(n: int, i: int) -> npt.NDArray[np.complex128]:
    v = np.zeros(n, dtype=np.complex128)
    v[i] = 1.0
    return v


# ---------------------------------------------------------------------------
# Model types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dfa:
    """Complete DFA. ``trans[s][sym]`` is the successor of state ``s`` on ``sym``."""

    kind: ClassVar[str] = "dfa"

    alphabet: tuple[str, ...]
    states: tuple[str, ...]
    initial: int
    accepting: frozenset[int]
    trans: tuple[Mapping[str, int], ...]

    def __post_init__(self) -> None:
        alphabet = _symbols(self.alphabet, "alphabet")
        states = _names(self.states, len(self.states), "states")
        k = len(states)
        _need(k > 0, "a DFA needs at least one state")
        _need(len(self.trans) == k, f"transition table has {len(self.trans)} rows for {k} states")
        trans = []
        for s, row in enumerate(self.trans):
            row = dict(row)
            for sym in alphabet:
                _need(sym in row, f"missing transition from state {states[s]!r} on {sym!r}")
            _need(set(row) == set(alphabet), f"state {states[s]!r} has transitions on unknown symbols")
            trans.append({sym: _index(row[sym], k, f"target of ({states[s]!r}, {sym!r})") for sym in alphabet})
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "initial", _index(self.initial, k, "initial state"))
        object.__setattr__(self, "accepting", frozenset(_index(a, k, "accepting state") for a in self.accepting))
        object.__setattr__(self, "trans", tuple(trans))

    @property
    def size(self) -> int:
        return len(self.states)

    def step(self, s: int, sym: str) -> int:
        return self.trans[s][sym]

    def run(self, x: WordLike, start: int | None = None) -> int:
        s = self.initial if start is None else start
        for sym in as_word(x, self.alphabet):
            s = self.trans[s][sym]
        return s

    def accepts(self, x: WordLike) -> bool:
        return self.run(x) in self.accepting


@dataclass(frozen=True, eq=False)
class MoGqfa:
    """Measure-once general QFA on ``C^dim``."""

    kind: ClassVar[str] = "mo1gqfa"

    dim: int
    alphabet: tuple[str, ...]
    rho0: ComplexMatrix
    channels: Mapping[str, tuple[ComplexMatrix, ...]]
    p_acc: ComplexMatrix
    _stacks: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _need(isinstance(self.dim, (int, np.integer)) and self.dim >= 1, f"dim must be a positive integer, got {self.dim!r}")
        n = int(self.dim)
        alphabet = _symbols(self.alphabet, "alphabet")
        rho0 = _freeze(self.rho0)
        _square_of(rho0, n, "rho0")
        p_acc = _freeze(self.p_acc)
        _square_of(p_acc, n, "p_acc")
        _need(set(self.channels) == set(alphabet), "channels must be given for exactly the alphabet symbols")
        channels = {}
        stacks = {}
        for sym in alphabet:
            elems = tuple(_freeze(e) for e in self.channels[sym])
            _need(len(elems) > 0, f"channel {sym!r} has no operation elements")
            for i, e in enumerate(elems):
                _square_of(e, n, f"channel {sym!r} element {i}")
            channels[sym] = elems
            stacks[sym] = np.stack(elems)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "p_acc", p_acc)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "_stacks", stacks)

    @property
    def p_rej(self) -> ComplexMatrix:
        return np.eye(self.dim, dtype=np.complex128) - self.p_acc

    def apply(self, sym: str, rho: ComplexMatrix) -> ComplexMatrix:
        """One step ``rho -> E_sym(rho)``. Completeness is not re-checked; see :func:`validate_model`."""
        return linalg.apply_operation(self._stacks[sym], rho, check=False)


@dataclass(frozen=True, eq=False)
class ClQfa:
    """QFA with control language: unitary then projective measurement per symbol."""

    kind: ClassVar[str] = "cl1qfa"

    q_dim: int
    alphabet: tuple[str, ...]
    outcomes: tuple[str, ...]
    q_init: int
    unitaries: Mapping[str, ComplexMatrix]
    measurement: Mapping[str, ComplexMatrix]
    control: Dfa

    def __post_init__(self) -> None:
        _need(isinstance(self.q_dim, (int, np.integer)) and self.q_dim >= 1, "q_dim must be a positive integer")
        q = int(self.q_dim)
        alphabet = _symbols(self.alphabet, "alphabet")
        outcomes = _symbols(self.outcomes, "outcomes")
        _need(set(self.unitaries) == set(alphabet), "unitaries must be given for exactly the alphabet symbols")
        _need(set(self.measurement) == set(outcomes), "measurement must have one projector per outcome")
        _need(isinstance(self.control, Dfa), "control must be a Dfa")
        _need(set(self.control.alphabet) == set(outcomes), "control DFA alphabet must equal the outcome set")
        unitaries = {}
        for sym in alphabet:
            unitaries[sym] = _freeze(self.unitaries[sym])
            _square_of(unitaries[sym], q, f"unitary {sym!r}")
        measurement = {}
        for c in outcomes:
            measurement[c] = _freeze(self.measurement[c])
            _square_of(measurement[c], q, f"projector {c!r}")
        object.__setattr__(self, "q_dim", q)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "q_init", _index(self.q_init, q, "q_init"))
        object.__setattr__(self, "unitaries", unitaries)
        object.__setattr__(self, "measurement", measurement)


@dataclass(frozen=True, eq=False)
class QfacAut:
    """QFA with classical states; the classical state picks the unitary and the final measurement."""

    kind: ClassVar[str] = "1qfac"

    q_dim: int
    c_states: tuple[str, ...]
    alphabet: tuple[str, ...]
    q_init: int
    c_init: int
    unitaries: tuple[Mapping[str, ComplexMatrix], ...]
    trans: tuple[Mapping[str, int], ...]
    accept_projs: tuple[ComplexMatrix, ...]

    def __post_init__(self) -> None:
        _need(isinstance(self.q_dim, (int, np.integer)) and self.q_dim >= 1, "q_dim must be a positive integer")
        q = int(self.q_dim)
        names = _names(self.c_states, len(self.c_states), "c_states")
        k = len(names)
        _need(k > 0, "need at least one classical state")
        alphabet = _symbols(self.alphabet, "alphabet")
        _need(len(self.unitaries) == k and len(self.trans) == k and len(self.accept_projs) == k,
              "unitaries, trans and accept_projs need one entry per classical state")
        unitaries, trans, projs = [], [], []
        for s in range(k):
            urow, trow = dict(self.unitaries[s]), dict(self.trans[s])
            _need(set(urow) == set(alphabet), f"unitaries of state {names[s]!r} must cover exactly the alphabet")
            _need(set(trow) == set(alphabet), f"transitions of state {names[s]!r} must cover exactly the alphabet")
            u = {}
            for sym in alphabet:
                u[sym] = _freeze(urow[sym])
                _square_of(u[sym], q, f"unitary ({names[s]!r}, {sym!r})")
            unitaries.append(u)
            trans.append({sym: _index(trow[sym], k, f"target of ({names[s]!r}, {sym!r})") for sym in alphabet})
            p = _freeze(self.accept_projs[s])
            _square_of(p, q, f"accepting projector of {names[s]!r}")
            projs.append(p)
        object.__setattr__(self, "q_dim", q)
        object.__setattr__(self, "c_states", names)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "q_init", _index(self.q_init, q, "q_init"))
        object.__setattr__(self, "c_init", _index(self.c_init, k, "c_init"))
        object.__setattr__(self, "unitaries", tuple(unitaries))
        object.__setattr__(self, "trans", tuple(trans))
        object.__setattr__(self, "accept_projs", tuple(projs))


@dataclass(frozen=True, eq=False)
class QcfaAut:
    """QFA with quantum and classical states: a general measurement per (state, symbol) drives the classical part."""

    kind: ClassVar[str] = "1qcfa"

    q_dim: int
    c_states: tuple[str, ...]
    alphabet: tuple[str, ...]
    outcomes: tuple[str, ...]
    q_init: int
    c_init: int
    measurements: tuple[Mapping[str, Mapping[str, ComplexMatrix]], ...]
    trans: tuple[Mapping[str, Mapping[str, int]], ...]
    accepting: frozenset[int]

    def __post_init__(self) -> None:
        _need(isinstance(self.q_dim, (int, np.integer)) and self.q_dim >= 1, "q_dim must be a positive integer")
        q = int(self.q_dim)
        names = _names(self.c_states, len(self.c_states), "c_states")
        k = len(names)
        _need(k > 0, "need at least one classical state")
        alphabet = _symbols(self.alphabet, "alphabet")
        outcomes = _symbols(self.outcomes, "outcomes")
        _need(len(self.measurements) == k and len(self.trans) == k,
              "measurements and trans need one entry per classical state")
        meas, trans = [], []
        for s in range(k):
            mrow, trow = dict(self.measurements[s]), dict(self.trans[s])
            _need(set(mrow) == set(alphabet), f"measurements of state {names[s]!r} must cover exactly the alphabet")
            _need(set(trow) == set(alphabet), f"transitions of state {names[s]!r} must cover exactly the alphabet")
            m_s, t_s = {}, {}
            for sym in alphabet:
                ops, targets = dict(mrow[sym]), dict(trow[sym])
                _need(set(ops) == set(outcomes), f"measurement ({names[s]!r}, {sym!r}) must have one operator per outcome")
                _need(set(targets) == set(outcomes), f"transition ({names[s]!r}, {sym!r}) must cover every outcome")
                m_s[sym] = {}
                for c in outcomes:
                    m_s[sym][c] = _freeze(ops[c])
                    _square_of(m_s[sym][c], q, f"measurement operator ({names[s]!r}, {sym!r}, {c!r})")
                t_s[sym] = {c: _index(targets[c], k, f"target of ({names[s]!r}, {sym!r}, {c!r})") for c in outcomes}
            meas.append(m_s)
            trans.append(t_s)
        object.__setattr__(self, "q_dim", q)
        object.__setattr__(self, "c_states", names)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "q_init", _index(self.q_init, q, "q_init"))
        object.__setattr__(self, "c_init", _index(self.c_init, k, "c_init"))
        object.__setattr__(self, "measurements", tuple(meas))
        object.__setattr__(self, "trans", tuple(trans))
        object.__setattr__(self, "accepting", frozenset(_index(a, k, "accepting state") for a in self.accepting))


Model = Union[Dfa, MoGqfa, ClQfa, QfacAut, QcfaAut]
MODEL_KINDS = {cls.kind: cls for cls in (Dfa, MoGqfa, ClQfa, QfacAut, QcfaAut)}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    invariant: str
    where: str
    residual: float
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.where}: {self.invariant} violated (residual {self.residual:.6g})"
        return f"{msg}: {self.detail}" if self.detail else msg


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _collect(out: list[Violation], where: str, res: linalg.CheckResult, invariant: str) -> None:
    if not res.passed:
        out.append(Violation(invariant, where, res.residual, res.detail))


def validate_model(m: Model, tol: float = VALIDATION_TOL) -> ValidationReport:
    """
    Check the numerical invariants of a structurally well-formed model.

    Structural problems cannot reach this point: they are rejected when the
    model is constructed. Every failed invariant is listed with its residual.
    """
    out: list[Violation] = []
    if isinstance(m, Dfa):
        pass
    elif isinstance(m, MoGqfa):
        _collect(out, "rho0", linalg.check_density(m.rho0, tol), "check_density")
        for sym in m.alphabet:
            _collect(out, f"channel {sym!r}", linalg.check_kraus_complete(m.channels[sym], tol), "check_kraus_complete")
        _collect(out, "p_acc", linalg.check_projector(m.p_acc, tol), "projector")
    elif isinstance(m, ClQfa):
        for sym in m.alphabet:
            _collect(out, f"unitary {sym!r}", linalg.check_unitary(m.unitaries[sym], tol), "check_unitary")
        projs = [m.measurement[c] for c in m.outcomes]
        _collect(out, "measurement", linalg.check_projective_measurement(projs, tol), "check_projective_measurement")
    elif isinstance(m, QfacAut):
        for s, name in enumerate(m.c_states):
            for sym in m.alphabet:
                _collect(out, f"unitary ({name!r}, {sym!r})", linalg.check_unitary(m.unitaries[s][sym], tol), "check_unitary")
            _collect(out, f"accepting projector of {name!r}", linalg.check_projector(m.accept_projs[s], tol), "projector")
    elif isinstance(m, QcfaAut):
        for s, name in enumerate(m.c_states):
            for sym in m.alphabet:
                ops = [m.measurements[s][sym][c] for c in m.outcomes]
                _collect(out, f"measurement ({name!r}, {sym!r})", linalg.check_kraus_complete(ops, tol),
                         "measurement completeness")
    else:
        raise TypeError(f"not an automaton model: {type(m).__name__}")
    return ValidationReport(m.kind, tuple(out))


class InvalidModelError(ValueError):
    """A model failed :func:`validate_model`; ``report`` lists the violations."""

    def __init__(self, report: ValidationReport):
        self.report = report
        lines = "; ".join(str(v) for v in report.violations)
        super().__init__(f"invalid {report.kind} model: {lines}")


def require_valid(m: Model, tol: float = VALIDATION_TOL) -> Model:
    report = validate_model(m, tol)
    if not report.ok:
        raise InvalidModelError(report)
    return m


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------


def checked_probability(p: float, tol: float = VALIDATION_TOL) -> float:
    """Clamp float noise at the ends of ``[0, 1]``; anything further out is an error."""
    if p < -tol or p > 1.0 + tol:
        raise CorruptModelError(f"probability {p!r} outside [0, 1] beyond tolerance {tol}")
    if p < 0.0 or p > 1.0:
        logger.warning("clamping probability %r into [0, 1]", p)
        return min(1.0, max(0.0, p))
    return p


def dfa_run(d: Dfa, x: WordLike) -> tuple[int, bool]:
    """Final state ``delta*(s1, x)`` and whether it is accepting."""
    final = d.run(x)
    return final, final in d.accepting


def mo_state(m: MoGqfa, x: WordLike, rho: ComplexMatrix | None = None) -> ComplexMatrix:
    """State after reading ``x``, starting from ``rho`` (default ``rho0``)."""
    state = m.rho0 if rho is None else rho
    for sym in as_word(x, m.alphabet):
        state = m.apply(sym, state)
    return state


def mo_prefix_states(m: MoGqfa, x: WordLike) -> list[ComplexMatrix]:
    """``[rho_eps, rho_{x1}, rho_{x1 x2}, ...]``, one state per prefix."""
    states = [m.rho0]
    for sym in as_word(x, m.alphabet):
        states.append(m.apply(sym, states[-1]))
    return states


def mo_state_accept_prob(m: MoGqfa, rho: ComplexMatrix, tol: float = VALIDATION_TOL) -> float:
    return checked_probability(float(np.trace(m.p_acc @ rho).real), tol)


def mo_accept_prob(m: MoGqfa, x: WordLike, tol: float = VALIDATION_TOL) -> float:
    """``Tr(P_acc E_xn(...E_x1(rho0)))``; for the empty word, ``Tr(P_acc rho0)``."""
    return mo_state_accept_prob(m, mo_state(m, x), tol)


def _check_cap(n: int, n_outcomes: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"oracle cap: input length {n} exceeds enumeration cap {cap}")
    if n_outcomes**n > MAX_BRANCHES:
        raise OracleCapError(f"oracle cap: {n_outcomes}**{n} outcome strings exceeds {MAX_BRANCHES}")


def _norm2(v: npt.NDArray[np.complex128]) -> float:
    return float(np.vdot(v, v).real)


def cl_branches(m: ClQfa, x: WordLike, cap: int = ORACLE_CAP) -> Iterator[tuple[Word, int, float]]:
    """
    Enumerate every outcome string ``y`` in ``C^|x|``.

    Yields ``(y, s_y, p(y|x))`` where ``s_y`` is the control DFA state after
    ``y`` and ``p(y|x) = ||P_yn U_xn ... P_y1 U_x1 |q1>||^2``. Branches with
    zero weight are included. Prefixes share their partial products.
    """
    word = as_word(x, m.alphabet)
    _check_cap(len(word), len(m.outcomes), cap)
    ctrl = m.control

    def walk(i: int, psi, y: Word, s: int):
        if i == len(word):
            yield y, s, _norm2(psi)
            return
        rotated = m.unitaries[word[i]] @ psi
        for c in m.outcomes:
            yield from walk(i + 1, m.measurement[c] @ rotated, y + (c,), ctrl.trans[s][c])

    yield from walk(0, basis_ket(m.q_dim, m.q_init), (), ctrl.initial)


def cl_accept_prob_oracle(m: ClQfa, x: WordLike, cap: int = ORACLE_CAP, tol: float = VALIDATION_TOL) -> float:
    """Brute-force acceptance probability: sum of ``p(y|x)`` over ``y`` in the control language."""
    weights = [w for _, s, w in cl_branches(m, x, cap) if s in m.control.accepting]
    return checked_probability(math.fsum(weights), tol)


def qfac_accept_prob(m: QfacAut, x: WordLike, tol: float = VALIDATION_TOL) -> float:
    """``||P_{s_{n+1},a} U_{s_n,x_n} ... U_{s_1,x_1} |q1>||^2`` with ``s_{i+1} = delta(s_i, x_i)``."""
    psi = basis_ket(m.q_dim, m.q_init)
    s = m.c_init
    for sym in as_word(x, m.alphabet):
        psi = m.unitaries[s][sym] @ psi
        s = m.trans[s][sym]
    return checked_probability(_norm2(m.accept_projs[s] @ psi), tol)


def qcfa_branches(m: QcfaAut, x: WordLike, cap: int = ORACLE_CAP) -> Iterator[tuple[Word, int, float]]:
    """Yield ``(c_1...c_n, s_{n+1}, ||M^{c_n}_{s_n,x_n} ... M^{c_1}_{s_1,x_1} |q1>||^2)`` for all outcome strings."""
    word = as_word(x, m.alphabet)
    _check_cap(len(word), len(m.outcomes), cap)

    def walk(i: int, psi, cs: Word, s: int):
        if i == len(word):
            yield cs, s, _norm2(psi)
            return
        sym = word[i]
        ops, targets = m.measurements[s][sym], m.trans[s][sym]
        for c in m.outcomes:
            yield from walk(i + 1, ops[c] @ psi, cs + (c,), targets[c])

    yield from walk(0, basis_ket(m.q_dim, m.q_init), (), m.c_init)


def qcfa_accept_prob_oracle(m: QcfaAut, x: WordLike, cap: int = ORACLE_CAP, tol: float = VALIDATION_TOL) -> float:
    """Brute-force acceptance probability summing branches that end in an accepting classical state."""
    weights = [w for _, s, w in qcfa_branches(m, x, cap) if s in m.accepting]
    return checked_probability(math.fsum(weights), tol)


def accept_prob(m: Model, x: WordLike, tol: float = VALIDATION_TOL) -> float:
    """Acceptance probability under each model's own definition (0 or 1 for a DFA)."""
    if isinstance(m, Dfa):
        return 1.0 if m.accepts(x) else 0.0
    if isinstance(m, MoGqfa):
        return mo_accept_prob(m, x, tol)
    if isinstance(m, ClQfa):
        return cl_accept_prob_oracle(m, x, tol=tol)
    if isinstance(m, QfacAut):
        return qfac_accept_prob(m, x, tol)
    if isinstance(m, QcfaAut):
        return qcfa_accept_prob_oracle(m, x, tol=tol)
    raise TypeError(f"not an automaton model: {type(m).__name__}")


def all_words(alphabet: Sequence[str], max_len: int) -> Iterator[Word]:
    """Every word of length ``0..max_len`` in shortlex order."""
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def count_words(alphabet_size: int, max_len: int) -> int:
    return sum(alphabet_size**n for n in range(max_len + 1))
