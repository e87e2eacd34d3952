"""
Simulate semi-quantum automata (and DFAs) by measure-once general QFAs.

Every construction lives on ``H_Q (x) H_S``: quantum factor first, classical
factor second, so basis state ``(q_i, s_j)`` has index ``i * k + j``. The
classical state is carried as a diagonal block of the density operator and
each Kraus element moves block ``s`` to block ``delta(s, ...)``.

Kraus elements are listed outcome-major then classical-state-major, both in
declaration order. The ordering is irrelevant to the semantics but fixed so
that emitted files are stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from semiqfa.linalg import VALIDATION_TOL, ComplexMatrix, basis_projector, ket_bra, tensor_product
from semiqfa.models import ClQfa, Dfa, Model, MoGqfa, QcfaAut, QfacAut, require_valid


@dataclass(frozen=True)
class ConversionReport:
    source_kind: str
    q: int
    k: int
    out_dim: int
    kraus_counts: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.out_dim != self.q * self.k:
            raise ValueError(f"out_dim {self.out_dim} != q*k = {self.q * self.k}")

    def lines(self) -> list[str]:
        counts = ", ".join(f"{sym}: {n}" for sym, n in self.kraus_counts.items())
        return [
            f"source: {self.source_kind}",
            f"quantum basis states q = {self.q}",
            f"classical states k = {self.k}",
            f"MO-1gQFA dimension = {self.out_dim}",
            f"Kraus elements per symbol: {counts}",
        ]


def _initial(q: int, q_init: int, k: int, s_init: int) -> ComplexMatrix:
    return tensor_product(basis_projector(q, q_init), basis_projector(k, s_init))


def _accepting_block(k: int, accepting) -> ComplexMatrix:
    p = np.zeros((k, k), dtype=np.complex128)
    for s in accepting:
        p[s, s] = 1.0
    return p


def _finish(source: Model, q: int, k: int, alphabet, rho0, channels, p_acc) -> tuple[MoGqfa, ConversionReport]:
    mo = MoGqfa(dim=q * k, alphabet=alphabet, rho0=rho0, channels=channels, p_acc=p_acc)
    report = ConversionReport(source.kind, q, k, q * k, {sym: len(channels[sym]) for sym in alphabet})
    return mo, report


def cl_to_mo(m: ClQfa, tol: float = VALIDATION_TOL) -> tuple[MoGqfa, ConversionReport]:
    """
    Equivalent MO-1gQFA of dimension ``q * k`` for a CL-1QFA.

    The operation for ``sigma`` has elements ``P_c U_sigma (x) |delta(s, c)><s|``
    for every outcome ``c`` and control state ``s``. ``k`` is the size of the
    control DFA as supplied; minimise it first for the smallest output.
    """
    require_valid(m, tol)
    ctrl = m.control
    q, k = m.q_dim, ctrl.size
    channels = {}
    for sym in m.alphabet:
        elems = []
        for c in m.outcomes:
            quantum = m.measurement[c] @ m.unitaries[sym]
            for s in range(k):
                elems.append(tensor_product(quantum, ket_bra(k, ctrl.trans[s][c], s)))
        channels[sym] = elems
    rho0 = _initial(q, m.q_init, k, ctrl.initial)
    p_acc = tensor_product(np.eye(q), _accepting_block(k, ctrl.accepting))
    return _finish(m, q, k, m.alphabet, rho0, channels, p_acc)


def qfac_to_mo(m: QfacAut, tol: float = VALIDATION_TOL) -> tuple[MoGqfa, ConversionReport]:
    """Elements ``U_{s,sigma} (x) |delta(s, sigma)><s|``, one per classical state; ``P_acc = sum_s P_{s,a} (x) |s><s|``."""
    require_valid(m, tol)
    q, k = m.q_dim, len(m.c_states)
    channels = {
        sym: [tensor_product(m.unitaries[s][sym], ket_bra(k, m.trans[s][sym], s)) for s in range(k)]
        for sym in m.alphabet
    }
    rho0 = _initial(q, m.q_init, k, m.c_init)
    p_acc = sum(tensor_product(m.accept_projs[s], basis_projector(k, s)) for s in range(k))
    return _finish(m, q, k, m.alphabet, rho0, channels, p_acc)


def qcfa_to_mo(m: QcfaAut, tol: float = VALIDATION_TOL) -> tuple[MoGqfa, ConversionReport]:
    """Elements ``M^c_{s,sigma} (x) |delta(s, sigma, c)><s|`` over outcomes ``c`` and classical states ``s``."""
    require_valid(m, tol)
    q, k = m.q_dim, len(m.c_states)
    channels = {}
    for sym in m.alphabet:
        channels[sym] = [
            tensor_product(m.measurements[s][sym][c], ket_bra(k, m.trans[s][sym][c], s))
            for c in m.outcomes
            for s in range(k)
        ]
    rho0 = _initial(q, m.q_init, k, m.c_init)
    p_acc = tensor_product(np.eye(q), _accepting_block(k, m.accepting))
    return _finish(m, q, k, m.alphabet, rho0, channels, p_acc)


def dfa_to_mo(d: Dfa) -> tuple[MoGqfa, ConversionReport]:
    """Deterministic embedding: ``rho0 = |s1><s1|``, elements ``|delta(s, sigma)><s|``."""
    k = d.size
    channels = {sym: [ket_bra(k, d.trans[s][sym], s) for s in range(k)] for sym in d.alphabet}
    return _finish(d, 1, k, d.alphabet, basis_projector(k, d.initial), channels, _accepting_block(k, d.accepting))


def to_mo(m: Model, tol: float = VALIDATION_TOL) -> tuple[MoGqfa, ConversionReport]:
    """Dispatch to the conversion matching the model kind. An MO-1gQFA is returned unchanged."""
    if isinstance(m, ClQfa):
        return cl_to_mo(m, tol)
    if isinstance(m, QfacAut):
        return qfac_to_mo(m, tol)
    if isinstance(m, QcfaAut):
        return qcfa_to_mo(m, tol)
    if isinstance(m, Dfa):
        return dfa_to_mo(m)
    if isinstance(m, MoGqfa):
        return m, ConversionReport(m.kind, m.dim, 1, m.dim, {s: len(m.channels[s]) for s in m.alphabet})
    raise TypeError(f"not an automaton model: {type(m).__name__}")
