from pathlib import Path

import numpy as np
import pytest

from semiqfa.fileformat import load_automaton
from semiqfa.models import ClQfa, Dfa, QcfaAut, QfacAut

FIXTURES = Path(__file__).parent / "fixtures"

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture
def parity() -> Dfa:
    return Dfa(alphabet=("a",), states=("even", "odd"), initial=0, accepting={0}, trans=({"a": 1}, {"a": 0}))


@pytest.fixture
def hadamard_cl() -> ClQfa:
    """Hadamard then computational-basis readout; the control language is {"0"} (3-state DFA with sink)."""
    ctrl = Dfa(alphabet=("0", "1"), states=("start", "seen0", "dead"), initial=0, accepting={1},
               trans=({"0": 1, "1": 2}, {"0": 2, "1": 2}, {"0": 2, "1": 2}))
    return ClQfa(q_dim=2, alphabet=("a",), outcomes=("0", "1"), q_init=0, unitaries={"a": H},
                 measurement={"0": P0, "1": P1}, control=ctrl)


@pytest.fixture
def parity_qfac() -> QfacAut:
    return QfacAut(q_dim=1, c_states=("even", "odd"), alphabet=("a",), q_init=0, c_init=0,
                   unitaries=({"a": [[1]]}, {"a": [[1]]}), trans=({"a": 1}, {"a": 0}),
                   accept_projs=([[1]], [[0]]))


@pytest.fixture
def hadamard_qcfa() -> QcfaAut:
    """Two classical states remembering the last outcome; accept iff it was 0."""
    return QcfaAut(q_dim=2, c_states=("last0", "last1"), alphabet=("a",), outcomes=("0", "1"), q_init=0, c_init=1,
                   measurements=tuple({"a": {"0": P0 @ H, "1": P1 @ H}} for _ in range(2)),
                   trans=tuple({"a": {"0": 0, "1": 1}} for _ in range(2)), accepting={0})


@pytest.fixture
def load():
    return lambda name, **kw: load_automaton(fixture_path(name), **kw)


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda n: int(n.split()[0])):
        passed, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
