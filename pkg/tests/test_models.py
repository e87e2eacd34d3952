import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiqfa.models import (
    ClQfa,
    CorruptModelError,
    Dfa,
    InvalidModelError,
    ModelStructureError,
    MoGqfa,
    OracleCapError,
    QcfaAut,
    QfacAut,
    accept_prob,
    all_words,
    checked_probability,
    cl_accept_prob_oracle,
    cl_branches,
    count_words,
    dfa_run,
    mo_accept_prob,
    mo_prefix_states,
    mo_state,
    qcfa_accept_prob_oracle,
    qcfa_branches,
    qfac_accept_prob,
    require_valid,
    validate_model,
)
from semiqfa.random_models import FuzzConfig, gen_random_model

WORDS = ["", "a", "aa", "aaa", "aaaaa"]
ONE_OUTCOME_CTRL_ALL = Dfa(alphabet=("c0",), states=("s",), initial=0, accepting={0}, trans=({"c0": 0},))
ONE_OUTCOME_CTRL_NONE = Dfa(alphabet=("c0",), states=("s",), initial=0, accepting=set(), trans=({"c0": 0},))


def trivial_cl(ctrl, q=2):
    return ClQfa(q_dim=q, alphabet=("a",), outcomes=("c0",), q_init=0, unitaries={"a": np.eye(q)},
                 measurement={"c0": np.eye(q)}, control=ctrl)


def single_state_qfac(proj):
    return QfacAut(q_dim=2, c_states=("s",), alphabet=("a", "b"), q_init=0, c_init=0,
                   unitaries=({"a": np.eye(2), "b": np.eye(2)},), trans=({"a": 0, "b": 0},), accept_projs=(proj,))


def single_outcome_qcfa(accepting):
    return QcfaAut(q_dim=2, c_states=("s",), alphabet=("a",), outcomes=("c0",), q_init=1, c_init=0,
                   measurements=({"a": {"c0": np.eye(2)}},), trans=({"a": {"c0": 0}},), accepting=accepting)


class TestDfa:
    @pytest.mark.parametrize("x,expected", [("", (0, True)), ("a", (1, False)), ("aa", (0, True))])
    def test_parity_run(self, parity, x, expected):
        assert dfa_run(parity, x) == expected

    def test_validates(self, parity):
        assert validate_model(parity).ok

    def test_rejects_partial_transition(self):
        with pytest.raises(ModelStructureError, match="missing transition"):
            Dfa(alphabet=("a", "b"), states=("x",), initial=0, accepting=(), trans=({"a": 0},))

    def test_rejects_bad_target(self):
        with pytest.raises(ModelStructureError):
            Dfa(alphabet=("a",), states=("x",), initial=0, accepting=(), trans=({"a": 3},))

    def test_rejects_unknown_symbol_in_word(self, parity):
        with pytest.raises(ValueError):
            parity.run("b")


class TestValidation:
    def test_non_unitary_cl(self, hadamard_cl):
        bad = ClQfa(q_dim=2, alphabet=("a",), outcomes=("0", "1"), q_init=0, unitaries={"a": np.diag([1, 2])},
                    measurement=hadamard_cl.measurement, control=hadamard_cl.control)
        report = validate_model(bad)
        assert not report.ok
        (v,) = report.violations
        assert v.invariant == "check_unitary"
        assert v.residual == pytest.approx(3.0)
        with pytest.raises(InvalidModelError):
            require_valid(bad)

    def test_trace_violation(self):
        m = MoGqfa(dim=2, alphabet=("a",), rho0=np.diag([0.7, 0.7]), channels={"a": [np.eye(2)]},
                   p_acc=np.diag([1, 0]))
        report = validate_model(m)
        assert [v.invariant for v in report.violations] == ["check_density"]
        assert report.violations[0].residual == pytest.approx(0.4)

    def test_incomplete_qcfa_measurement(self):
        m = QcfaAut(q_dim=2, c_states=("s",), alphabet=("a",), outcomes=("c0",), q_init=0, c_init=0,
                    measurements=({"a": {"c0": np.diag([1, 0])}},), trans=({"a": {"c0": 0}},), accepting={0})
        assert not validate_model(m).ok

    def test_non_projector_qfac(self):
        assert not validate_model(single_state_qfac(np.diag([0.5, 0]))).ok

    def test_valid_fixtures(self, hadamard_cl, parity_qfac, hadamard_qcfa):
        for m in (hadamard_cl, parity_qfac, hadamard_qcfa):
            assert validate_model(m).ok

    def test_matrices_are_read_only(self, hadamard_cl):
        with pytest.raises(ValueError):
            hadamard_cl.unitaries["a"][0, 0] = 2


class TestMo:
    def test_total_projector(self):
        rng = np.random.default_rng(1)
        m = gen_random_model("mo1gqfa", FuzzConfig(), rng)
        full = MoGqfa(dim=m.dim, alphabet=m.alphabet, rho0=m.rho0, channels=m.channels, p_acc=np.eye(m.dim))
        for x in all_words(m.alphabet, 4):
            assert mo_accept_prob(full, x) == pytest.approx(1.0, abs=1e-12)

    def test_parity_embedding(self, load):
        m = load("parity_mo.json")
        assert mo_accept_prob(m, "a") == 0.0
        assert mo_accept_prob(m, "aa") == 1.0
        assert mo_accept_prob(m, "") == 1.0

    def test_prefix_states_are_incremental(self):
        m = gen_random_model("mo1gqfa", FuzzConfig(), 11)
        x = ("a", "b", "b", "a", "a")
        states = mo_prefix_states(m, x)
        assert len(states) == 6
        for i in range(6):
            np.testing.assert_array_equal(states[i], mo_state(m, x[:i]))

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.lists(st.sampled_from("ab"), max_size=6))
    def test_accept_plus_reject_is_one(self, seed, x):
        m = gen_random_model("mo1gqfa", FuzzConfig(), seed)
        rho = mo_state(m, x)
        total = np.trace(m.p_acc @ rho).real + np.trace(m.p_rej @ rho).real
        assert total == pytest.approx(1.0, abs=1e-10)
        assert 0.0 <= mo_accept_prob(m, x) <= 1.0


class TestCl:
    @pytest.mark.parametrize("x", WORDS)
    def test_trivial(self, x):
        assert cl_accept_prob_oracle(trivial_cl(ONE_OUTCOME_CTRL_ALL), x) == pytest.approx(1.0, abs=1e-12)
        assert cl_accept_prob_oracle(trivial_cl(ONE_OUTCOME_CTRL_NONE), x) == 0.0

    def test_hadamard(self, hadamard_cl):
        assert cl_accept_prob_oracle(hadamard_cl, "a") == pytest.approx(0.5, abs=1e-12)
        # the control language {"0"} rejects the empty outcome string and anything longer than one
        assert cl_accept_prob_oracle(hadamard_cl, "") == 0.0
        assert cl_accept_prob_oracle(hadamard_cl, "aa") == pytest.approx(0.0, abs=1e-12)

    def test_branches(self, hadamard_cl):
        branches = list(cl_branches(hadamard_cl, "aa"))
        assert [y for y, _, _ in branches] == [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
        assert math.fsum(w for _, _, w in branches) == pytest.approx(1.0, abs=1e-12)
        for _, _, w in branches:
            assert w == pytest.approx(0.25, abs=1e-12)

    def test_empty_word_has_one_branch(self, hadamard_cl):
        assert list(cl_branches(hadamard_cl, "")) == [((), 0, 1.0)]

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 5))
    def test_random_branches_normalised(self, seed, n):
        m = gen_random_model("cl1qfa", FuzzConfig(), seed)
        x = ("a", "b") * 3
        total = math.fsum(w for _, _, w in cl_branches(m, x[:n]))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_oracle_cap(self, hadamard_cl):
        with pytest.raises(OracleCapError, match="oracle cap"):
            cl_accept_prob_oracle(hadamard_cl, "a" * 11)

    def test_branch_cap(self):
        """Five outcomes: length 9 is under the length cap but 5**9 outcome strings exceed 4**10."""
        outs = tuple("vwxyz")
        ctrl = Dfa(alphabet=outs, states=("s",), initial=0, accepting={0}, trans=({c: 0 for c in outs},))
        five = ClQfa(q_dim=5, alphabet=("a",), outcomes=outs, q_init=0, unitaries={"a": np.eye(5)},
                     measurement={c: np.diag(np.eye(5)[i]) for i, c in enumerate(outs)}, control=ctrl)
        assert cl_accept_prob_oracle(five, "aaa") == pytest.approx(1.0)
        with pytest.raises(OracleCapError, match="outcome strings"):
            cl_accept_prob_oracle(five, "a" * 9)


class TestQfac:
    @pytest.mark.parametrize("x", ["", "a", "ab", "bba"])
    def test_single_state(self, x):
        assert qfac_accept_prob(single_state_qfac(np.diag([1, 0])), x) == pytest.approx(1.0)
        assert qfac_accept_prob(single_state_qfac(np.zeros((2, 2))), x) == 0.0

    @pytest.mark.parametrize("x,expected", [("", 1.0), ("a", 0.0), ("aa", 1.0), ("aaa", 0.0)])
    def test_classical_parity(self, parity_qfac, x, expected):
        assert qfac_accept_prob(parity_qfac, x) == expected

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.lists(st.sampled_from("ab"), max_size=6))
    def test_one_dimensional_is_a_dfa(self, seed, x):
        """With q_dim 1 the quantum part is a phase, so acceptance is the classical DFA's verdict."""
        d = gen_random_model("dfa", FuzzConfig(max_k=4), seed)
        rng = np.random.default_rng(seed)
        phases = tuple({s: [[np.exp(2j * np.pi * rng.random())]] for s in d.alphabet} for _ in range(d.size))
        m = QfacAut(q_dim=1, c_states=d.states, alphabet=d.alphabet, q_init=0, c_init=d.initial,
                    unitaries=phases, trans=d.trans,
                    accept_projs=tuple([[1.0 if s in d.accepting else 0.0]] for s in range(d.size)))
        assert qfac_accept_prob(m, x) == pytest.approx(1.0 if d.accepts(x) else 0.0, abs=1e-12)


class TestQcfa:
    @pytest.mark.parametrize("x", WORDS)
    def test_single_outcome(self, x):
        assert qcfa_accept_prob_oracle(single_outcome_qcfa({0}), x) == pytest.approx(1.0)
        assert qcfa_accept_prob_oracle(single_outcome_qcfa(set()), x) == 0.0

    def test_hadamard_last_outcome(self, hadamard_qcfa):
        assert qcfa_accept_prob_oracle(hadamard_qcfa, "a") == pytest.approx(0.5, abs=1e-12)
        assert qcfa_accept_prob_oracle(hadamard_qcfa, "") == 0.0

    def test_branch_weights(self, hadamard_qcfa):
        branches = list(qcfa_branches(hadamard_qcfa, "aaa"))
        assert len(branches) == 8
        assert math.fsum(w for *_, w in branches) == pytest.approx(1.0, abs=1e-12)
        for cs, s, _ in branches:
            assert s == (0 if cs[-1] == "0" else 1)

    def test_oracle_cap(self, hadamard_qcfa):
        with pytest.raises(OracleCapError):
            qcfa_accept_prob_oracle(hadamard_qcfa, "a" * 11)


class TestHelpers:
    def test_accept_prob_dispatch(self, parity, hadamard_cl, parity_qfac, hadamard_qcfa):
        assert accept_prob(parity, "aa") == 1.0
        assert accept_prob(hadamard_cl, "a") == pytest.approx(0.5)
        assert accept_prob(parity_qfac, "a") == 0.0
        assert accept_prob(hadamard_qcfa, "a") == pytest.approx(0.5)
        with pytest.raises(TypeError):
            accept_prob(object(), "a")

    def test_checked_probability(self, caplog):
        assert checked_probability(0.3) == 0.3
        assert checked_probability(1.0 + 1e-12) == 1.0
        assert "clamping" in caplog.text
        assert checked_probability(-1e-12) == 0.0
        with pytest.raises(CorruptModelError):
            checked_probability(1.1)

    def test_all_words_shortlex(self):
        words = list(all_words(("a", "b"), 2))
        assert words == [(), ("a",), ("b",), ("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
        assert count_words(2, 2) == 7
        assert count_words(3, 0) == 1
