import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiqfa import linalg
from semiqfa.conversion import ConversionReport, cl_to_mo, dfa_to_mo, qcfa_to_mo, qfac_to_mo, to_mo
from semiqfa.models import (
    ClQfa,
    Dfa,
    InvalidModelError,
    QcfaAut,
    QfacAut,
    accept_prob,
    all_words,
    mo_accept_prob,
    mo_state,
)
from semiqfa.random_models import FuzzConfig, gen_haar_unitary, gen_random_model, random_words


def random_cl(q, k, n_out, seed):
    rng = np.random.default_rng(seed)
    outcomes = tuple(f"c{i}" for i in range(n_out))
    basis = np.eye(q)
    groups = np.array_split(np.arange(q), n_out)
    u = gen_haar_unitary(q, rng)
    meas = {c: u @ np.diag(basis[g].sum(axis=0)) @ u.conj().T for c, g in zip(outcomes, groups)}
    ctrl = Dfa(alphabet=outcomes, states=tuple(f"t{i}" for i in range(k)), initial=0, accepting={k - 1},
               trans=tuple({c: int(rng.integers(k)) for c in outcomes} for _ in range(k)))
    return ClQfa(q_dim=q, alphabet=("a", "b"), outcomes=outcomes, q_init=0,
                 unitaries={s: gen_haar_unitary(q, rng) for s in "ab"}, measurement=meas, control=ctrl)


class TestDimensionLaw:
    def test_cl(self):
        mo, rep = cl_to_mo(random_cl(2, 3, 2, 0))
        assert (rep.q, rep.k, rep.out_dim, mo.dim) == (2, 3, 6, 6)
        assert dict(rep.kraus_counts) == {"a": 6, "b": 6}

    def test_qfac(self):
        rng = np.random.default_rng(0)
        m = QfacAut(q_dim=2, c_states=tuple("wxyz"), alphabet=("a",), q_init=0, c_init=0,
                    unitaries=tuple({"a": gen_haar_unitary(2, rng)} for _ in range(4)),
                    trans=tuple({"a": (i + 1) % 4} for i in range(4)), accept_projs=(np.eye(2),) * 4)
        mo, rep = qfac_to_mo(m)
        assert mo.dim == rep.out_dim == 8
        assert rep.kraus_counts["a"] == 4

    def test_qcfa(self):
        cfg = FuzzConfig(max_q=3, max_k=2, max_outcomes=2)
        m = gen_random_model("1qcfa", cfg, 0)
        u = gen_haar_unitary(3, 5)
        p0, p1 = np.diag([1, 0, 0]), np.diag([0, 1, 1])
        m = QcfaAut(q_dim=3, c_states=("s0", "s1"), alphabet=m.alphabet, outcomes=("0", "1"), q_init=0, c_init=0,
                    measurements=tuple({s: {"0": p0 @ u, "1": p1 @ u} for s in m.alphabet} for _ in range(2)),
                    trans=tuple({s: {"0": 0, "1": 1} for s in m.alphabet} for _ in range(2)), accepting={1})
        mo, rep = qcfa_to_mo(m)
        assert mo.dim == 6
        assert all(n == 4 for n in rep.kraus_counts.values())

    def test_report_invariant(self):
        with pytest.raises(ValueError):
            ConversionReport("x", 2, 3, 5, {})
        assert "MO-1gQFA dimension = 6" in ConversionReport("cl1qfa", 2, 3, 6, {"a": 6}).lines()


class TestExamples:
    def test_hadamard_cl(self, hadamard_cl):
        mo, rep = cl_to_mo(hadamard_cl)
        assert rep.k == 3 and mo.dim == 6
        assert mo_accept_prob(mo, "a") == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("x", ["", "a", "aaaa"])
    def test_trivial_cl(self, x):
        ctrl = Dfa(alphabet=("c",), states=("s",), initial=0, accepting={0}, trans=({"c": 0},))
        m = ClQfa(q_dim=2, alphabet=("a",), outcomes=("c",), q_init=0, unitaries={"a": np.eye(2)},
                  measurement={"c": np.eye(2)}, control=ctrl)
        assert mo_accept_prob(cl_to_mo(m)[0], x) == pytest.approx(1.0)

    def test_parity_qfac(self, parity_qfac):
        mo, _ = qfac_to_mo(parity_qfac)
        assert mo_accept_prob(mo, "aa") == pytest.approx(1.0)
        assert mo_accept_prob(mo, "a") == pytest.approx(0.0)

    def test_single_state_qfac_collapses(self):
        u = gen_haar_unitary(3, 4)
        m = QfacAut(q_dim=3, c_states=("s",), alphabet=("a",), q_init=0, c_init=0, unitaries=({"a": u},),
                    trans=({"a": 0},), accept_projs=(np.diag([1, 0, 0]),))
        mo, rep = qfac_to_mo(m)
        assert rep.k == 1
        (elem,) = mo.channels["a"]
        np.testing.assert_array_equal(elem, u)

    def test_single_outcome_qcfa(self):
        m = QcfaAut(q_dim=2, c_states=("s", "t"), alphabet=("a",), outcomes=("c",), q_init=0, c_init=0,
                    measurements=({"a": {"c": np.eye(2)}},) * 2, trans=({"a": {"c": 1}}, {"a": {"c": 0}}),
                    accepting={0, 1})
        mo, _ = qcfa_to_mo(m)
        for x in all_words(("a",), 5):
            assert mo_accept_prob(mo, x) == pytest.approx(1.0)

    def test_random_qcfa_fifty_strings(self):
        m = gen_random_model("1qcfa", FuzzConfig(), 2024)
        mo, _ = qcfa_to_mo(m)
        words = random_words(m.alphabet, 50, 6, np.random.default_rng(2024))
        diff = max(abs(accept_prob(m, x) - mo_accept_prob(mo, x)) for x in words)
        assert diff <= 1e-9

    def test_parity_dfa(self, parity):
        mo, rep = dfa_to_mo(parity)
        assert mo.dim == 2 and rep.q == 1
        assert mo_accept_prob(mo, "aa") == 1.0
        assert mo_accept_prob(mo, "a") == 0.0

    def test_one_state_dfa(self):
        d = Dfa(alphabet=("a", "b"), states=("s",), initial=0, accepting={0}, trans=({"a": 0, "b": 0},))
        mo, _ = dfa_to_mo(d)
        np.testing.assert_array_equal(mo.p_acc, np.eye(1))
        assert mo_accept_prob(mo, "abba") == 1.0

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.lists(st.sampled_from("ab"), max_size=8))
    def test_dfa_embedding_is_exact(self, seed, x):
        d = gen_random_model("dfa", FuzzConfig(max_k=4), seed)
        mo, _ = dfa_to_mo(d)
        p = mo_accept_prob(mo, x)
        assert p in (0.0, 1.0)
        assert p == (1.0 if d.accepts(x) else 0.0)


class TestStructure:
    def test_invalid_source_rejected(self, hadamard_cl):
        bad = ClQfa(q_dim=2, alphabet=("a",), outcomes=("0", "1"), q_init=0, unitaries={"a": np.diag([1, 2])},
                    measurement=hadamard_cl.measurement, control=hadamard_cl.control)
        with pytest.raises(InvalidModelError):
            cl_to_mo(bad)

    @pytest.mark.parametrize("kind", ["cl1qfa", "1qfac", "1qcfa"])
    @pytest.mark.parametrize("seed", range(5))
    def test_channels_complete(self, kind, seed):
        mo, _ = to_mo(gen_random_model(kind, FuzzConfig(), seed))
        for sym in mo.alphabet:
            assert linalg.check_kraus_complete(mo.channels[sym], 1e-10)
        assert linalg.check_density(mo.rho0)
        assert linalg.check_projector(mo.p_acc)

    @pytest.mark.parametrize("kind", ["cl1qfa", "1qfac", "1qcfa"])
    def test_states_stay_classically_diagonal(self, kind):
        """rho_x is block diagonal in the classical register: no coherence between classical states."""
        m = gen_random_model(kind, FuzzConfig(max_k=3), 3)
        mo, rep = to_mo(m)
        q, k = rep.q, rep.k
        for x in all_words(m.alphabet, 3):
            rho = mo_state(mo, x).reshape(q, k, q, k)
            off = rho.copy()
            for s in range(k):
                off[:, s, :, s] = 0
            assert np.abs(off).max(initial=0.0) <= 1e-12

    def test_basis_index_convention(self, hadamard_cl):
        mo, _ = cl_to_mo(hadamard_cl)
        # (q_0, s_start) sits at index 0 * k + 0
        assert mo.rho0[0, 0] == 1 and np.trace(mo.rho0) == 1

    def test_to_mo_dispatch(self, parity, load):
        mo = load("parity_mo.json")
        same, rep = to_mo(mo)
        assert same is mo and rep.k == 1
        assert to_mo(parity)[1].source_kind == "dfa"
        with pytest.raises(TypeError):
            to_mo("nope")
