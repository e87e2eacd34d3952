import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiqfa import linalg
from semiqfa.fileformat import emit_automaton
from semiqfa.fuzz import equivalence_fuzz, fuzz_words, trial_rng
from semiqfa.models import QcfaAut, validate_model
from semiqfa.random_models import (
    KINDS,
    FuzzConfig,
    gen_haar_unitary,
    gaussian_matrix,
    gen_random_model,
    make_rng,
    random_partition,
    random_projective_measurement,
    random_words,
)


class TestHaar:
    def test_scalar(self):
        u = gen_haar_unitary(1, 3)
        assert u.shape == (1, 1)
        assert abs(abs(u[0, 0]) - 1) <= 1e-15

    def test_unitary(self):
        r = linalg.check_unitary(gen_haar_unitary(4, 42), 1e-10)
        assert r.passed and r.residual <= 1e-10

    def test_deterministic(self):
        np.testing.assert_array_equal(gen_haar_unitary(4, 42), gen_haar_unitary(4, 42))
        assert not np.array_equal(gen_haar_unitary(4, 42), gen_haar_unitary(4, 43))

    def test_phase_convention(self):
        """Undoing the QR gives an upper-triangular R with a real positive diagonal."""
        g = gaussian_matrix(3, 3, make_rng(7))
        u = gen_haar_unitary(3, 7)
        r = u.conj().T @ g
        assert np.allclose(np.tril(r, -1), 0, atol=1e-12)
        assert np.all(np.diagonal(r).real > 0) and np.allclose(np.diagonal(r).imag, 0, atol=1e-12)

    def test_first_entry_modulus_is_roughly_uniform(self):
        # |U_00|^2 of a Haar unitary on C^n is Beta(1, n-1) distributed: mean 1/n
        vals = [abs(gen_haar_unitary(3, s)[0, 0]) ** 2 for s in range(2000)]
        assert np.mean(vals) == pytest.approx(1 / 3, abs=0.02)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            gen_haar_unitary(0, 1)


class TestGenerators:
    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(KINDS), st.integers(0, 2**64 - 1))
    def test_models_validate(self, kind, seed):
        m = gen_random_model(kind, FuzzConfig(max_q=3, max_k=3, max_outcomes=3), seed)
        assert validate_model(m).ok
        assert m.kind == kind

    @pytest.mark.parametrize("kind", KINDS)
    def test_reproducible(self, kind):
        cfg = FuzzConfig(seed=99)
        assert emit_automaton(gen_random_model(kind, cfg)) == emit_automaton(gen_random_model(kind, cfg))

    def test_single_outcome_qcfa_is_unitary(self):
        for seed in range(10):
            m = gen_random_model("1qcfa", FuzzConfig(max_outcomes=1), seed)
            assert isinstance(m, QcfaAut) and len(m.outcomes) == 1
            for row in m.measurements:
                for ops in row.values():
                    (op,) = ops.values()
                    assert linalg.check_unitary(op)

    def test_caps(self):
        with pytest.raises(ValueError):
            FuzzConfig(max_q=5)
        with pytest.raises(ValueError):
            FuzzConfig(max_outcomes=4)
        with pytest.raises(ValueError):
            FuzzConfig(max_len=9)
        with pytest.raises(ValueError):
            FuzzConfig(seed=-1)
        with pytest.raises(ValueError):
            gen_random_model("pda", FuzzConfig())

    @given(st.integers(1, 6), st.data())
    def test_partition(self, n, data):
        parts = data.draw(st.integers(1, n))
        groups = random_partition(n, parts, np.random.default_rng(n * 31 + parts))
        assert len(groups) == parts and all(groups)
        assert sorted(i for g in groups for i in g) == list(range(n))

    @settings(max_examples=30)
    @given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.data())
    def test_projective_measurement(self, n, seed, data):
        parts = data.draw(st.integers(1, n))
        projs = random_projective_measurement(n, parts, np.random.default_rng(seed))
        assert linalg.check_projective_measurement(projs, 1e-10)

    def test_random_words(self):
        words = random_words(("a", "b"), 50, 6, np.random.default_rng(0))
        assert len(words) == 50
        assert all(1 <= len(w) <= 6 for w in words)


class TestFuzz:
    @pytest.mark.parametrize("kind", ["cl1qfa", "1qfac", "1qcfa"])
    def test_small_run(self, kind):
        report = equivalence_fuzz(FuzzConfig(seed=1, trials=10), kind)
        assert report.ok and report.trials_run == 10
        assert report.strings_checked == 10 * (31 + 20)
        assert report.max_abs_diff <= 1e-9

    def test_deterministic(self):
        cfg = FuzzConfig(seed=5, trials=5)
        assert equivalence_fuzz(cfg, "1qcfa").lines() == equivalence_fuzz(cfg, "1qcfa").lines()

    def test_trial_streams_independent_of_order(self):
        a = trial_rng(3, 4).standard_normal(3)
        trial_rng(3, 0).standard_normal(100)
        np.testing.assert_array_equal(a, trial_rng(3, 4).standard_normal(3))

    def test_word_set(self):
        cfg = FuzzConfig(max_len=3)
        words = fuzz_words(("a", "b"), cfg, np.random.default_rng(0))
        assert words[:15] == [w for w in words[:15] if len(w) <= 3]
        assert len(words) == 15 + 20

    def test_rejects_other_kinds(self):
        with pytest.raises(ValueError):
            equivalence_fuzz(FuzzConfig(trials=1), "dfa")
