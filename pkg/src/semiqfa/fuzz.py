"""Seeded equivalence fuzzing: direct semantics versus the converted MO-1gQFA."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from semiqfa import linalg
from semiqfa.conversion import to_mo
from semiqfa.models import Word, accept_prob, all_words, mo_prefix_states, mo_state_accept_prob
from semiqfa.random_models import SEMI_QUANTUM_KINDS, FuzzConfig, gen_random_model, random_words


@dataclass(frozen=True)
class FuzzFailure:
    trial: int
    word: Word
    direct: float
    converted: float

    @property
    def diff(self) -> float:
        return abs(self.direct - self.converted)


@dataclass
class FuzzReport:
    kind: str
    trials_run: int = 0
    strings_checked: int = 0
    max_abs_diff: float = 0.0
    max_kraus_residual: float = 0.0
    max_density_residual: float = 0.0
    failures: list[FuzzFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        return [
            f"kind: {self.kind}",
            f"trials: {self.trials_run}",
            f"strings checked: {self.strings_checked}",
            f"max |direct - converted|: {self.max_abs_diff:.3e}",
            f"max Kraus completeness residual: {self.max_kraus_residual:.3e}",
            f"max density residual: {self.max_density_residual:.3e}",
            f"failures: {len(self.failures)}",
        ]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def fuzz_words(alphabet: tuple[str, ...], cfg: FuzzConfig, rng: np.random.Generator) -> list[Word]:
    """Every word up to ``min(exhaustive_len, max_len)`` followed by ``random_strings`` random words."""
    words = list(all_words(alphabet, min(cfg.exhaustive_len, cfg.max_len)))
    return words + random_words(alphabet, cfg.random_strings, cfg.max_len, rng)


def equivalence_fuzz(cfg: FuzzConfig, kind: str) -> FuzzReport:
    """
    Compare each random model's own acceptance probability with that of its
    MO-1gQFA simulation.

    Every trial draws its model and strings from an independent stream
    derived from ``(cfg.seed, trial)``, so reports do not depend on the
    order trials run in. Alongside the probability differences the report
    tracks the worst Kraus completeness residual of the constructed channels
    and the worst density residual of any intermediate state.
    """
    if kind not in SEMI_QUANTUM_KINDS:
        raise ValueError(f"kind must be one of {SEMI_QUANTUM_KINDS}, got {kind!r}")
    report = FuzzReport(kind)
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        model = gen_random_model(kind, cfg, rng)
        mo, _ = to_mo(model)
        for sym in mo.alphabet:
            res = linalg.check_kraus_complete(mo.channels[sym])
            report.max_kraus_residual = max(report.max_kraus_residual, res.residual)
        for word in fuzz_words(model.alphabet, cfg, rng):
            states = mo_prefix_states(mo, word)
            for rho in states:
                res = linalg.check_density(rho)
                report.max_density_residual = max(report.max_density_residual, res.residual)
            converted = mo_state_accept_prob(mo, states[-1])
            direct = accept_prob(model, word)
            diff = abs(direct - converted)
            report.max_abs_diff = max(report.max_abs_diff, diff)
            report.strings_checked += 1
            if diff > cfg.tolerance:
                report.failures.append(FuzzFailure(trial, word, direct, converted))
        report.trials_run += 1
    return report
