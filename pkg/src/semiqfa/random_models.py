"""
Seeded random matrices and automata.

All randomness comes from ``numpy.random.Generator`` with the PCG64 bit
generator; Gaussians use numpy's ``standard_normal``. A given seed yields
bit-identical output on a given platform and numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from semiqfa.linalg import ComplexMatrix
from semiqfa.models import ClQfa, Dfa, Model, MoGqfa, QcfaAut, QfacAut

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

KINDS = ("dfa", "mo1gqfa", "cl1qfa", "1qfac", "1qcfa")
SEMI_QUANTUM_KINDS = ("cl1qfa", "1qfac", "1qcfa")


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, int) and not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class FuzzConfig:
    """Caps for random model generation and the equivalence fuzzer."""

    seed: int = 0
    trials: int = 100
    max_q: int = 3
    max_k: int = 3
    max_outcomes: int = 3
    max_len: int = 6
    tolerance: float = 1e-7
    alphabet_size: int = 2
    exhaustive_len: int = 4
    random_strings: int = 20

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        for name, cap in (("max_q", 4), ("max_k", 4), ("max_outcomes", 3), ("max_len", 8)):
            value = getattr(self, name)
            if not 1 <= value <= cap:
                raise ValueError(f"{name} must lie in 1..{cap}, got {value}")
        if not 1 <= self.alphabet_size <= 26:
            raise ValueError("alphabet_size must lie in 1..26")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    """Independent standard complex Gaussians, ``(a + ib)/sqrt(2)``."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def gen_haar_unitary(dim: int, seed: SeedLike = None) -> ComplexMatrix:
    """
    Haar-distributed unitary.

    Orthonormalises a complex Gaussian matrix (QR) and rescales each column
    so that the corresponding diagonal entry of ``R`` is real and positive,
    which makes the factorisation unique and the distribution Haar.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = make_rng(seed)
    q, r = np.linalg.qr(gaussian_matrix(dim, dim, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> ComplexMatrix:
    """Random density operator ``G G^dagger / Tr`` with ``G`` Gaussian of the given rank."""
    g = gaussian_matrix(dim, rank or dim, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_channel(dim: int, n_elems: int, rng: np.random.Generator) -> list[ComplexMatrix]:
    """Kraus elements cut from the first ``dim`` columns of a Haar unitary on ``C^(dim * n_elems)``."""
    v = gen_haar_unitary(dim * n_elems, rng)[:, :dim]
    return [v[i * dim:(i + 1) * dim, :] for i in range(n_elems)]


def random_povm(dim: int, n_out: int, rng: np.random.Generator) -> list[ComplexMatrix]:
    """POVM effects ``M^dagger M`` from a random complete family ``{M}``."""
    return [m.conj().T @ m for m in random_channel(dim, n_out, rng)]


def random_partition(n: int, parts: int, rng: np.random.Generator) -> list[list[int]]:
    """Split ``0..n-1`` into ``parts`` non-empty groups at random."""
    if not 1 <= parts <= n:
        raise ValueError(f"cannot split {n} items into {parts} non-empty groups")
    perm = rng.permutation(n)
    cuts = sorted(rng.choice(np.arange(1, n), size=parts - 1, replace=False)) if parts > 1 else []
    bounds = [0, *cuts, n]
    return [sorted(int(i) for i in perm[a:b]) for a, b in zip(bounds, bounds[1:])]


def random_projective_measurement(dim: int, parts: int, rng: np.random.Generator) -> list[ComplexMatrix]:
    """Projectors onto groups of columns of a Haar-random basis."""
    basis = gen_haar_unitary(dim, rng)
    projs = []
    for group in random_partition(dim, parts, rng):
        cols = basis[:, group]
        projs.append(cols @ cols.conj().T)
    return projs


def random_basis_projector(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Projector onto a random subset (possibly empty) of the computational basis."""
    return np.diag(rng.integers(0, 2, size=dim).astype(np.complex128))


def _alphabet(cfg: FuzzConfig) -> tuple[str, ...]:
    return tuple(chr(ord("a") + i) for i in range(cfg.alphabet_size))


def _int(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(rng.integers(lo, hi + 1))


def _subset(rng: np.random.Generator, k: int) -> frozenset[int]:
    return frozenset(int(s) for s in np.nonzero(rng.integers(0, 2, size=k))[0])


def random_dfa(k: int, alphabet: tuple[str, ...], rng: np.random.Generator, prefix: str = "s") -> Dfa:
    trans = tuple({sym: _int(rng, 0, k - 1) for sym in alphabet} for _ in range(k))
    return Dfa(alphabet=alphabet, states=tuple(f"{prefix}{i}" for i in range(k)), initial=0,
               accepting=_subset(rng, k), trans=trans)


def gen_random_model(kind: str, cfg: FuzzConfig, seed: SeedLike = None) -> Model:
    """
    Random valid model of the given kind within the caps of ``cfg``.

    ``seed`` defaults to ``cfg.seed``. Sizes are drawn uniformly from
    ``1..max_*``; outcome counts never exceed the quantum dimension, so
    every outcome gets a non-empty projector.
    """
    rng = make_rng(cfg.seed if seed is None else seed)
    alphabet = _alphabet(cfg)
    if kind == "dfa":
        return random_dfa(_int(rng, 1, cfg.max_k), alphabet, rng)
    if kind == "mo1gqfa":
        n = _int(rng, 1, cfg.max_q * cfg.max_k)
        channels = {sym: random_channel(n, _int(rng, 1, 3), rng) for sym in alphabet}
        return MoGqfa(dim=n, alphabet=alphabet, rho0=random_density(n, rng), channels=channels,
                      p_acc=random_basis_projector(n, rng))
    if kind == "cl1qfa":
        q = _int(rng, 1, cfg.max_q)
        n_out = _int(rng, 1, min(cfg.max_outcomes, q))
        k = _int(rng, 1, cfg.max_k)
        outcomes = tuple(str(c) for c in range(n_out))
        unitaries = {sym: gen_haar_unitary(q, rng) for sym in alphabet}
        measurement = dict(zip(outcomes, random_projective_measurement(q, n_out, rng)))
        return ClQfa(q_dim=q, alphabet=alphabet, outcomes=outcomes, q_init=_int(rng, 0, q - 1),
                     unitaries=unitaries, measurement=measurement, control=random_dfa(k, outcomes, rng))
    if kind == "1qfac":
        q = _int(rng, 1, cfg.max_q)
        k = _int(rng, 1, cfg.max_k)
        unitaries = tuple({sym: gen_haar_unitary(q, rng) for sym in alphabet} for _ in range(k))
        trans = tuple({sym: _int(rng, 0, k - 1) for sym in alphabet} for _ in range(k))
        projs = tuple(random_basis_projector(q, rng) for _ in range(k))
        return QfacAut(q_dim=q, c_states=tuple(f"s{i}" for i in range(k)), alphabet=alphabet,
                       q_init=_int(rng, 0, q - 1), c_init=_int(rng, 0, k - 1), unitaries=unitaries,
                       trans=trans, accept_projs=projs)
    if kind == "1qcfa":
        q = _int(rng, 1, cfg.max_q)
        n_out = _int(rng, 1, min(cfg.max_outcomes, q))
        k = _int(rng, 1, cfg.max_k)
        outcomes = tuple(str(c) for c in range(n_out))
        measurements, trans = [], []
        for _ in range(k):
            m_s, t_s = {}, {}
            for sym in alphabet:
                u = gen_haar_unitary(q, rng)
                projs = random_projective_measurement(q, n_out, rng)
                m_s[sym] = {c: p @ u for c, p in zip(outcomes, projs)}
                t_s[sym] = {c: _int(rng, 0, k - 1) for c in outcomes}
            measurements.append(m_s)
            trans.append(t_s)
        return QcfaAut(q_dim=q, c_states=tuple(f"s{i}" for i in range(k)), alphabet=alphabet, outcomes=outcomes,
                       q_init=_int(rng, 0, q - 1), c_init=_int(rng, 0, k - 1), measurements=tuple(measurements),
                       trans=tuple(trans), accepting=_subset(rng, k))
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def random_words(alphabet: tuple[str, ...], count: int, max_len: int, rng: np.random.Generator) -> list[tuple[str, ...]]:
    """``count`` words with lengths uniform in ``1..max_len``."""
    out = []
    for _ in range(count):
        n = _int(rng, 1, max_len)
        out.append(tuple(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=n)))
    return out
