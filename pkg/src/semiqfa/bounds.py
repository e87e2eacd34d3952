"""
State complexity and size bounds for MO-1gQFA recognisers.

Three groups of functionality:

* minimal DFAs (reachability pruning plus Hopcroft refinement), language
  equivalence and isomorphism of DFAs;
* the closed-form bounds relating the dimension ``n`` of an MO-1gQFA, the
  isolation radius ``delta`` of its cut-point and the number ``d`` of
  states of the minimal DFA of the recognised language;
* finite-enumeration audits: isolation estimation and the separation of
  ``vec(rho_x)`` across Myhill-Nerode classes.

Logarithms in the lower bounds are natural; the ratio ``log d / log(2/delta)``
does not depend on the base.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from semiqfa.linalg import ComplexMatrix
from semiqfa.models import Dfa, MoGqfa, Word, all_words, as_word, count_words, mo_state_accept_prob

DEFAULT_BUDGET = 10**6
PAIR_BUDGET = 10**8
ISOLATION_EPS = 1e-9
AUDIT_SLACK = 1e-9
# values at or above this are reported through log2_value only
MATERIALIZE_LIMIT = 1e300


class BudgetError(ValueError):
    """The requested enumeration exceeds its budget; raised before any work."""


# ---------------------------------------------------------------------------
# DFA minimisation
# ---------------------------------------------------------------------------


def reachable_states(d: Dfa) -> list[int]:
    """States reachable from the initial state, in BFS order (symbols in alphabet order)."""
    seen = {d.initial}
    order = [d.initial]
    queue = deque(order)
    while queue:
        s = queue.popleft()
        for sym in d.alphabet:
            t = d.trans[s][sym]
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def _hopcroft(d: Dfa, states: Sequence[int]) -> list[frozenset[int]]:
    inv: dict[str, dict[int, set[int]]] = {sym: {} for sym in d.alphabet}
    for s in states:
        for sym in d.alphabet:
            inv[sym].setdefault(d.trans[s][sym], set()).add(s)

    acc = frozenset(s for s in states if s in d.accepting)
    rej = frozenset(states) - acc
    partition = {b for b in (acc, rej) if b}
    work = {min((b for b in partition), key=len)} if len(partition) == 2 else set()

    while work:
        splitter = work.pop()
        for sym in d.alphabet:
            pre = set()
            for t in splitter:
                pre |= inv[sym].get(t, set())
            if not pre:
                continue
            for block in list(partition):
                inside = block & pre
                outside = block - pre
                if not inside or not outside:
                    continue
                partition.remove(block)
                partition.update((inside, outside))
                if block in work:
                    work.remove(block)
                    work.update((inside, outside))
                else:
                    work.add(inside if len(inside) <= len(outside) else outside)
    return list(partition)


def canonical_dfa(d: Dfa) -> Dfa:
    """Restrict to reachable states and renumber them in BFS order."""
    order = reachable_states(d)
    pos = {s: i for i, s in enumerate(order)}
    return Dfa(
        alphabet=d.alphabet,
        states=tuple(d.states[s] for s in order),
        initial=0,
        accepting=frozenset(pos[s] for s in order if s in d.accepting),
        trans=tuple({sym: pos[d.trans[s][sym]] for sym in d.alphabet} for s in order),
    )


def minimal_dfa(d: Dfa) -> tuple[Dfa, int]:
    """
    Minimal complete DFA for the language of ``d``, and its size.

    Unreachable states are dropped, then Hopcroft's partition refinement
    merges equivalent states. Each merged state keeps the name of its
    first member in BFS order. States are numbered in BFS order, so two
    minimal DFAs of the same language come out identical up to names.
    """
    order = reachable_states(d)
    blocks = _hopcroft(d, order)
    block_of = {s: b for b in blocks for s in b}
    rank = {s: i for i, s in enumerate(order)}
    rep = {b: min(b, key=rank.__getitem__) for b in blocks}
    quotient = Dfa(
        alphabet=d.alphabet,
        states=tuple(d.states[rep[b]] for b in blocks),
        initial=blocks.index(block_of[d.initial]),
        accepting=frozenset(i for i, b in enumerate(blocks) if rep[b] in d.accepting),
        trans=tuple({sym: blocks.index(block_of[d.trans[rep[b]][sym]]) for sym in d.alphabet} for b in blocks),
    )
    out = canonical_dfa(quotient)
    return out, out.size


def dfa_equivalent(a: Dfa, b: Dfa) -> tuple[bool, Word | None]:
    """Language equivalence by BFS over the product automaton; returns a shortest counterexample."""
    if set(a.alphabet) != set(b.alphabet):
        raise ValueError("DFAs have different alphabets")
    start = (a.initial, b.initial)
    parent: dict[tuple[int, int], tuple[tuple[int, int], str] | None] = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        if (pair[0] in a.accepting) != (pair[1] in b.accepting):
            word: list[str] = []
            node = pair
            while parent[node] is not None:
                node, sym = parent[node]
                word.append(sym)
            return False, tuple(reversed(word))
        for sym in a.alphabet:
            nxt = (a.trans[pair[0]][sym], b.trans[pair[1]][sym])
            if nxt not in parent:
                parent[nxt] = (pair, sym)
                queue.append(nxt)
    return True, None


def dfa_isomorphic(a: Dfa, b: Dfa) -> bool:
    """Same structure up to renaming of (reachable) states."""
    if a.alphabet != b.alphabet:
        return False
    ca, cb = canonical_dfa(a), canonical_dfa(b)
    return ca.size == cb.size and ca.accepting == cb.accepting and ca.trans == cb.trans


# ---------------------------------------------------------------------------
# Bound formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutPointSpec:
    lam: float
    iso_delta: float

    def __post_init__(self) -> None:
        check_cutpoint(self.lam)
        check_iso_delta(self.iso_delta)


@dataclass(frozen=True)
class BoundReport:
    """
    Evaluated bound.

    ``value`` is ``inf`` when the bound is too large for a float (at least
    ``1e300``); ``log2_value`` is always exact to double precision, and is
    ``-inf`` for a zero lower bound.
    """

    formula_id: str
    inputs: Mapping[str, float]
    value: float
    log2_value: float

    def format_value(self, digits: int = 4) -> str:
        if math.isinf(self.value):
            return f"2^{self.log2_value:.{digits}f}"
        return f"{self.value:.{digits}f}"


def check_iso_delta(iso_delta: float) -> float:
    if not (isinstance(iso_delta, (int, float)) and 0.0 < iso_delta <= 0.5):
        raise ValueError(f"isolation delta must lie in (0, 1/2], got {iso_delta!r}")
    return float(iso_delta)


def check_cutpoint(lam: float) -> float:
    if not (isinstance(lam, (int, float)) and 0.0 < lam <= 1.0):
        raise ValueError(f"cut-point must lie in (0, 1], got {lam!r}")
    return float(lam)


def dfa_upper_bound_log2(n: int, iso_delta: float) -> float:
    """``log2`` of ``(1 + sqrt(n)/delta)^(2 n^2)``."""
    return 2 * n * n * math.log2(1.0 + math.sqrt(n) / iso_delta)


def dfa_upper_bound_from_qfa(n: int, iso_delta: float) -> BoundReport:
    """States needed by a DFA for a language an ``n``-dimensional MO-1gQFA recognises with isolation ``iso_delta``."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    delta = check_iso_delta(iso_delta)
    n = int(n)
    log2_value = dfa_upper_bound_log2(n, delta)
    if log2_value < math.log2(MATERIALIZE_LIMIT):
        value = (1.0 + math.sqrt(n) / delta) ** (2 * n * n)
    else:
        value = math.inf
    return BoundReport("dfa_upper", {"n": n, "iso_delta": delta}, value, log2_value)


def lower_bound_from_ln(ln_d: float, iso_delta: float) -> float:
    """``(ln d / (2 ln(2/delta)))^(4/9)`` given ``ln d`` directly."""
    delta = check_iso_delta(iso_delta)
    if ln_d < 0:
        raise ValueError("ln d must be nonnegative")
    return (ln_d / (2.0 * math.log(2.0 / delta))) ** (4.0 / 9.0)


def _lower(formula_id: str, d: int, iso_delta: float) -> BoundReport:
    if not (isinstance(d, (int, np.integer)) and d >= 1):
        raise ValueError(f"DFA size must be a positive integer, got {d!r}")
    value = lower_bound_from_ln(math.log(int(d)), iso_delta)
    log2_value = math.log2(value) if value > 0 else -math.inf
    return BoundReport(formula_id, {"d": int(d), "iso_delta": float(iso_delta)}, value, log2_value)


def mo_dim_lower_bound(d: int, iso_delta: float) -> BoundReport:
    """Minimum dimension of an MO-1gQFA recognising, with isolation ``iso_delta``, a language whose minimal DFA has ``d`` states."""
    return _lower("dim_lower", d, iso_delta)


def qk_lower_bound(d: int, iso_delta: float) -> BoundReport:
    """Lower bound on ``q * k`` for CL-1QFA, 1QFAC and 1QCFA; same closed form as :func:`mo_dim_lower_bound`."""
    return _lower("qk_lower", d, iso_delta)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _check_budget(alphabet_size: int, max_len: int, budget: int) -> int:
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    total = count_words(alphabet_size, max_len)
    if total > budget:
        raise BudgetError(f"{total} strings up to length {max_len} exceed the budget of {budget}")
    return total


def iter_states(m: MoGqfa, max_len: int, budget: int = DEFAULT_BUDGET) -> Iterator[tuple[Word, ComplexMatrix]]:
    """Depth-first ``(x, rho_x)`` for every ``|x| <= max_len``; each state is computed once from its parent."""
    _check_budget(len(m.alphabet), max_len, budget)
    stack: list[tuple[Word, ComplexMatrix]] = [((), m.rho0)]
    while stack:
        word, rho = stack.pop()
        yield word, rho
        if len(word) < max_len:
            for sym in reversed(m.alphabet):
                stack.append((word + (sym,), m.apply(sym, rho)))


def accept_probs(m: MoGqfa, max_len: int, budget: int = DEFAULT_BUDGET) -> dict[Word, float]:
    """Acceptance probability of every word up to ``max_len``."""
    return {w: mo_state_accept_prob(m, rho) for w, rho in iter_states(m, max_len, budget)}


@dataclass(frozen=True)
class IsolationEstimate:
    """
    Result of :func:`estimate_isolation`.

    ``iso_hat`` only covers the enumerated strings, so it is an upper bound
    on the true isolation of the cut-point over all of ``Sigma*``.
    """

    iso_hat: float
    consistent: bool
    witness: Word | None
    max_len: int
    strings_checked: int
    note: str = "iso_hat is an upper bound on the true isolation (finite enumeration)"


def estimate_isolation(
    m: MoGqfa, lang: Dfa, lam: float, max_len: int, budget: int = DEFAULT_BUDGET
) -> IsolationEstimate:
    """
    Check that ``m`` recognises ``L(lang)`` with cut-point ``lam`` on all
    words of length at most ``max_len`` and measure how far the
    probabilities stay from ``lam``.

    A word is consistent when ``P(x) > lam`` exactly when ``lang`` accepts
    it. The witness, if any, is the first inconsistent word in shortlex
    order. Probabilities within ``1e-9`` of ``lam`` count as isolation 0.
    """
    if set(m.alphabet) != set(lang.alphabet):
        raise ValueError("automaton and language DFA have different alphabets")
    lam = check_cutpoint(lam)
    total = _check_budget(len(m.alphabet), max_len, budget)
    probs = accept_probs(m, max_len, budget)
    iso = math.inf
    witness = None
    for word in all_words(m.alphabet, max_len):
        p = probs[word]
        gap = abs(p - lam)
        iso = min(iso, 0.0 if gap <= ISOLATION_EPS else gap)
        if witness is None and (p > lam) != lang.accepts(word):
            witness = word
    return IsolationEstimate(iso, witness is None, witness, max_len, total)


def choose_cutpoint(probs: Sequence[float], nontrivial: bool = True, eps: float = ISOLATION_EPS) -> tuple[float, float]:
    """
    Pick the cut-point in ``(0, 1]`` that best isolates ``probs``.

    Candidates are midpoints of gaps wider than ``eps`` between sorted
    values; closer values are float noise around one probability. Unless
    ``nontrivial`` is set, the cut-points that accept everything or nothing
    are candidates too; they are also the fallback when no gap is wide
    enough. Returns ``(lam, isolation)``.
    """
    values = sorted(probs)
    if not values:
        raise ValueError("no probabilities given")
    inner = [((a + b) / 2, (b - a) / 2) for a, b in zip(values, values[1:]) if b - a > eps]
    lo, hi = values[0], values[-1]
    outer = []
    if lo > eps:
        outer.append((lo / 2, lo / 2))
    if hi < 1 - eps:
        outer.append(((hi + 1) / 2, (1 - hi) / 2))
    if not outer:
        outer.append((0.5, 0.5))
    candidates = inner if nontrivial and inner else inner + outer
    lam, iso = max(candidates, key=lambda c: c[1])
    return lam, min(iso, 0.5)


def observation_dfa(probs: Mapping[Word, float], alphabet: Sequence[str], lam: float, max_len: int) -> Dfa:
    """
    Tree-shaped DFA accepting ``{x : |x| <= max_len, P(x) > lam}``.

    One state per word up to ``max_len`` plus a rejecting sink for longer
    words. This is the finite truncation of the language an automaton
    recognises at cut-point ``lam``.
    """
    words = list(all_words(alphabet, max_len))
    index = {w: i for i, w in enumerate(words)}
    sink = len(words)
    trans = []
    for w in words:
        if len(w) < max_len:
            trans.append({sym: index[w + (sym,)] for sym in alphabet})
        else:
            trans.append({sym: sink for sym in alphabet})
    trans.append({sym: sink for sym in alphabet})
    names = ["".join(w) if all(len(s) == 1 for s in alphabet) else ",".join(w) for w in words]
    names = [f"<{n}>" for n in names] + ["<sink>"]
    accepting = {index[w] for w in words if probs[w] > lam}
    return Dfa(alphabet=tuple(alphabet), states=tuple(names), initial=0, accepting=frozenset(accepting), trans=tuple(trans))


def observed_nerode_classes(
    probs: Mapping[Word, float], alphabet: Sequence[str], lam: float, prefix_len: int, suffix_len: int
) -> dict[Word, int]:
    """
    Label words ``|x| <= prefix_len`` by their truncated right-congruence class.

    ``x`` and ``y`` share a label when ``P(xz) > lam`` iff ``P(yz) > lam``
    for every suffix ``|z| <= suffix_len``. Words with different labels are
    distinguished by an enumerated suffix, which is what the separation
    inequality needs. ``probs`` must cover all words up to
    ``prefix_len + suffix_len``.
    """
    suffixes = list(all_words(alphabet, suffix_len))
    labels: dict[Word, int] = {}
    seen: dict[tuple[bool, ...], int] = {}
    for x in all_words(alphabet, prefix_len):
        sig = tuple(probs[x + z] > lam for z in suffixes)
        labels[x] = seen.setdefault(sig, len(seen))
    return labels


# ---------------------------------------------------------------------------
# Separation audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationAudit:
    """
    Pairwise ``vec`` distances across classes.

    ``min_cross_distance`` is ``inf`` when fewer than two classes were
    observed. ``violations`` lists representative word pairs at distance
    below ``threshold - 1e-9``; ``violation_count`` counts all word pairs,
    including words whose states coincide with a representative's.
    """

    dim: int
    max_len: int
    class_count: int
    min_cross_distance: float
    threshold: float
    max_vec_norm: float
    closest_pair: tuple[Word, Word] | None
    violations: list[tuple[Word, Word]] = field(default_factory=list)
    violation_count: int = 0

    @property
    def unit_ball_ok(self) -> bool:
        return self.max_vec_norm <= 1.0 + AUDIT_SLACK

    @property
    def ok(self) -> bool:
        return self.unit_ball_ok and not self.violations


def _separation(
    words: Sequence[Word], vecs: np.ndarray, labels: Sequence[int], threshold: float, dim: int, max_len: int
) -> SeparationAudit:
    norms = np.sqrt(np.sum(np.abs(vecs) ** 2, axis=1))
    max_norm = float(norms.max()) if len(norms) else 0.0
    class_count = len(set(labels))

    # collapse words with the same label and numerically identical state
    groups: dict[tuple[int, bytes], list[int]] = {}
    for i, (lab, v) in enumerate(zip(labels, vecs)):
        key = (lab, np.round(v, 12).tobytes())
        groups.setdefault(key, []).append(i)
    reps = [idx[0] for idx in groups.values()]
    mult = np.array([len(idx) for idx in groups.values()])
    pts = vecs[reps]
    labs = np.array([labels[i] for i in reps])
    npts = len(reps)
    if npts * npts > PAIR_BUDGET:
        raise BudgetError(f"{npts} distinct states need {npts * npts} distance evaluations, over {PAIR_BUDGET}")

    real = np.concatenate([pts.real, pts.imag], axis=1)
    sq = np.sum(real**2, axis=1)
    best = math.inf
    best_pair = None
    violations: list[tuple[int, int]] = []
    chunk = max(1, 2**22 // max(1, npts))
    for start in range(0, npts, chunk):
        stop = min(npts, start + chunk)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * real[start:stop] @ real.T
        cross = labs[start:stop, None] != labs[None, :]
        upper = np.arange(start, stop)[:, None] < np.arange(npts)[None, :]
        mask = cross & upper
        if not mask.any():
            continue
        dist = np.sqrt(np.maximum(d2, 0.0))
        dist = np.where(mask, dist, np.inf)
        flat = int(np.argmin(dist))
        i, j = divmod(flat, npts)
        exact = float(np.linalg.norm(pts[start + i] - pts[j]))
        if exact < best:
            best, best_pair = exact, (start + i, j)
        for i, j in zip(*np.nonzero(dist < threshold - AUDIT_SLACK + 1e-7)):
            a, b = start + int(i), int(j)
            if float(np.linalg.norm(pts[a] - pts[b])) < threshold - AUDIT_SLACK:
                violations.append((a, b))

    rep_words = [words[i] for i in reps]
    return SeparationAudit(
        dim=dim,
        max_len=max_len,
        class_count=class_count,
        min_cross_distance=best,
        threshold=threshold,
        max_vec_norm=max_norm,
        closest_pair=None if best_pair is None else (rep_words[best_pair[0]], rep_words[best_pair[1]]),
        violations=[(rep_words[a], rep_words[b]) for a, b in violations],
        violation_count=int(sum(mult[a] * mult[b] for a, b in violations)),
    )


def separation_audit_labeled(
    m: MoGqfa, labels: Mapping[Word, int], iso_delta: float, max_len: int | None = None
) -> SeparationAudit:
    """Audit the words in ``labels`` (word -> class id) against the ``2 delta / sqrt(n)`` threshold."""
    delta = check_iso_delta(iso_delta)
    words = sorted(labels, key=lambda w: (len(w), [m.alphabet.index(s) for s in as_word(w, m.alphabet)]))
    if not words:
        raise ValueError("no words to audit")
    depth = max(len(w) for w in words) if max_len is None else max_len
    cache: dict[Word, ComplexMatrix] = {(): m.rho0}
    vecs = np.empty((len(words), m.dim * m.dim), dtype=np.complex128)
    for i, w in enumerate(words):
        for cut in range(len(w) + 1):
            if w[:cut] not in cache:
                cache[w[:cut]] = m.apply(w[cut - 1], cache[w[: cut - 1]])
        vecs[i] = cache[w].reshape(-1)
    threshold = 2.0 * delta / math.sqrt(m.dim)
    return _separation(words, vecs, [labels[w] for w in words], threshold, m.dim, depth)


def separation_audit(
    m: MoGqfa, min_dfa: Dfa, iso_delta: float, max_len: int, budget: int = DEFAULT_BUDGET
) -> SeparationAudit:
    """
    Check the geometric premises of the DFA-size bound on all words up to ``max_len``.

    Each word is labelled by the state ``min_dfa`` reaches on it (its
    Myhill-Nerode class when ``min_dfa`` is minimal). The audit records the
    largest ``||vec(rho_x)||`` (should not exceed 1) and every cross-class
    pair closer than ``2 * iso_delta / sqrt(n)``. All distinct states are
    compared pairwise, so the verdict and the minimum are exact.
    """
    if set(m.alphabet) != set(min_dfa.alphabet):
        raise ValueError("automaton and DFA have different alphabets")
    delta = check_iso_delta(iso_delta)
    total = _check_budget(len(m.alphabet), max_len, budget)
    words: list[Word] = []
    labels: list[int] = []
    vecs = np.empty((total, m.dim * m.dim), dtype=np.complex128)
    for i, (w, rho) in enumerate(iter_states(m, max_len, budget)):
        words.append(w)
        labels.append(min_dfa.run(w))
        vecs[i] = rho.reshape(-1)
    threshold = 2.0 * delta / math.sqrt(m.dim)
    return _separation(words, vecs, labels, threshold, m.dim, max_len)


def nerode_class_count(d: Dfa, max_len: int) -> int:
    """Number of minimal-DFA classes hit by words of length at most ``max_len``."""
    return len({d.run(w) for w in all_words(d.alphabet, max_len)})
