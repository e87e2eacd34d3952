"""
Dense complex linear algebra for finite-dimensional quantum automata.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. All functions
are pure: inputs are never modified, outputs are fresh arrays.

The ``vec`` mapping stacks the *rows* of a matrix (row-major order), so
``vec(|i><j|) == |i>|j>``. This differs from the column-stacking convention
found in many numerical libraries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

ComplexMatrix = npt.NDArray[np.complex128]

VALIDATION_TOL = 1e-9
EQUIVALENCE_TOL = 1e-7


class ShapeError(ValueError):
    """Raised when matrix shapes are incompatible with an operation."""


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check.

    ``residual`` is the largest entrywise deviation found; ``passed`` is
    ``residual <= tol``. A failed check is a value, not an exception.
    """

    name: str
    passed: bool
    residual: float
    tol: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def describe(self) -> str:
        status = "pass" if self.passed else "FAIL"
        msg = f"{self.name}: {status} (residual {self.residual:.3g}, tol {self.tol:.3g})"
        if self.detail:
            msg += f": {self.detail}"
        return msg


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(a: npt.ArrayLike, what: str = "matrix") -> ComplexMatrix:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{what} must be square, got shape {m.shape}")
    return m


def _square_family(elems: Iterable[npt.ArrayLike], what: str) -> list[ComplexMatrix]:
    mats = [_square(e, what) for e in elems]
    if not mats:
        raise ShapeError(f"empty {what} family")
    n = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != n:
            raise ShapeError(f"{what} {i} has dimension {m.shape[0]}, expected {n}")
    return mats


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    return np.conj(a).T


def basis_projector(n: int, i: int) -> ComplexMatrix:
    """``|i><i|`` on ``C^n`` (0-indexed)."""
    p = np.zeros((n, n), dtype=np.complex128)
    p[i, i] = 1.0
    return p


def ket_bra(n: int, i: int, j: int) -> ComplexMatrix:
    """``|i><j|`` on ``C^n`` (0-indexed)."""
    m = np.zeros((n, n), dtype=np.complex128)
    m[i, j] = 1.0
    return m


def tensor_product(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product; entry ``(i*rb + k, j*cb + l)`` equals ``a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def vec_of(a: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Row-stacking vectorisation of a square matrix.

    Examples
    --------
    >>> vec_of([[1, 2], [3, 4]]).real.tolist()
    [1.0, 2.0, 3.0, 4.0]
    """
    m = _square(a)
    return m.reshape(-1).copy()


def singular_values(a: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Singular values, descending, ``min(rows, cols)`` of them. Tiny values are not truncated."""
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def trace_norm(a: npt.ArrayLike) -> float:
    """Sum of singular values of a square matrix."""
    m = _square(a)
    return float(math.fsum(singular_values(m)))


def trace_distance(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """``||a - b||_tr``. Note there is no factor 1/2."""
    ma, mb = _square(a), _square(b)
    if ma.shape != mb.shape:
        raise ShapeError(f"shape mismatch {ma.shape} vs {mb.shape}")
    return trace_norm(ma - mb)


def vec_norm(v: npt.ArrayLike) -> float:
    """Euclidean norm of a complex vector."""
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    return float(np.sqrt(math.fsum((arr.real**2 + arr.imag**2).tolist())))


def _max_abs(m: ComplexMatrix) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def check_unitary(u: npt.ArrayLike, tol: float = VALIDATION_TOL) -> CheckResult:
    m = _square(u, "unitary")
    residual = _max_abs(dagger(m) @ m - np.eye(m.shape[0]))
    return CheckResult("unitarity", residual <= tol, residual, tol)


def check_kraus_complete(elems: Sequence[npt.ArrayLike], tol: float = VALIDATION_TOL) -> CheckResult:
    """Check ``sum_k E_k^dagger E_k == I`` entrywise within ``tol``."""
    mats = _square_family(elems, "Kraus element")
    n = mats[0].shape[0]
    total = np.zeros((n, n), dtype=np.complex128)
    for e in mats:
        total += dagger(e) @ e
    residual = _max_abs(total - np.eye(n))
    return CheckResult("kraus completeness", residual <= tol, residual, tol)


def hermitian_residual(a: ComplexMatrix) -> float:
    return _max_abs(a - dagger(a))


def check_projector(p: npt.ArrayLike, tol: float = VALIDATION_TOL) -> CheckResult:
    """Hermitian and idempotent within ``tol``."""
    m = _square(p, "projector")
    residual = max(hermitian_residual(m), _max_abs(m @ m - m))
    return CheckResult("projector", residual <= tol, residual, tol)


def check_projective_measurement(projs: Sequence[npt.ArrayLike], tol: float = VALIDATION_TOL) -> CheckResult:
    """
    Check that ``projs`` is a complete family of orthogonal projectors.

    Each element must be Hermitian and idempotent, distinct elements must
    multiply to zero, and the family must sum to the identity. The reported
    residual is the worst of these entrywise deviations.
    """
    mats = _square_family(projs, "projector")
    n = mats[0].shape[0]
    worst = 0.0
    detail = ""
    for i, p in enumerate(mats):
        r = max(hermitian_residual(p), _max_abs(p @ p - p))
        if r > worst:
            worst, detail = r, f"element {i} is not a projector"
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            r = _max_abs(mats[i] @ mats[j])
            if r > worst:
                worst, detail = r, f"elements {i} and {j} are not orthogonal"
    r = _max_abs(sum(mats) - np.eye(n))
    if r > worst:
        worst, detail = r, "projectors do not sum to identity"
    passed = worst <= tol
    return CheckResult("projective measurement", passed, worst, tol, "" if passed else detail)


def check_density(rho: npt.ArrayLike, tol: float = VALIDATION_TOL) -> CheckResult:
    """
    Check that ``rho`` is a density operator.

    Hermiticity is measured as the max-abs entry of ``rho - rho^dagger``,
    positivity via the eigenvalues of the Hermitian part, and the trace
    against 1. The residual is the largest violation of the three.
    """
    m = _square(rho, "density operator")
    herm = hermitian_residual(m)
    min_eig = float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])
    trace_err = abs(complex(np.trace(m)) - 1.0)
    parts = {
        "not Hermitian": herm,
        "negative eigenvalue": max(0.0, -min_eig),
        "trace differs from 1": trace_err,
    }
    detail, residual = max(parts.items(), key=lambda kv: kv[1])
    passed = residual <= tol
    return CheckResult("density", passed, residual, tol, "" if passed else detail)


def stack_kraus(elems: Sequence[npt.ArrayLike]) -> npt.NDArray[np.complex128]:
    """Stack a Kraus family into a ``(K, n, n)`` array."""
    return np.stack(_square_family(elems, "Kraus element"))


def apply_operation(
    elems: Sequence[npt.ArrayLike] | npt.NDArray[np.complex128],
    rho: npt.ArrayLike,
    tol: float = VALIDATION_TOL,
    *,
    check: bool = True,
) -> ComplexMatrix:
    """
    Apply the trace-preserving operation ``rho -> sum_k E_k rho E_k^dagger``.

    Parameters
    ----------
    elems
        Kraus elements, either a sequence of matrices or a stacked
        ``(K, n, n)`` array.
    rho
        Input operator of the same dimension.
    check
        Verify completeness first (default). Simulators that validated the
        channel once at construction pass ``False`` in their inner loops.

    Raises
    ------
    ShapeError
        On dimension mismatch.
    ValueError
        If ``check`` is set and the elements are not complete.
    """
    stack = elems if isinstance(elems, np.ndarray) and elems.ndim == 3 else stack_kraus(elems)
    r = _square(rho)
    if stack.shape[1:] != r.shape:
        raise ShapeError(f"Kraus elements act on dimension {stack.shape[1]}, state has {r.shape[0]}")
    if check:
        res = check_kraus_complete(list(stack), tol)
        if not res.passed:
            raise ValueError(f"operation elements are not complete: {res.describe()}")
    return np.sum(stack @ r @ np.conj(stack).transpose(0, 2, 1), axis=0)
