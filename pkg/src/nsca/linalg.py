"""Symmetric dense linear algebra for small covariance matrices.

The solvers here are written against the package's own kernels rather than
LAPACK so that their failure behaviour is fully specified: Cholesky reports
the failing pivot, the Jacobi eigensolver and the joint diagonalizer report
their sweep budgets, and every tolerance is explicit. Matrices in this
package are covariance-sized (a few dozen rows at most), where cyclic Jacobi
sweeps are accurate and fast enough.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoConvergence, NotPositiveDefinite, ShapeMismatch

__all__ = [
    "SymMatrix",
    "EigPair",
    "cholesky",
    "sym_eig",
    "gevd",
    "ajd",
    "off_diag_residual",
    "amari_index",
    "JACOBI_MAX_SWEEPS",
    "AJD_MAX_SWEEPS",
    "AJD_ANGLE_TOL",
]

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-13  # relative to max |entry|
AJD_MAX_SWEEPS = 200
AJD_ANGLE_TOL = 1e-10
CHOLESKY_PIVOT_TOL = 1e-12  # relative to trace/n


class SymMatrix:
    """A real symmetric matrix; construction symmetrizes its input.

    The stored array is read-only and exactly symmetric, so downstream
    solvers never have to re-check. Use ``.entries`` for the raw ndarray.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ShapeMismatch("SymMatrix requires a square 2-D array")
        if not np.isfinite(a).all():
            raise ValueError("SymMatrix entries must be finite")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self.entries = a

    @property
    def dim(self):
        return self.entries.shape[0]

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


def as_sym(mat):
    """Coerce an ndarray (or SymMatrix) to SymMatrix."""
    return mat if isinstance(mat, SymMatrix) else SymMatrix(mat)


@dataclass(frozen=True)
class EigPair:
    """Eigenvalues with matched eigenvector columns and their sort order."""

    values: np.ndarray
    vectors: np.ndarray
    order: str  # "ascending" or "descending"


def cholesky(mat):
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    mat : SymMatrix or array_like
        The matrix to factor.

    Returns
    -------
    ndarray
        Lower-triangular ``L`` with ``L @ L.T`` equal to the input.

    Raises
    ------
    NotPositiveDefinite
        If any pivot falls at or below ``1e-12 * trace / n``. The failing
        column index is reported on the exception.
    """
    S = as_sym(mat).entries
    n = S.shape[0]
    tol = CHOLESKY_PIVOT_TOL * np.trace(S) / n
    L, fail = _kernels.cholesky(np.ascontiguousarray(S), tol)
    if fail >= 0:
        raise NotPositiveDefinite(
            f"Cholesky pivot {fail} at or below tolerance {tol:.3e}", pivot=fail
        )
    return L


def sym_eig(mat, max_sweeps=JACOBI_MAX_SWEEPS):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    mat : SymMatrix or array_like
    max_sweeps : int
        Sweep budget before giving up.

    Returns
    -------
    EigPair
        Eigenvalues ascending, ties kept in rotation order (stable sort);
        eigenvector columns orthonormal and matched to values.

    Raises
    ------
    NoConvergence
        If the off-diagonal mass has not reached tolerance within the budget.
    """
    S = as_sym(mat).entries
    scale = np.abs(S).max()
    eps = JACOBI_OFF_TOL * scale
    vals, vecs, sweeps, converged = _kernels.jacobi_eig(
        np.ascontiguousarray(S), max_sweeps, eps
    )
    if not converged:
        raise NoConvergence(
            f"Jacobi eigensolver: off-diagonal mass above tolerance after {sweeps} sweeps"
        )
    order = np.argsort(vals, kind="stable")
    return EigPair(values=vals[order], vectors=vecs[:, order], order="ascending")


def _whitening_factor(B, reg_eps):
    """Cholesky factor of ``B`` after optional relative ridge regularization."""
    Bm = as_sym(B).entries
    if reg_eps < 0:
        raise ValueError("reg_eps must be nonnegative")
    if reg_eps > 0:
        n = Bm.shape[0]
        Bm = Bm + (reg_eps * np.trace(Bm) / n) * np.eye(n)
    return cholesky(Bm)


def gevd(A, B, order="ascending", reg_eps=0.0):
    """Generalized eigendecomposition of the symmetric pair ``(A, B)``.

    Solves ``A w = lambda B w`` for symmetric ``A`` and symmetric positive
    definite ``B`` by reduction to an ordinary symmetric problem: with
    ``B = L L^T`` and ``M = L^{-1} A L^{-T}``, the eigenvectors of ``M``
    map back through ``W = L^{-T} U``.

    Parameters
    ----------
    A, B : SymMatrix or array_like
        Same dimension; ``B`` must be positive definite (after the optional
        ridge ``reg_eps * trace(B)/n * I``).
    order : {"ascending", "descending"}
        Eigenvalue sort order of the returned pair.
    reg_eps : float
        Relative ridge added to ``B`` before factoring; 0 disables it.

    Returns
    -------
    EigPair
        ``values`` sorted as requested; ``vectors`` columns satisfy
        ``W.T @ B @ W = I`` and ``W.T @ A @ W = diag(values)``.

    Raises
    ------
    ShapeMismatch
        If the two matrices differ in dimension.
    NotPositiveDefinite
        If ``B`` fails its Cholesky factorization.
    NoConvergence
        Propagated from the inner eigensolver.
    """
    Am = as_sym(A).entries
    Bm = as_sym(B)
    if Am.shape[0] != Bm.dim:
        raise ShapeMismatch("gevd: A and B must share a dimension")
    if order not in ("ascending", "descending"):
        raise ValueError("order must be 'ascending' or 'descending'")
    L = _whitening_factor(Bm, reg_eps)
    X = _kernels.solve_lower(L, np.ascontiguousarray(Am))
    M = _kernels.solve_lower(L, np.ascontiguousarray(X.T)).T
    pair = sym_eig(0.5 * (M + M.T))
    W = _kernels.solve_lower_t(L, np.ascontiguousarray(pair.vectors))
    vals = pair.values
    if order == "descending":
        vals = vals[::-1].copy()
        W = W[:, ::-1].copy()
    return EigPair(values=vals, vectors=W, order=order)


def ajd(mats, weights=None, whitener=None, reg_eps=0.0, max_sweeps=AJD_MAX_SWEEPS):
    """Weighted approximate joint diagonalization of symmetric matrices.

    The set is congruence-whitened by the designated whitener (``B = L L^T``,
    ``M_i = L^{-1} C_i L^{-T}``), then jointly diagonalized by Jacobi-style
    Givens rotations whose angles maximize the weighted sum of squared
    diagonal gains. The result ``W = L^{-T} Q`` satisfies
    ``W.T @ whitener @ W = I`` exactly up to rounding.

    Parameters
    ----------
    mats : sequence of SymMatrix or array_like
        Matrices to diagonalize jointly; at least one.
    weights : sequence of float, optional
        Nonnegative weight per matrix; uniform if omitted.
    whitener : SymMatrix or array_like, optional
        Positive definite matrix defining the metric. Defaults to the
        unweighted mean of ``mats``.
    reg_eps : float
        Relative ridge added to the whitener before factoring.
    max_sweeps : int
        Rotation sweep budget.

    Returns
    -------
    (ndarray, float)
        The demixer ``W`` (columns are components) and the weighted squared
        off-diagonal residual of the transformed set.

    Raises
    ------
    NoConvergence
        If the largest rotation angle has not dropped below 1e-10 within the
        sweep budget.
    """
    stack = [as_sym(m).entries for m in mats]
    if len(stack) == 0:
        raise ValueError("ajd needs at least one matrix")
    n = stack[0].shape[0]
    if any(m.shape[0] != n for m in stack):
        raise ShapeMismatch("ajd: matrices must share a dimension")
    K = len(stack)
    if weights is None:
        w = np.ones(K)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (K,):
            raise ShapeMismatch("ajd: one weight per matrix")
        if (w < 0).any():
            raise ValueError("ajd: weights must be nonnegative")
    if whitener is None:
        whitener = SymMatrix(sum(stack) / K)
    L = _whitening_factor(whitener, reg_eps)
    M = np.empty((K, n, n))
    for i, C in enumerate(stack):
        X = _kernels.solve_lower(L, np.ascontiguousarray(C))
        Mi = _kernels.solve_lower(L, np.ascontiguousarray(X.T)).T
        M[i] = 0.5 * (Mi + Mi.T)
    Q, sweeps, converged = _kernels.ajd_rotate(M, w, max_sweeps, AJD_ANGLE_TOL)
    if not converged:
        raise NoConvergence(
            f"joint diagonalization: rotation angles above tolerance after {sweeps} sweeps"
        )
    W = _kernels.solve_lower_t(L, np.ascontiguousarray(Q))
    residual = off_diag_residual(W, mats, weights=w)
    return W, residual


def off_diag_residual(W, mats, weights=None):
    """Weighted squared off-diagonal mass of ``W.T @ C_i @ W`` over a set.

    Parameters
    ----------
    W : ndarray
        Candidate demixer, columns are components.
    mats : sequence of SymMatrix or array_like
    weights : sequence of float, optional
        Uniform if omitted.

    Returns
    -------
    float
        ``sum_i w_i * sum_{p != q} (W.T C_i W)[p, q]^2``.
    """
    stack = [as_sym(m).entries for m in mats]
    K = len(stack)
    w = np.ones(K) if weights is None else np.asarray(weights, dtype=np.float64)
    total = 0.0
    for wi, C in zip(w, stack):
        D = W.T @ C @ W
        off = D - np.diag(np.diag(D))
        total += wi * float(np.sum(off * off))
    return total


def amari_index(G):
    """Normalized distance of a square matrix from a scaled permutation.

    Zero exactly when ``G`` has one nonzero entry per row and per column;
    grows toward 1 as rows and columns blend. Standard figure of merit for
    a demixer composed with the mixer it is supposed to invert.
    """
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    if G.shape != (n, n):
        raise ShapeMismatch("amari_index needs a square matrix")
    if n < 2:
        return 0.0
    A = np.abs(G)
    rmax = A.max(axis=1, keepdims=True)
    cmax = A.max(axis=0, keepdims=True)
    rmax = np.where(rmax > 0, rmax, 1.0)
    cmax = np.where(cmax > 0, cmax, 1.0)
    rows = (A / rmax).sum(axis=1) - 1.0
    cols = (A / cmax).sum(axis=0) - 1.0
    return float((rows.sum() + cols.sum()) / (2.0 * n * (n - 1)))
