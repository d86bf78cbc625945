"""Separation engines: class-covariance diagonalization and component mapping.

Two-class separation solves one generalized eigenvalue problem (the event
class against the whole record); multi-class separation jointly diagonalizes
all class covariances. Both return demixers normalized against the total
covariance, so extracted sources are scale-free. ``eigenratio_map`` assigns
each class the component where its spectrum dominates the other classes, and
``two_round_targeted`` chains a blind second-order pass with a targeted
two-class refinement of one component.
"""

from dataclasses import dataclass

import numpy as np

from .detectors import energy_envelope
from .errors import BadClass, BadComponent, NotPositiveDefinite, ShapeMismatch
from .linalg import SymMatrix, ajd, gevd, off_diag_residual, sym_eig
from .partition import Partition, class_covariances, threshold_mask
from .records import Record

__all__ = [
    "SeparationResult",
    "ClassComponentMap",
    "nsca_two_class",
    "nsca_multi_class",
    "eigenratio_map",
    "two_round_targeted",
    "apply_separation",
]

RATIO_FLOOR = 1e-12


@dataclass
class SeparationResult:
    """Demixer with per-class spectra, extracted sources and diagnostics.

    ``demixer`` columns are components; ``sources.samples[i] = W[:, i].T @ x``.
    ``spectra[i]`` is the diagonal of ``W.T @ C_i @ W`` for class ``i``.
    ``order`` declares the eigenvalue sort ("descending" for the two-class
    engine, "none" for joint diagonalization).
    """

    demixer: np.ndarray
    spectra: np.ndarray
    order: str
    sources: Record
    diagnostics: dict


@dataclass(frozen=True)
class ClassComponentMap:
    """Eigenvalue-ratio vectors per class and the dominant component of each."""

    ratios: np.ndarray  # (K, n)
    best_component: np.ndarray  # (K,)
    one_to_one: bool


def apply_separation(W, record):
    """Project a record through a demixer: channel ``i`` is ``W[:, i]^T x_k``."""
    W = np.asarray(W, dtype=np.float64)
    if not isinstance(record, Record):
        record = Record(record)
    n = record.channels
    if W.shape != (n, n):
        raise ShapeMismatch(f"demixer must be ({n}, {n}), got {W.shape}")
    sources = W.T @ record.samples
    names = [f"y{i + 1}" for i in range(n)]
    return Record(sources, record.sample_rate_hz, names)


def _spectra(W, covset):
    out = np.empty((covset.K, W.shape[1]))
    for i, C in enumerate(covset.covs):
        out[i] = np.diag(W.T @ C.entries @ W)
    return out


def _whitening_error(W, total):
    return float(np.abs(W.T @ total.entries @ W - np.eye(W.shape[1])).max())


def _condition_number(mat):
    vals = sym_eig(mat).values
    lo = vals[0]
    return float(vals[-1] / lo) if lo > 0 else float("inf")


def nsca_two_class(record, mask, reg_eps=0.0, weight_rule="cardinality"):
    """Two-class separation: GEVD of the event-class covariance against the total.

    With mask classes {0: background, 1: event}, solves
    ``C_1 w = lambda C_x w`` with eigenvalues descending, so the first
    column maximizes the Rayleigh quotient ``w^T C_1 w / w^T C_x w`` --
    the component with maximal relative energy inside the event samples.
    (Ascending order on ``C_0`` would give the same columns; see the
    direction-equivalence property in the tests.)

    Parameters
    ----------
    record : Record
    mask : Partition
        Exactly two classes, each with at least ``n + 1`` samples.
    reg_eps : float
        Relative ridge applied to ``C_x`` if it is near singular.
    weight_rule : str
        Forwarded to covariance estimation (affects recorded weights only).

    Returns
    -------
    SeparationResult
        ``order = "descending"``; ``W.T @ C_x @ W = I``.
    """
    if not isinstance(mask, Partition):
        raise TypeError("nsca_two_class expects a Partition mask")
    if mask.K != 2:
        raise BadClass(f"two-class separation needs K=2, got K={mask.K}")
    covset = class_covariances(record, mask, weight_rule)
    try:
        pair = gevd(covset.covs[1], covset.total, order="descending", reg_eps=reg_eps)
    except NotPositiveDefinite as err:
        raise NotPositiveDefinite(
            f"{err}; total covariance is degenerate, pass reg_eps > 0"
        ) from err
    W = pair.vectors
    sources = apply_separation(W, record)
    return SeparationResult(
        demixer=W,
        spectra=_spectra(W, covset),
        order="descending",
        sources=sources,
        diagnostics={
            "eigenvalues": pair.values,
            "whitening_error": _whitening_error(W, covset.total),
            "total_condition": _condition_number(covset.total),
            "class_counts": covset.counts,
            "weights": covset.weights,
        },
    )


def nsca_multi_class(record, part, include_total=False, weight_rule="cardinality", reg_eps=0.0):
    """Multi-class separation: joint diagonalization of all class covariances.

    With ``include_total=False`` the set ``{C_1 .. C_K}`` is hard-whitened by
    the total covariance (``W^T C_x W = I``). With ``include_total=True`` the
    whitener relaxes to ``(trace(C_x)/n) I`` and ``C_x`` joins the set with
    the mean class weight, letting the solver trade total-covariance
    diagonality against the class set.

    Returns
    -------
    SeparationResult
        ``order = "none"`` (joint diagonalization has no eigenvalue sort);
        diagnostics carry the weighted off-diagonal residual.
    """
    if not isinstance(part, Partition):
        raise TypeError("nsca_multi_class expects a Partition")
    covset = class_covariances(record, part, weight_rule)
    mats = list(covset.covs)
    weights = list(covset.weights)
    n = covset.dim
    if include_total:
        whitener = SymMatrix(np.trace(covset.total.entries) / n * np.eye(n))
        mats.append(covset.total)
        weights.append(float(np.mean(covset.weights)))
    else:
        whitener = covset.total
    try:
        W, residual = ajd(mats, weights=weights, whitener=whitener, reg_eps=reg_eps)
    except NotPositiveDefinite as err:
        raise NotPositiveDefinite(f"{err}; pass reg_eps > 0 to regularize") from err
    sources = apply_separation(W, record)
    return SeparationResult(
        demixer=W,
        spectra=_spectra(W, covset),
        order="none",
        sources=sources,
        diagnostics={
            "ajd_residual": residual,
            "class_residual": off_diag_residual(W, covset.covs, covset.weights),
            "whitening_error": _whitening_error(W, covset.total),
            "include_total": bool(include_total),
            "class_counts": covset.counts,
            "weights": np.asarray(weights),
        },
    )


def eigenratio_map(spectra, weights):
    """Dominance ratios of class spectra and the best component per class.

    For class ``j`` with per-component spectrum ``L_j``, the ratio vector is
    ``d_j = L_j / sum_{i != j} w_i L_i`` elementwise, denominators floored at
    1e-12. ``best_component[j]`` is the argmax of ``d_j`` (ties to the lowest
    index); ``one_to_one`` says whether classes claim distinct components.
    """
    S = np.asarray(spectra, dtype=np.float64)
    if S.ndim != 2:
        raise ShapeMismatch("spectra must be (K, n)")
    K, n = S.shape
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (K,):
        raise ShapeMismatch("one weight per class")
    ratios = np.empty((K, n))
    for j in range(K):
        denom = np.zeros(n)
        for i in range(K):
            if i != j:
                denom += w[i] * S[i]
        denom = np.maximum(denom, RATIO_FLOOR)
        ratios[j] = S[j] / denom
    best = np.argmax(ratios, axis=1)
    return ClassComponentMap(
        ratios=ratios,
        best_component=best,
        one_to_one=bool(np.unique(best).size == K),
    )


def _lagged_covariances(record, lags):
    """Symmetrized lagged covariances of the centered record."""
    X = record.samples - record.samples.mean(axis=1, keepdims=True)
    T = record.length
    out = []
    for tau in lags:
        C = X[:, : T - tau] @ X[:, tau:].T / (T - tau - 1)
        out.append(SymMatrix(0.5 * (C + C.T)))
    return out


def two_round_targeted(
    record,
    lags,
    target_component,
    reg_eps=0.0,
    round2_theta=0.5,
    envelope_window=101,
    min_event_len=1,
):
    """Blind second-order separation refined by a targeted two-class round.

    Round 1 jointly diagonalizes the symmetrized lagged covariances
    ``{(C(tau) + C(tau)^T) / 2}`` whitened by the total covariance -- a
    second-order blind pass that separates sources with distinct spectra.
    Round 2 treats the chosen round-1 component as a trigger: samples where
    its energy envelope reaches ``round2_theta`` of peak become the event
    class, and a two-class separation on the *original* record sharpens the
    component. Useful when one round-1 component is only roughly the target.

    Returns
    -------
    SeparationResult
        The round-2 result; diagnostics gain ``round1_demixer``,
        ``round1_residual`` and the round-2 mask counts.
    """
    if not isinstance(record, Record):
        record = Record(record)
    lags = [int(t) for t in lags]
    if len(lags) == 0:
        raise ValueError("lags must be nonempty")
    if any(t < 1 for t in lags):
        raise ValueError("lags must be >= 1")
    if max(lags) >= record.length - 2:
        raise ValueError("max lag leaves no samples to correlate")
    n = record.channels
    target = int(target_component)
    if not 0 <= target < n:
        raise BadComponent(f"component {target} outside [0, {n})")
    X = record.samples - record.samples.mean(axis=1, keepdims=True)
    total = SymMatrix(X @ X.T / (record.length - 1))
    mats = _lagged_covariances(record, lags)
    W1, residual1 = ajd(mats, whitener=total, reg_eps=reg_eps)
    y1 = W1.T @ record.samples
    env = energy_envelope(y1[target], envelope_window)
    mask = threshold_mask(env, round2_theta, min_event_len)
    result = nsca_two_class(record, mask, reg_eps=reg_eps)
    result.diagnostics.update(
        round1_demixer=W1,
        round1_residual=residual1,
        round2_mask_counts=mask.class_counts,
        lags=lags,
        target_component=target,
    )
    return result
