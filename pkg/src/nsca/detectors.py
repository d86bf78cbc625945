"""Detector bank: per-sample nonstationarity indexes.

Each detector turns a record (or one of its channels) into an
:class:`~nsca.records.IndexSeries` whose large values flag samples where the
local statistics disagree with a stationary reference. Detectors differ in
what they are sensitive to:

* ``anderson_darling_index`` -- distributional drift against a fitted Gaussian;
* ``energy_envelope`` / ``reference_trigger_index`` -- local power;
* ``cumulant_tracking`` -- drift of one sample cumulant (mean, variance,
  third moment, excess-kurtosis numerator);
* ``easi_index`` -- norm of the relative-gradient update of an adaptive
  separator, large whenever the mixture statistics move;
* ``ar_tracking`` -- drift of autoregressive coefficients between offset
  windows;
* ``kalman_innovation_index`` -- whiteness of the normalized innovations of a
  linear state-space model, large where the data leaves the model.

Warm-up samples (before a detector has a full window) are zeroed and the
first trustworthy sample is exposed as ``valid_from``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .errors import (
    BadChannel,
    DegenerateSeries,
    Diverged,
    InvalidWindow,
    ModelMismatch,
    NotPositiveDefinite,
    ShapeMismatch,
)
from .linalg import SymMatrix, cholesky, sym_eig
from .records import IndexSeries, Record

__all__ = [
    "FittedCdf",
    "StateSpaceModel",
    "fit_gaussian_cdf",
    "anderson_darling_index",
    "energy_envelope",
    "cumulant_tracking",
    "prewhiten",
    "easi_index",
    "ar_tracking",
    "normalized_innovations",
    "kalman_innovation_index",
    "fit_ar1_state_space",
    "reference_trigger_index",
    "normalize_index",
    "DEFAULT_AD_WINDOW",
    "DEFAULT_ENVELOPE_WINDOW",
    "DEFAULT_CUMULANT_WINDOW",
    "DEFAULT_CUMULANT_ORDER",
    "DEFAULT_AR_WINDOW",
    "DEFAULT_AR_ORDER",
    "DEFAULT_WHITENESS_WINDOW",
    "DEFAULT_EASI_STEP",
]

DEFAULT_AD_WINDOW = 64
DEFAULT_ENVELOPE_WINDOW = 101
DEFAULT_CUMULANT_WINDOW = 512
DEFAULT_CUMULANT_ORDER = 2
DEFAULT_AR_WINDOW = 512
DEFAULT_AR_ORDER = 4
DEFAULT_WHITENESS_WINDOW = 256
DEFAULT_EASI_STEP = 0.01

EASI_DIVERGENCE_CAP = 1e6
CDF_CLAMP = 1e-12


def _as_series(series):
    x = np.ascontiguousarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ShapeMismatch("expected a 1-D sample series")
    if not np.isfinite(x).all():
        raise ValueError("series contains non-finite samples")
    return x


# ---------------------------------------------------------------------------
# Distribution-drift detector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittedCdf:
    """Gaussian CDF fitted to a calibration stretch of data."""

    mean: float
    std: float

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=np.float64) - self.mean) / self.std)


def fit_gaussian_cdf(series):
    """Fit a Gaussian reference CDF to a series.

    Raises
    ------
    DegenerateSeries
        If the series is shorter than 2 samples or its variance falls below
        1e-24 (no distribution to speak of).
    """
    x = _as_series(series)
    if x.size < 2:
        raise DegenerateSeries("need at least 2 samples to fit a reference CDF")
    var = float(np.var(x, ddof=1))
    if var < 1e-24:
        raise DegenerateSeries("series variance below 1e-24")
    return FittedCdf(mean=float(np.mean(x)), std=math.sqrt(var))


def anderson_darling_index(series, window=DEFAULT_AD_WINDOW, cdf=None):
    """Sliding-window Anderson-Darling statistic against a fitted Gaussian.

    For each trailing window of length ``p`` the samples are sorted and

        A^2 = -p - (1/p) * sum_{i=1..p} (2i - 1) *
              [ln F(z_(i)) + ln(1 - F(z_(p+1-i)))]

    with ``F`` the reference CDF, clamped to [1e-12, 1 - 1e-12] before the
    logs. The statistic is invariant under affine maps applied jointly to the
    series and the reference fit.

    Parameters
    ----------
    series : array_like, 1-D
    window : int
        Window length ``p``; ``1 <= p <= len(series)``.
    cdf : FittedCdf, optional
        Reference distribution; fitted to the whole series when omitted.

    Returns
    -------
    IndexSeries
        ``valid_from = p - 1``.
    """
    x = _as_series(series)
    p = int(window)
    if not 1 <= p <= x.size:
        raise InvalidWindow(f"window {p} outside [1, {x.size}]")
    if cdf is None:
        cdf = fit_gaussian_cdf(x)
    values = _kernels.ad_sliding(x, p, cdf.mean, cdf.std, CDF_CLAMP)
    return IndexSeries(
        values,
        valid_from=p - 1,
        name="anderson_darling",
        meta={"window": p, "mean": cdf.mean, "std": cdf.std},
    )


# ---------------------------------------------------------------------------
# Power and cumulant trackers
# ---------------------------------------------------------------------------

def _prefix(x):
    out = np.empty(x.size + 1)
    out[0] = 0.0
    np.cumsum(x, out=out[1:])
    return out


def energy_envelope(series, window=DEFAULT_ENVELOPE_WINDOW):
    """Centered moving average of squared samples, truncated at the edges.

    ``window`` must be odd so the average is symmetric. Every output is a
    mean of squares, hence nonnegative, and scaling the series by ``a``
    scales the envelope by ``a**2``. ``valid_from = 0``.
    """
    x = _as_series(series)
    w = int(window)
    if w < 1 or w % 2 == 0 or w > x.size:
        raise InvalidWindow(f"window must be odd, in [1, {x.size}]; got {w}")
    h = (w - 1) // 2
    s2 = _prefix(x * x)
    T = x.size
    k = np.arange(T)
    lo = np.maximum(k - h, 0)
    hi = np.minimum(k + h + 1, T)
    values = (s2[hi] - s2[lo]) / (hi - lo)
    return IndexSeries(values, valid_from=0, name="energy_envelope", meta={"window": w})


def cumulant_tracking(series, window=DEFAULT_CUMULANT_WINDOW, order=DEFAULT_CUMULANT_ORDER):
    """Magnitude of one sample cumulant over a trailing window.

    order 1: |mean|; order 2: biased variance; order 3: third central moment
    magnitude; order 4: |m4 - 3 m2^2| (excess-kurtosis numerator, zero in
    expectation for Gaussian data). ``valid_from = window - 1``.
    """
    x = _as_series(series)
    w = int(window)
    order = int(order)
    if order not in (1, 2, 3, 4):
        raise ValueError("order must be 1, 2, 3 or 4")
    if not 1 <= w <= x.size:
        raise InvalidWindow(f"window {w} outside [1, {x.size}]")
    if order >= 3 and w < 8:
        raise InvalidWindow("windows shorter than 8 are too noisy for order >= 3")
    T = x.size
    k = np.arange(w - 1, T)
    a = k - w + 1
    s1 = _prefix(x)
    mu = (s1[k + 1] - s1[a]) / w
    if order == 1:
        core = mu
    else:
        s2 = _prefix(x * x)
        m2 = (s2[k + 1] - s2[a]) / w - mu * mu
        if order == 2:
            core = m2
        else:
            s3 = _prefix(x ** 3)
            r3 = (s3[k + 1] - s3[a]) / w
            r2 = (s2[k + 1] - s2[a]) / w
            if order == 3:
                core = r3 - 3.0 * mu * r2 + 2.0 * mu ** 3
            else:
                s4 = _prefix(x ** 4)
                r4 = (s4[k + 1] - s4[a]) / w
                m4 = r4 - 4.0 * mu * r3 + 6.0 * mu * mu * r2 - 3.0 * mu ** 4
                core = m4 - 3.0 * m2 * m2
    values = np.zeros(T)
    values[w - 1:] = np.abs(core)
    return IndexSeries(
        values, valid_from=w - 1, name=f"cumulant_{order}", meta={"window": w, "order": order}
    )


# ---------------------------------------------------------------------------
# Adaptive-separation drift detector
# ---------------------------------------------------------------------------

def prewhiten(record, reg_eps=0.0):
    """Decorrelate a record by the inverse Cholesky factor of its covariance.

    The output has identity sample covariance, the canonical input scaling
    for :func:`easi_index` (whose update already contains the ``y y^T - I``
    whitening term, so any leftover global correlation would dominate the
    index). ``reg_eps`` adds a relative ridge before factoring for
    rank-deficient records.
    """
    if not isinstance(record, Record):
        record = Record(record)
    cov = np.cov(record.samples, ddof=1)
    cov = np.atleast_2d(cov)
    if reg_eps:
        cov = cov + float(reg_eps) * np.trace(cov) / cov.shape[0] * np.eye(cov.shape[0])
    L = cholesky(SymMatrix(cov))
    return Record(_kernels.solve_lower(L, record.samples), record.sample_rate_hz)


def easi_index(record, step=DEFAULT_EASI_STEP, nonlinearity="cubic"):
    """Update-norm index of an equivariant adaptive separator.

    Runs the relative-gradient recursion ``W <- W - step * H(y) W`` with
    ``y = W x`` and ``H(y) = y y^T - I + g(y) y^T - y g(y)^T``, starting from
    the identity, and emits ``||H(y_k)||_F`` per sample. On stationary,
    pre-scaled input the index settles; moving mixture statistics keep it
    elevated. Callers should feed channels scaled to unit variance.

    Parameters
    ----------
    record : Record
        At least 2 channels.
    step : float
        Positive adaptation step.
    nonlinearity : {"cubic", "tanh"}
        ``g`` in the update; cubic suits sub-Gaussian sources.

    Returns
    -------
    IndexSeries
        ``valid_from = 0``.

    Raises
    ------
    Diverged
        If any ``|W|`` entry exceeds 1e6; the failing step is reported.
    """
    if not isinstance(record, Record):
        record = Record(record)
    if record.channels < 2:
        raise ShapeMismatch("adaptive separation needs at least 2 channels")
    if not step > 0:
        raise ValueError("step must be positive")
    if nonlinearity not in ("cubic", "tanh"):
        raise ValueError("nonlinearity must be 'cubic' or 'tanh'")
    xt = np.ascontiguousarray(record.samples.T)
    nl = 0 if nonlinearity == "cubic" else 1
    values, _W, status, where = _kernels.easi_scan(xt, float(step), nl, EASI_DIVERGENCE_CAP)
    if status:
        raise Diverged(f"separator weights left [-1e6, 1e6] at step {where}", at=where)
    return IndexSeries(
        values,
        valid_from=0,
        name="easi",
        meta={"step": float(step), "nonlinearity": nonlinearity},
    )


# ---------------------------------------------------------------------------
# Autoregressive-coefficient drift detector
# ---------------------------------------------------------------------------

def ar_tracking(series, window=DEFAULT_AR_WINDOW, ar_order=DEFAULT_AR_ORDER):
    """Drift of trailing-window AR coefficients between offset windows.

    Each trailing window of length ``w`` is demeaned, its biased
    autocovariances are fed through the Levinson-Durbin recursion, and the
    index is the Euclidean distance between the coefficient vectors at ``k``
    and ``k - hop`` with ``hop = max(w // 4, 1)``. Windows with (numerically)
    zero power or a collapsing prediction error cannot be fitted; they emit 0
    and are counted in ``meta["singular_windows"]``.

    Returns
    -------
    IndexSeries
        ``valid_from = w - 1 + hop``.
    """
    x = _as_series(series)
    w = int(window)
    q = int(ar_order)
    if q < 1:
        raise InvalidWindow("ar_order must be >= 1")
    if w < 4 * q:
        raise InvalidWindow(f"window {w} shorter than 4 * ar_order = {4 * q}")
    if w > x.size:
        raise InvalidWindow(f"window {w} longer than the series ({x.size})")
    hop = max(w // 4, 1)
    start = w - 1 + hop
    if start >= x.size:
        raise InvalidWindow("series leaves no room for coefficient tracking after warm-up")
    coef, ok = _kernels.ar_sliding(x, w, q, 1e-300)
    T = x.size
    values = np.zeros(T)
    k = np.arange(start, T)
    both = (ok[k] == 1) & (ok[k - hop] == 1)
    diff = coef[k] - coef[k - hop]
    values[k[both]] = np.sqrt(np.sum(diff[both] * diff[both], axis=1))
    singular = int(np.sum(ok[w - 1:] == 0))
    return IndexSeries(
        values,
        valid_from=start,
        name="ar_tracking",
        meta={"window": w, "order": q, "hop": hop, "singular_windows": singular},
    )


# ---------------------------------------------------------------------------
# State-space innovation-whiteness detector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateSpaceModel:
    """Linear time-invariant state-space model ``x' = F x + w``, ``z = H x + v``.

    Noise covariances must be symmetric positive semidefinite; a singular
    observation-noise covariance is tolerated (the filter floors it, see
    :func:`kalman_innovation_index`).
    """

    transition: np.ndarray
    observation: np.ndarray
    process_noise_cov: SymMatrix
    obs_noise_cov: SymMatrix
    init_state: np.ndarray
    init_cov: SymMatrix

    def __post_init__(self):
        F = np.ascontiguousarray(self.transition, dtype=np.float64)
        H = np.ascontiguousarray(self.observation, dtype=np.float64)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise ModelMismatch("transition must be square")
        s = F.shape[0]
        if H.ndim != 2 or H.shape[1] != s:
            raise ModelMismatch("observation must be (obs_dim, state_dim)")
        m = H.shape[0]
        Q = self.process_noise_cov if isinstance(self.process_noise_cov, SymMatrix) else SymMatrix(self.process_noise_cov)
        R = self.obs_noise_cov if isinstance(self.obs_noise_cov, SymMatrix) else SymMatrix(self.obs_noise_cov)
        P0 = self.init_cov if isinstance(self.init_cov, SymMatrix) else SymMatrix(self.init_cov)
        if Q.dim != s or P0.dim != s:
            raise ModelMismatch("process_noise_cov and init_cov must match state_dim")
        if R.dim != m:
            raise ModelMismatch("obs_noise_cov must match obs_dim")
        x0 = np.ascontiguousarray(self.init_state, dtype=np.float64).reshape(-1)
        if x0.size != s:
            raise ModelMismatch("init_state must match state_dim")
        for name, c in (("process_noise_cov", Q), ("obs_noise_cov", R), ("init_cov", P0)):
            scale = max(float(np.abs(c.entries).max()), 1.0)
            if sym_eig(c).values[0] < -1e-10 * scale:
                raise ModelMismatch(f"{name} is not positive semidefinite")
        object.__setattr__(self, "transition", F)
        object.__setattr__(self, "observation", H)
        object.__setattr__(self, "process_noise_cov", Q)
        object.__setattr__(self, "obs_noise_cov", R)
        object.__setattr__(self, "init_state", x0)
        object.__setattr__(self, "init_cov", P0)

    @property
    def state_dim(self):
        return self.transition.shape[0]

    @property
    def obs_dim(self):
        return self.observation.shape[0]


def _floored_obs_noise(model):
    """Observation noise, ridged minimally when it is not positive definite."""
    R = model.obs_noise_cov.entries
    try:
        cholesky(R)
        return R
    except NotPositiveDefinite:
        m = R.shape[0]
        eps = 1e-12 * max(
            float(np.trace(R)) / m,
            float(np.trace(model.init_cov.entries)) / model.state_dim,
            1.0,
        )
        return R + eps * np.eye(m)


def normalized_innovations(record, model):
    """Normalized squared innovations ``e_k = i_k^T S_k^{-1} i_k`` of a filter run.

    For data that actually follows the model, ``e`` has mean ``obs_dim`` and
    no serial correlation; bursts that leave the model inflate and correlate
    it. Raises :class:`NotPositiveDefinite` if an innovation covariance loses
    definiteness mid-run.
    """
    if not isinstance(record, Record):
        record = Record(record)
    if model.obs_dim != record.channels:
        raise ModelMismatch(
            f"model observes {model.obs_dim} channels, record has {record.channels}"
        )
    R = np.ascontiguousarray(_floored_obs_noise(model))
    zt = np.ascontiguousarray(record.samples.T)
    e, status, where = _kernels.kalman_scan(
        zt,
        model.transition,
        model.observation,
        np.ascontiguousarray(model.process_noise_cov.entries),
        R,
        model.init_state,
        np.ascontiguousarray(model.init_cov.entries),
    )
    if status:
        raise NotPositiveDefinite(f"innovation covariance lost definiteness at step {where}")
    return e


def kalman_innovation_index(record, model, window=DEFAULT_WHITENESS_WINDOW):
    """Innovation-whiteness index: trailing mean of ``e`` plus |lag-1 autocorr|.

    ``e`` are the normalized squared innovations of the model run on the
    record. Each output combines the trailing-window mean of ``e`` with the
    magnitude of its lag-1 sample autocorrelation over the same window, so
    both energy excursions and serial structure (either one betrays a model
    mismatch) raise the index. ``valid_from = window - 1``.
    """
    if not isinstance(record, Record):
        record = Record(record)
    w = int(window)
    if not 2 <= w <= record.length:
        raise InvalidWindow(f"window {w} outside [2, {record.length}]")
    e = normalized_innovations(record, model)
    T = e.size
    se = _prefix(e)
    se2 = _prefix(e * e)
    sp = np.empty(T + 1)
    sp[:2] = 0.0
    np.cumsum(e[1:] * e[:-1], out=sp[2:])
    k = np.arange(w - 1, T)
    a = k - w + 1
    mu = (se[k + 1] - se[a]) / w
    den = se2[k + 1] - se2[a] - w * mu * mu
    num = (sp[k + 1] - sp[a + 1]) - mu * ((se[k + 1] - se[a + 1]) + (se[k] - se[a])) + (w - 1) * mu * mu
    rho = np.divide(num, den, out=np.zeros_like(num), where=den > 1e-300)
    values = np.zeros(T)
    values[w - 1:] = mu + np.abs(rho)
    return IndexSeries(values, valid_from=w - 1, name="innovation", meta={"window": w})


def fit_ar1_state_space(record, obs_noise_frac=1e-3):
    """Fit a first-order vector-autoregressive state-space model to a record.

    A matched background model for the innovation detector when nothing
    better is known: least-squares one-step transition on the centered data,
    process noise from the fit residuals, a small diagonal observation noise
    sized by ``obs_noise_frac`` of the mean channel variance.
    """
    if not isinstance(record, Record):
        record = Record(record)
    if record.length < record.channels + 2:
        raise ShapeMismatch("record too short to fit a transition")
    X = record.samples - record.samples.mean(axis=1, keepdims=True)
    X0 = X[:, :-1]
    X1 = X[:, 1:]
    Tm1 = X0.shape[1]
    C0 = SymMatrix(X0 @ X0.T / Tm1)
    C01 = X0 @ X1.T / Tm1
    n = record.channels
    try:
        L = cholesky(C0)
    except NotPositiveDefinite:
        L = cholesky(SymMatrix(C0.entries + 1e-9 * max(np.trace(C0.entries) / n, 1.0) * np.eye(n)))
    Ft = _kernels.solve_lower_t(L, _kernels.solve_lower(L, np.ascontiguousarray(C01)))
    F = np.ascontiguousarray(Ft.T)
    resid = X1 - F @ X0
    Q = SymMatrix(resid @ resid.T / max(Tm1 - 1, 1))
    mean_var = float(np.mean(np.var(record.samples, axis=1)))
    R = SymMatrix(max(obs_noise_frac * mean_var, 1e-12) * np.eye(n))
    P0 = SymMatrix(X @ X.T / record.length)
    return StateSpaceModel(
        transition=F,
        observation=np.eye(n),
        process_noise_cov=Q,
        obs_noise_cov=R,
        init_state=record.samples.mean(axis=1),
        init_cov=P0,
    )


# ---------------------------------------------------------------------------
# Reference-channel trigger and normalization
# ---------------------------------------------------------------------------

def reference_trigger_index(record, ref_channel=0, window=DEFAULT_ENVELOPE_WINDOW):
    """Energy envelope of a designated reference channel."""
    if not isinstance(record, Record):
        record = Record(record)
    ch = int(ref_channel)
    if not 0 <= ch < record.channels:
        raise BadChannel(f"channel {ch} outside [0, {record.channels})")
    idx = energy_envelope(record.channel(ch), window)
    return IndexSeries(
        idx.values,
        valid_from=idx.valid_from,
        name=f"reference_ch{ch}",
        meta={"window": int(window), "channel": ch},
    )


def normalize_index(idx):
    """Scale an index so its largest valid magnitude is 1 (no-op on all-zero)."""
    scale = float(np.abs(idx.valid_values()).max())
    values = idx.values / scale if scale > 0 else idx.values.copy()
    meta = dict(idx.meta)
    meta["scale"] = scale
    return IndexSeries(values, valid_from=idx.valid_from, name=idx.name + "_norm", meta=meta)
