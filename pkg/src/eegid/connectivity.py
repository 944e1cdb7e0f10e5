"""Bivariate functional-connectivity metrics and matrix assembly.

Three metrics are supported: Pearson correlation of the band-filtered time
series, and the two phase metrics (phase locking value, phase lag index)
computed from the instantaneous phase of the analytic signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import BandSpec, Epoch
from .errors import DegenerateVariance, EpochTooShort, LengthMismatch

METRICS = ("COR", "PLV", "PLI")


@dataclass(frozen=True)
class PhaseSeries:
    """Instantaneous phase (radians) per channel and sample."""

    phases: np.ndarray  # N_ch x M, values in (-pi, pi]


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Symmetric pairwise edge-weight matrix for one epoch and one metric."""

    metric: str
    values: np.ndarray  # N_ch x N_ch, zero diagonal
    band: BandSpec
    subject_id: str = ""
    dataset_id: str = ""
    condition: str = ""
    epoch_index: int = 0

    @property
    def n_channels(self):
        return self.values.shape[0]

    @property
    def label(self):
        return f"{self.dataset_id}/{self.subject_id}"


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    feature_kind: str  # "fc_upper_triangle" | "graph_metric"

    @property
    def dimension(self):
        return self.values.shape[0]


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Analytic signal via the frequency-domain (one-sided spectrum) method.

    The transform runs at the next power of two >= M with zero padding and is
    truncated back to M, which slightly perturbs edge phases.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m = x.shape[-1]
    nfft = 1 << (m - 1).bit_length()
    spectrum = np.fft.fft(x, n=nfft, axis=-1)
    h = np.zeros(nfft)
    h[0] = 1.0
    if nfft % 2 == 0:
        h[nfft // 2] = 1.0
        h[1:nfft // 2] = 2.0
    else:
        h[1:(nfft + 1) // 2] = 2.0
    return np.fft.ifft(spectrum * h, axis=-1)[..., :m]


def analytic_phase(epoch: Epoch) -> PhaseSeries:
    """Per-channel instantaneous phase of an epoch.

    Zero-valued analytic samples get phase 0 rather than NaN so a flat
    channel cannot poison a whole connectivity matrix.
    """
    if epoch.n_samples < 8:
        raise EpochTooShort(f"epoch of {epoch.n_samples} samples; need >= 8")
    z = analytic_signal(epoch.data)
    phases = np.angle(z)
    phases[z == 0] = 0.0
    return PhaseSeries(phases=phases)


def _check_lengths(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} and {y.shape} differ")
    return x, y


def pearson_correlation(x, y) -> float:
    """Pearson correlation with population (1/M) normalization, clamped to [-1, 1]."""
    x, y = _check_lengths(x, y)
    if x.size < 2:
        raise LengthMismatch("need at least two samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.mean(xc * xc))
    sy = np.sqrt(np.mean(yc * yc))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVariance("constant input vector")
    rho = np.mean(xc * yc) / (sx * sy)
    return float(np.clip(rho, -1.0, 1.0))


def wrap_phase(d: np.ndarray) -> np.ndarray:
    """Wrap phase differences into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(d, dtype=float), 2 * np.pi)


def plv(phi_x, phi_y) -> float:
    """Phase locking value: |mean unit phasor of the phase differences|."""
    phi_x, phi_y = _check_lengths(phi_x, phi_y)
    if phi_x.size < 1:
        raise LengthMismatch("need at least one sample")
    value = np.abs(np.mean(np.exp(1j * (phi_x - phi_y))))
    return float(min(value, 1.0))


def pli(phi_x, phi_y) -> float:
    """Phase lag index: |mean sign of the wrapped phase differences|."""
    phi_x, phi_y = _check_lengths(phi_x, phi_y)
    if phi_x.size < 1:
        raise LengthMismatch("need at least one sample")
    d = wrap_phase(phi_x - phi_y)
    return float(np.abs(np.mean(np.sign(d))))


def connectivity_matrix(epoch: Epoch, metric: str) -> ConnectivityMatrix:
    """All-pairs connectivity for one epoch; symmetric with zero diagonal."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    n = epoch.n_channels
    mm = epoch.n_samples
    if metric == "COR":
        centered = epoch.data - epoch.data.mean(axis=1, keepdims=True)
        stds = np.sqrt(np.mean(centered * centered, axis=1))
        flat = np.flatnonzero(stds == 0.0)
        if flat.size:
            raise DegenerateVariance(
                f"constant channel(s) {flat.tolist()} in epoch "
                f"{epoch.epoch_index} [{epoch.label}]"
            )
        values = (centered @ centered.T) / (mm * np.outer(stds, stds))
        values = np.clip(values, -1.0, 1.0)
    elif metric == "PLV":
        phases = analytic_phase(epoch).phases
        z = np.exp(1j * phases)
        values = np.abs(z @ z.conj().T) / mm
        values = np.minimum(values, 1.0)
    else:  # PLI
        phases = analytic_phase(epoch).phases
        values = np.zeros((n, n))
        for m in range(n - 1):
            d = wrap_phase(phases[m][None, :] - phases[m + 1:])
            values[m, m + 1:] = np.abs(np.mean(np.sign(d), axis=1))
        values = values + values.T
    values = values.copy()
    np.fill_diagonal(values, 0.0)
    # mirror the upper triangle exactly so symmetry holds bit for bit
    iu = np.triu_indices(n, k=1)
    sym = np.zeros((n, n))
    sym[iu] = values[iu]
    values = sym + sym.T
    return ConnectivityMatrix(
        metric=metric,
        values=values,
        band=epoch.band,
        subject_id=epoch.subject_id,
        dataset_id=epoch.dataset_id,
        condition=epoch.condition,
        epoch_index=epoch.epoch_index,
    )


def upper_triangle_index_map(n: int) -> list:
    """(m, k) channel pair for every position of the vectorized features."""
    return [(m, k) for m in range(n) for k in range(m + 1, n)]


def vectorize_upper(cm: ConnectivityMatrix) -> FeatureVector:
    """Row-major strict upper triangle as a feature vector of N(N-1)/2 values."""
    iu = np.triu_indices(cm.n_channels, k=1)
    return FeatureVector(values=cm.values[iu].copy(), feature_kind="fc_upper_triangle")
