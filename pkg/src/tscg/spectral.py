"""Frequency-domain transforms: normalized DFT, blocked averaged periodogram,
and the blocked Whittle log-likelihood.

Stacks of p x p Hermitian matrices are stored as complex arrays of shape
(M, p, p); slice ``j`` of the array is the matrix at the j-th central
frequency (0-based here, 1-based in the math).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, InvalidInputError

__all__ = [
    "TimeSeriesPanel",
    "FrequencyGrid",
    "DftFrame",
    "HermitianStack",
    "dft",
    "idft",
    "make_grid",
    "averaged_periodogram",
    "whittle_loglik",
    "hermitize",
]


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return (a + a^H)/2 applied to the last two axes."""
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeriesPanel:
    """A T x p real observation matrix (rows are time points).

    Odd-length input is made even by dropping the first observation.
    """

    data: np.ndarray
    names: Optional[tuple] = None

    def __post_init__(self):
        x = np.asarray(self.data, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise InvalidInputError(f"panel must be 2-D (T x p), got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            bad = np.argwhere(~np.isfinite(x))[0]
            raise InvalidInputError(
                f"panel contains non-finite value at row {bad[0]}, column {bad[1]}"
            )
        if x.shape[0] % 2 == 1:
            warnings.warn(
                f"odd series length T={x.shape[0]}; dropping the first observation",
                stacklevel=3,
            )
            x = x[1:]
        if x.shape[0] < 2:
            raise InvalidInputError(f"need at least 2 time points, got {x.shape[0]}")
        names = self.names
        if names is None:
            names = tuple(f"x{k + 1}" for k in range(x.shape[1]))
        else:
            names = tuple(str(n) for n in names)
            if len(names) != x.shape[1]:
                raise InvalidInputError(
                    f"{len(names)} column names for {x.shape[1]} columns"
                )
        object.__setattr__(self, "data", _frozen(x))
        object.__setattr__(self, "names", names)

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def centered(self) -> "TimeSeriesPanel":
        return TimeSeriesPanel(self.data - self.data.mean(axis=0), self.names)

    def standardized(self) -> "TimeSeriesPanel":
        x = self.data - self.data.mean(axis=0)
        sd = x.std(axis=0)
        if np.any(sd == 0):
            k = int(np.argmin(sd))
            raise InvalidInputError(f"column {self.names[k]!r} is constant; cannot standardize")
        return TimeSeriesPanel(x / sd, self.names)


@dataclass(frozen=True)
class FrequencyGrid:
    T: int
    m: int
    M: int
    central_indices: tuple
    central_freqs: np.ndarray = field(repr=False)

    def block_indices(self, j: int) -> np.ndarray:
        """Fourier indices of the 0-based block ``j``."""
        c = self.central_indices[j]
        return np.arange(c - self.m, c + self.m + 1)


@dataclass(frozen=True)
class DftFrame:
    """Normalized DFT coefficients.

    ``coeffs[j]`` holds d_x(omega_j) for j = 0..T-1, where row 0 stands for
    j = T (omega_T = 2*pi is the same frequency as 0).
    """

    coeffs: np.ndarray

    @property
    def T(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p(self) -> int:
        return self.coeffs.shape[1]

    def at(self, j) -> np.ndarray:
        return self.coeffs[np.asarray(j) % self.T]


@dataclass(frozen=True)
class HermitianStack:
    """M slices of p x p Hermitian matrices, symmetrized on construction."""

    slices: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.slices, dtype=complex)
        if s.ndim == 2:
            s = s[None]
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise InvalidInputError(f"expected (M, p, p) stack, got shape {s.shape}")
        object.__setattr__(self, "slices", _frozen(hermitize(s)))

    @property
    def M(self) -> int:
        return self.slices.shape[0]

    @property
    def p(self) -> int:
        return self.slices.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.slices if dtype is None else self.slices.astype(dtype)

    def __getitem__(self, j):
        return self.slices[j]

    def __len__(self):
        return self.M

    @classmethod
    def identity(cls, p: int, M: int) -> "HermitianStack":
        return cls(np.broadcast_to(np.eye(p), (M, p, p)))

    def inverse(self) -> "HermitianStack":
        return HermitianStack(np.linalg.inv(self.slices))


def dft(panel: TimeSeriesPanel) -> DftFrame:
    """d_x(omega_j) = T^{-1/2} sum_{t=1..T} x_t exp(-i omega_j t)."""
    if not isinstance(panel, TimeSeriesPanel):
        panel = TimeSeriesPanel(panel)
    x = panel.data
    T = x.shape[0]
    j = np.arange(T)
    # numpy sums over t = 0..T-1; the 1-based time index adds one phase factor
    phase = np.exp(-2j * np.pi * j / T)[:, None]
    coeffs = phase * np.fft.fft(x, axis=0) / np.sqrt(T)
    return DftFrame(_frozen(coeffs))


def idft(frame: DftFrame) -> np.ndarray:
    """Inverse of :func:`dft`; returns the real T x p panel."""
    T = frame.T
    j = np.arange(T)
    phase = np.exp(2j * np.pi * j / T)[:, None]
    x = np.fft.ifft(phase * frame.coeffs, axis=0) * np.sqrt(T)
    return x.real


def make_grid(T: int, m: int) -> FrequencyGrid:
    """Blocked layout of the positive Fourier frequencies 1..T/2-1."""
    T = int(T)
    m = int(m)
    if T % 2:
        raise ConfigurationError(f"T must be even, got T={T}")
    if m < 0:
        raise ConfigurationError(f"half-block size must be >= 0, got m={m}")
    M = (T // 2 - 1) // (2 * m + 1)
    if M < 1:
        raise ConfigurationError(
            f"half-block size m={m} leaves no frequency block for T={T} "
            f"(need 2m+1 <= T/2-1 = {T // 2 - 1})"
        )
    centers = tuple(j * (2 * m + 1) - m for j in range(1, M + 1))
    freqs = _frozen(2 * np.pi * np.asarray(centers, dtype=float) / T)
    return FrequencyGrid(T=T, m=m, M=M, central_indices=centers, central_freqs=freqs)


def averaged_periodogram(frame: DftFrame, grid: FrequencyGrid) -> HermitianStack:
    """Average of the 2m+1 periodograms around each central frequency."""
    if grid.T != frame.T:
        raise ConfigurationError(f"grid built for T={grid.T}, DFT has T={frame.T}")
    width = 2 * grid.m + 1
    out = np.empty((grid.M, frame.p, frame.p), dtype=complex)
    for j in range(grid.M):
        d = frame.at(grid.block_indices(j))  # (2m+1, p)
        out[j] = d.T @ d.conj()
    out /= 2 * np.pi * width
    return HermitianStack(out)


def whittle_loglik(theta, fhat) -> float:
    """sum_j [log det Theta_j - tr(Theta_j fhat_j)].

    Raises DomainError if any Theta slice is not positive definite.
    """
    th = np.asarray(theta)
    f = np.asarray(fhat)
    if th.shape != f.shape:
        raise InvalidInputError(f"shape mismatch: theta {th.shape} vs fhat {f.shape}")
    th = hermitize(th)
    ev = np.linalg.eigvalsh(th)
    if np.any(ev <= 0):
        j = int(np.argmin(ev.min(axis=-1)))
        raise DomainError(
            f"theta slice {j} is not positive definite (min eigenvalue {ev[j].min():.3e})"
        )
    logdet = np.log(ev).sum()
    tr = np.einsum("jab,jba->", th, f).real
    return float(logdet - tr)
