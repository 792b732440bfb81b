"""Pulsed (temporal Schmidt-mode) entanglement and its measurement.

A pulse-pumped PA factorizes into independent two-mode squeezers, one per
Schmidt pair ``(A_j, B_j)`` with gains ``(mu_j, nu_j)``.  A pulsed local
oscillator overlaps the pairs with complex weights ``xi_j`` (field 1) and
``zeta_j`` (field 2).  The PSA-assisted evaluators are large-gain expressions;
they raise :class:`HighGainApproximationWarning` when the leading PSA mode gain
``G_1`` is below 3.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian_core import GainParam

NORM_TOL = 1e-10
DEFECT_TOL = 1e-6
HIGH_GAIN_THRESHOLD = 3.0


class HighGainApproximationWarning(UserWarning):
    """A large-gain formula was evaluated outside its range of validity."""


@dataclass(frozen=True, eq=False)
class ModeLadder:
    """Schmidt weights ``r_j`` (strictly descending, ``sum r_j^2 = 1``) and pump strength."""

    weights: np.ndarray
    pump_strength: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.weights, dtype=float).ravel()
        if r.size == 0 or np.any(r <= 0):
            raise ValueError("ladder weights must be a non-empty sequence of positive numbers")
        if np.any(np.diff(r) >= 0):
            raise ValueError("ladder weights must be strictly descending")
        if abs(float(np.sum(r**2)) - 1.0) > NORM_TOL:
            raise ValueError(f"ladder weights must satisfy sum r_j^2 = 1, got {np.sum(r**2)!r}")
        if not (math.isfinite(self.pump_strength) and self.pump_strength >= 0):
            raise ValueError("pump_strength must be finite and >= 0")
        r.setflags(write=False)
        object.__setattr__(self, "weights", r)

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True, eq=False)
class MultimodeGains:
    """Per-mode amplitude pairs; ``conj`` is mu_j (or G_j), ``strength`` nu_j (or g_j)."""

    conj: np.ndarray
    strength: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.conj, dtype=float).ravel()
        s = np.asarray(self.strength, dtype=float).ravel()
        if c.shape != s.shape or c.size == 0:
            raise ValueError("gain sequences must be non-empty and of equal length")
        if np.any(s < 0):
            raise ValueError("mode gains must be non-negative")
        if np.max(np.abs(c**2 - s**2 - 1.0) / np.maximum(1.0, c**2)) > 1e-12:
            raise ValueError("each mode needs mu_j^2 - nu_j^2 = 1")
        if np.any(np.diff(c) > 1e-12 * c[:-1]):
            raise ValueError("mode gains must be ordered with mu_1 >= mu_2 >= ...")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "conj", c)
        object.__setattr__(self, "strength", s)

    @classmethod
    def from_strengths(cls, strengths: Sequence[float]) -> "MultimodeGains":
        s = np.asarray(strengths, dtype=float)
        return cls(np.sqrt(1.0 + s**2), s)

    @classmethod
    def from_squeezing(cls, squeezing: Sequence[float]) -> "MultimodeGains":
        """Gains ``(cosh s_j, sinh s_j)`` from squeezing parameters."""
        s = np.asarray(squeezing, dtype=float)
        return cls(np.cosh(s), np.sinh(s))

    def __len__(self):
        return self.conj.size

    def mode(self, j: int) -> GainParam:
        return GainParam(float(self.strength[j]))


@dataclass(frozen=True, eq=False)
class LOOverlap:
    """Mode-matching coefficients of the two local oscillators.

    ``xi`` and ``zeta`` may fall short of unit norm (an incomplete mode set);
    :attr:`normalization_defect` reports by how much.
    """

    xi: np.ndarray
    zeta: np.ndarray
    phi0: float = 0.0
    psi0: float = 0.0

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex).ravel()
        zeta = np.asarray(self.zeta, dtype=complex).ravel()
        for name, v in (("xi", xi), ("zeta", zeta)):
            if np.sum(np.abs(v) ** 2) > 1.0 + NORM_TOL:
                raise ValueError(f"sum |{name}_j|^2 exceeds 1")
        n = max(xi.size, zeta.size)
        xi, zeta = _pad(xi, n), _pad(zeta, n)
        xi.setflags(write=False)
        zeta.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "zeta", zeta)

    def __len__(self):
        return self.xi.size

    @property
    def theta(self) -> np.ndarray:
        return np.angle(self.xi)

    @property
    def theta_prime(self) -> np.ndarray:
        return np.angle(self.zeta)

    @property
    def normalization_defect(self) -> float:
        return float(max(1.0 - np.sum(np.abs(self.xi) ** 2), 1.0 - np.sum(np.abs(self.zeta) ** 2), 0.0))

    def with_common_phase(self, offset: float) -> "LOOverlap":
        return LOOverlap(self.xi, self.zeta, self.phi0 + offset, self.psi0)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Sampled spectra on a uniform frequency grid.

    ``phi`` and ``psi`` hold one mode function per row.
    """

    omega: np.ndarray
    lo_a: np.ndarray
    lo_b: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float).ravel()
        if omega.size < 2:
            raise ValueError("frequency grid needs at least two samples")
        steps = np.diff(omega)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ValueError("frequency grid must be uniform and increasing")
        arrays = {}
        for name in ("lo_a", "lo_b", "phi", "psi"):
            a = np.asarray(getattr(self, name), dtype=complex)
            a = a.reshape(1, -1) if name in ("phi", "psi") and a.ndim == 1 else a
            if a.shape[-1] != omega.size:
                raise ValueError(f"{name} is sampled on {a.shape[-1]} points, grid has {omega.size}")
            arrays[name] = a
        object.__setattr__(self, "omega", omega)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @property
    def d_omega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def inner(self, f: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Discrete ``int f(w) h*(w) dw`` along the last axis."""
        return np.sum(f * np.conj(h), axis=-1) * self.d_omega

    def norm_defects(self) -> dict[str, float]:
        out = {}
        for name in ("lo_a", "lo_b", "phi", "psi"):
            a = np.atleast_2d(getattr(self, name))
            out[name] = float(np.max(np.abs(self.inner(a, a).real - 1.0)))
        return out


def _pad(v: np.ndarray, n: int, fill=0.0) -> np.ndarray:
    if v.size >= n:
        return v.copy()
    return np.concatenate([v, np.full(n - v.size, fill, dtype=v.dtype)])


def gains_from_ladder(ladder: ModeLadder) -> MultimodeGains:
    """``G_j = cosh(r_j G')``, ``g_j = sinh(r_j G')``."""
    x = ladder.weights * ladder.pump_strength
    return MultimodeGains(np.cosh(x), np.sinh(x))


def overlap_from_spectra(grid: SpectralGrid, phi0: float = 0.0, psi0: float = 0.0) -> LOOverlap:
    """Project the LO spectra onto the supplied mode functions.

    A mode set that does not span the LO leaves ``sum |xi_j|^2 < 1``; the
    shortfall is kept and shows up in :attr:`LOOverlap.normalization_defect`.
    """
    bad = {k: v for k, v in grid.norm_defects().items() if v > 1e-8}
    if bad:
        raise ValueError(f"sampled functions are not unit-normalized: {bad}")
    xi = grid.inner(grid.lo_a, grid.phi)
    zeta = grid.inner(grid.lo_b, grid.psi)
    # discretization can push a complete expansion a hair past unit norm
    for v in (xi, zeta):
        total = np.sum(np.abs(v) ** 2)
        if 1.0 < total <= 1.0 + 1e-8:
            v /= math.sqrt(total)
    return LOOverlap(xi, zeta, phi0, psi0)


def _aligned(gains: MultimodeGains, lo: LOOverlap):
    """Pad gains with vacuum modes and overlaps with zeros to a common length."""
    n = max(len(gains), len(lo))
    mu = _pad(gains.conj, n, 1.0)
    nu = _pad(gains.strength, n, 0.0)
    return mu, nu, _pad(lo.xi, n), _pad(lo.zeta, n)


def _check_defect(lo: LOOverlap) -> None:
    if lo.normalization_defect > DEFECT_TOL:
        raise ValueError(
            f"LO overlaps are incomplete (defect {lo.normalization_defect:.3g}); supply the missing modes"
        )


def multimode_pair_terms(gains: MultimodeGains, lo: LOOverlap) -> np.ndarray:
    """Per-pair ``I_j`` (X-difference plus Y-sum variance) for the given LO phases."""
    _check_defect(lo)
    mu, nu, xi, zeta = _aligned(gains, lo)
    rot = np.exp(-1j * (lo.phi0 + lo.psi0))
    return 2.0 * np.abs(mu * xi - nu * np.conj(zeta) * rot) ** 2 + 2.0 * np.abs(nu * xi - mu * np.conj(zeta) * rot) ** 2


def multimode_traditional_I(gains: MultimodeGains, lo: LOOverlap) -> float:
    """Inseparability seen by two pulsed-LO homodyne detectors, ``(1/2) sum_j I_j``."""
    return float(0.5 * math.fsum(multimode_pair_terms(gains, lo)))


def multimode_phase_sensitivity(
    gains: MultimodeGains, lo: LOOverlap, pump_phase_offsets: Sequence[float]
) -> list[float]:
    """``I^multi`` with the common LO phase ``phi0 + psi0`` shifted by each offset."""
    return [multimode_traditional_I(gains, lo.with_common_phase(d)) for d in pump_phase_offsets]


def below_high_gain(leading_exponent: float) -> bool:
    """True when ``G_1 = cosh(r_1 G')`` is under the large-gain threshold."""
    return float(leading_exponent) < math.acosh(HIGH_GAIN_THRESHOLD)


def _log_cosh(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(x, -x) - math.log(2.0)


def _filtered_average(src_gains: MultimodeGains, psa_ladder: ModeLadder, amp: np.ndarray) -> float:
    n = max(len(src_gains), len(psa_ladder), amp.size)
    mu = _pad(src_gains.conj, n, 1.0)
    nu = _pad(src_gains.strength, n, 0.0)
    amp = _pad(amp, n)
    x = _pad(psa_ladder.weights, n) * psa_ladder.pump_strength
    if below_high_gain(x[0]):
        warnings.warn(
            f"leading PSA gain G_1 = {np.cosh(x[0]):.3g} < {HIGH_GAIN_THRESHOLD}; "
            "the mode-filtering formula assumes G_j >> 1",
            HighGainApproximationWarning,
            stacklevel=3,
        )
    keep = amp > 0
    if not np.any(keep):
        raise ValueError("the LO has no overlap with any mode")
    first = int(np.argmax(keep))
    if first > 0 and np.any(src_gains.strength > 0):
        warnings.warn(
            f"LO misses the fundamental mode; the large-gain limit is set by mode {first + 1}",
            HighGainApproximationWarning,
            stacklevel=3,
        )
    # weights |amp_j|^2 G_j^2 normalized in log space so large pump strengths cannot overflow
    logw = np.full(n, -np.inf)
    logw[keep] = 2.0 * np.log(amp[keep]) + 2.0 * _log_cosh(x[keep])
    w = np.exp(logw - np.max(logw[keep]))
    return float(2.0 * np.sum(w * (mu - nu) ** 2) / np.sum(w))


def multimode_psa_single_I(
    src_gains: MultimodeGains, psa_ladder: ModeLadder, lo: LOOverlap, port: int = 1
) -> float:
    """Inseparability from one BHD behind a high-gain PSA sharing the source's modes."""
    if port not in (1, 2):
        raise ValueError("port must be 1 or 2")
    _check_defect(lo)
    amp = np.abs(lo.xi if port == 1 else lo.zeta)
    return _filtered_average(src_gains, psa_ladder, amp)


def multimode_psa_joint_I(src_gains: MultimodeGains, psa_ladder: ModeLadder, lo: LOOverlap) -> float:
    """Inseparability from the PSA-assisted joint measurement; weights ``(|xi_j|+|zeta_j|)^2 G_j^2``."""
    _check_defect(lo)
    return _filtered_average(src_gains, psa_ladder, np.abs(lo.xi) + np.abs(lo.zeta))


def psa_filter_limit(src_gains: MultimodeGains, lo: LOOverlap, port: int | None = 1) -> float:
    """Large-pump limit ``2 (mu_j - nu_j)^2`` of the first mode the LO sees.

    ``port=None`` uses the joint-measurement weights.
    """
    if port is None:
        amp = np.abs(lo.xi) + np.abs(lo.zeta)
    else:
        amp = np.abs(lo.xi if port == 1 else lo.zeta)
    n = max(len(src_gains), amp.size)
    amp = _pad(amp, n)
    mu = _pad(src_gains.conj, n, 1.0)
    nu = _pad(src_gains.strength, n, 0.0)
    hits = np.flatnonzero(amp > 0)
    if hits.size == 0:
        raise ValueError("the LO has no overlap with any mode")
    j = hits[0]
    return float(2.0 * (mu[j] - nu[j]) ** 2)


def multimode_traditional_report(gains: MultimodeGains, lo: LOOverlap) -> tuple[float, float, float]:
    """``(Var(i1 - i2), Var(i1' + i2'), SNL)`` in units of the LO power."""
    _check_defect(lo)
    mu, nu, xi, zeta = _aligned(gains, lo)
    rot = np.exp(-1j * (lo.phi0 + lo.psi0))
    var = math.fsum(np.abs(mu * xi - nu * np.conj(zeta) * rot) ** 2 + np.abs(nu * xi - mu * np.conj(zeta) * rot) ** 2)
    snl = math.fsum(np.abs(xi) ** 2 + np.abs(zeta) ** 2)
    return var, var, snl
