"""Zero-mean multimode Gaussian states and the symplectic maps acting on them.

Quadratures are ordered ``(X1, Y1, X2, Y2, ...)`` with ``X = a + a^dag`` and
``Y = -i(a - a^dag)``, so the vacuum covariance matrix is the identity.  The
quadrature at angle ``theta`` is ``X(theta) = a e^{-i theta} + a^dag e^{i theta}
= cos(theta) X + sin(theta) Y``.

Every operation returns a new :class:`GaussianState`; nothing is mutated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9


@dataclass(frozen=True)
class GainParam:
    """Squeeze strength of a parametric process.

    ``strength`` is the conjugate-coupling amplitude (``nu`` for a source PA,
    ``g`` for a PSA) and ``conj_amplitude`` the direct amplitude
    ``sqrt(1 + strength**2)`` (``mu`` or ``G``).  ``phase`` multiplies the
    conjugate term as ``e^{i phase}``: 0 amplifies, pi de-amplifies.
    """

    strength: float
    phase: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.strength) or self.strength < 0:
            raise ValueError(f"gain strength must be finite and >= 0, got {self.strength!r}")
        if not math.isfinite(self.phase):
            raise ValueError(f"gain phase must be finite, got {self.phase!r}")

    @property
    def conj_amplitude(self) -> float:
        return math.sqrt(1.0 + self.strength**2)

    @classmethod
    def deamplifying(cls, strength: float) -> "GainParam":
        return cls(strength, math.pi)

    @property
    def is_deamplifying(self) -> bool:
        return math.isclose(math.cos(self.phase), -1.0, abs_tol=1e-12)


@dataclass(frozen=True)
class LossChannel:
    """Beamsplitter loss of reflectivity ``reflectivity``; vacuum enters the free port."""

    reflectivity: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.reflectivity <= 1.0):
            raise ValueError(f"loss reflectivity must lie in [0, 1], got {self.reflectivity!r}")


@dataclass(frozen=True)
class QuadratureSelector:
    mode: int
    angle: float = 0.0


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix of a zero-mean Gaussian state, vacuum = identity."""

    cov: np.ndarray

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float, copy=True)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 or cov.shape[0] == 0:
            raise ValueError(f"covariance must be a non-empty 2N x 2N matrix, got shape {cov.shape}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def block(self, mode: int) -> np.ndarray:
        _check_mode(self, mode)
        return self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes})"


@dataclass(frozen=True)
class PhysicalityReport:
    symmetry_defect: float
    min_eigenvalue: float
    ok: bool = field(default=False)


def _check_mode(state: GaussianState, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode!r} out of range for a {state.n_modes}-mode state")


def _check_pair(state: GaussianState, mode_a: int, mode_b: int) -> None:
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ValueError("a two-mode operation needs two distinct modes")


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_state(n_modes: int) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    return GaussianState(np.eye(2 * n_modes))


def bogoliubov_symplectic(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Real symplectic matrix for ``a_out = A a + B a^dag`` in xpxp ordering.

    With ``a = (X + iY)/2`` the output quadratures are
    ``X' = Re(A+B) X - Im(A-B) Y`` and ``Y' = Im(A+B) X + Re(A-B) Y``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    n = A.shape[0]
    S = np.zeros((2 * n, 2 * n))
    P, M = A + B, A - B
    S[0::2, 0::2] = P.real
    S[0::2, 1::2] = -M.imag
    S[1::2, 0::2] = P.imag
    S[1::2, 1::2] = M.real
    return S


def embed(S_local: np.ndarray, modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Lift a symplectic acting on ``modes`` to the full ``n_modes`` system."""
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    S = np.eye(2 * n_modes)
    S[np.ix_(idx, idx)] = S_local
    return S


def two_mode_squeezer(gain: GainParam) -> np.ndarray:
    """4x4 symplectic of ``a1 -> C a1 + s e^{i phase} a2^dag`` (and 1 <-> 2)."""
    c, s = gain.conj_amplitude, gain.strength
    e = s * np.exp(1j * gain.phase)
    A = np.array([[c, 0.0], [0.0, c]])
    B = np.array([[0.0, e], [e, 0.0]])
    return bogoliubov_symplectic(A, B)


def single_mode_squeezer(gain: GainParam) -> np.ndarray:
    return bogoliubov_symplectic([[gain.conj_amplitude]], [[gain.strength * np.exp(1j * gain.phase)]])


def rotation(angle: float) -> np.ndarray:
    """Symplectic of ``a -> e^{i angle} a``."""
    return bogoliubov_symplectic([[np.exp(1j * angle)]], [[0.0]])


def apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    return GaussianState(S @ state.cov @ S.T)


def apply_two_mode_pa(state: GaussianState, mode_a: int, mode_b: int, gain: GainParam) -> GaussianState:
    _check_pair(state, mode_a, mode_b)
    if gain.strength == 0.0:
        return state
    return apply_symplectic(state, embed(two_mode_squeezer(gain), [mode_a, mode_b], state.n_modes))


# A non-degenerate PSA has the same input-output form as the source PA; only the
# role (and typically the phase) differs.
apply_nondegenerate_psa = apply_two_mode_pa


def apply_degenerate_psa(state: GaussianState, mode: int, gain: GainParam) -> GaussianState:
    """``a -> G a + g e^{i phase} a^dag``.  The amplified quadrature sits at angle phase/2."""
    _check_mode(state, mode)
    if gain.strength == 0.0:
        return state
    return apply_symplectic(state, embed(single_mode_squeezer(gain), [mode], state.n_modes))


def apply_phase(state: GaussianState, mode: int, angle: float) -> GaussianState:
    _check_mode(state, mode)
    if angle == 0.0:
        return state
    return apply_symplectic(state, embed(rotation(angle), [mode], state.n_modes))


def apply_beamsplitter(state: GaussianState, mode_a: int, mode_b: int, reflectivity: float) -> GaussianState:
    """Lossless mixer ``a -> t a + r b``, ``b -> t b - r a`` with ``r^2 = reflectivity``."""
    _check_pair(state, mode_a, mode_b)
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {reflectivity!r}")
    r = math.sqrt(reflectivity)
    t = math.sqrt(1.0 - reflectivity)
    S = bogoliubov_symplectic([[t, r], [-r, t]], np.zeros((2, 2)))
    return apply_symplectic(state, embed(S, [mode_a, mode_b], state.n_modes))


def apply_loss(state: GaussianState, mode: int, loss: LossChannel | float) -> GaussianState:
    """Mix ``mode`` with vacuum: ``a -> sqrt(1-L) a + sqrt(L) v``."""
    if not isinstance(loss, LossChannel):
        loss = LossChannel(float(loss))
    _check_mode(state, mode)
    L = loss.reflectivity
    if L == 0.0:
        return state
    t = np.ones(2 * state.n_modes)
    t[2 * mode : 2 * mode + 2] = math.sqrt(1.0 - L)
    cov = state.cov * np.outer(t, t)
    cov[2 * mode, 2 * mode] += L
    cov[2 * mode + 1, 2 * mode + 1] += L
    return GaussianState(cov)


def _direction(n_modes: int, terms) -> np.ndarray:
    v = np.zeros(2 * n_modes)
    for sel, weight in terms:
        if not 0 <= sel.mode < n_modes:
            raise IndexError(f"mode {sel.mode!r} out of range for a {n_modes}-mode state")
        v[2 * sel.mode] += weight * math.cos(sel.angle)
        v[2 * sel.mode + 1] += weight * math.sin(sel.angle)
    return v


def quad_variance(state: GaussianState, sel: QuadratureSelector) -> float:
    _check_mode(state, sel.mode)
    u = _direction(state.n_modes, [(sel, 1.0)])
    return float(u @ state.cov @ u)


def linear_combo_variance(state: GaussianState, terms: Sequence[tuple[QuadratureSelector, float]]) -> float:
    """Variance of ``sum_i w_i X_{m_i}(theta_i)``."""
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combo_variance needs at least one term")
    v = _direction(state.n_modes, terms)
    return float(v @ state.cov @ v)


def mean_photon_number(state: GaussianState, mode: int) -> float:
    """``<a^dag a> = (Var X + Var Y)/4 - 1/2`` for a zero-mean state."""
    b = state.block(mode)
    return float((b[0, 0] + b[1, 1]) / 4.0 - 0.5)


def check_physicality(state: GaussianState) -> PhysicalityReport:
    cov = np.asarray(state.cov)
    scale = max(1.0, float(np.max(np.abs(cov))))
    sym = float(np.max(np.abs(cov - cov.T))) / scale
    herm = 0.5 * (cov + cov.T) + 1j * symplectic_form(state.n_modes)
    min_eig = float(np.min(np.linalg.eigvalsh(herm)))
    ok = sym <= SYMMETRY_TOL and min_eig >= -UNCERTAINTY_TOL * scale
    return PhysicalityReport(sym, min_eig, ok)
