"""Brute-force truncated Fock-space simulator used to cross-check the Gaussian algebra.

States are stored as a tensor of shape ``(d,)*n_modes + (E,)`` with
``d = n_max + 1``.  The trailing axis indexes an environment: loss couples a
mode to a vacuum ancilla on a beamsplitter and the ancilla is then traced out
by folding it into that axis, so ``rho = sum_e |psi_e><psi_e|``.

Nothing here touches covariance matrices; every map is the exponential of a
quadratic generator in the truncated ladder-operator representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

CUTOFF_POPULATION_TOL = 1e-8
MAX_MODES = 3
KINDS = ("two_mode_squeeze", "single_mode_squeeze", "beamsplitter", "phase")


class CutoffError(RuntimeError):
    """The state has too much weight at the Fock cutoff for moments to be trusted."""


@lru_cache(maxsize=None)
def _ladder(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr").astype(complex)


@lru_cache(maxsize=None)
def _number(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.arange(n_max + 1, dtype=complex), 0, format="csr")


@dataclass(frozen=True)
class QuadraticGenerator:
    """Hermitian generator ``H`` with ``U(t) = exp(-i t H)`` on one or two modes.

    ``two_mode_squeeze``  ``H = i(e^{i p} a^dag b^dag - h.c.)``: ``a -> cosh t a + e^{ip} sinh t b^dag``
    ``single_mode_squeeze`` ``H = (i/2)(e^{i p} a^dag^2 - h.c.)``: ``a -> cosh t a + e^{ip} sinh t a^dag``
    ``beamsplitter``      ``H = i(a^dag b - a b^dag)``: ``a -> cos t a + sin t b``
    ``phase``             ``H = -a^dag a``: ``a -> e^{it} a``
    """

    kind: str
    modes: tuple[int, ...]
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        need = 2 if self.kind in ("two_mode_squeeze", "beamsplitter") else 1
        if len(self.modes) != need or len(set(self.modes)) != need:
            raise ValueError(f"{self.kind} acts on {need} distinct mode(s), got {self.modes}")

    def local_matrix(self, n_max: int) -> sp.csr_matrix:
        """``-i H`` on the generator's own modes (first mode is the leading tensor factor)."""
        a = _ladder(n_max)
        ad = a.conj().T
        e = np.exp(1j * self.phase)
        if self.kind == "two_mode_squeeze":
            K = e * sp.kron(ad, ad) - np.conj(e) * sp.kron(a, a)
        elif self.kind == "single_mode_squeeze":
            K = 0.5 * (e * (ad @ ad) - np.conj(e) * (a @ a))
        elif self.kind == "beamsplitter":
            K = sp.kron(ad, a) - sp.kron(a, ad)
        else:
            K = 1j * _number(n_max)
        return sp.csr_matrix(K)


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """``peak_cutoff`` is the largest cutoff population seen anywhere in the state's history.

    Weight that touches the cutoff mid-circuit is distorted even if a later
    operation moves it back down, so convergence is judged on the peak.
    """

    tensor: np.ndarray
    n_max: int
    peak_cutoff: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        n_modes = t.ndim - 1
        if not 1 <= n_modes <= MAX_MODES:
            raise ValueError(f"the oracle handles 1 to {MAX_MODES} modes, got {n_modes}")
        if any(s != self.n_max + 1 for s in t.shape[:-1]):
            raise ValueError("every mode axis must have length n_max + 1")
        object.__setattr__(self, "tensor", t)
        object.__setattr__(self, "peak_cutoff", max(float(self.peak_cutoff), self.cutoff_population()))

    @property
    def n_modes(self) -> int:
        return self.tensor.ndim - 1

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** self.n_modes

    def norm(self) -> float:
        return float(np.vdot(self.tensor, self.tensor).real)

    def populations(self, mode: int) -> np.ndarray:
        axes = tuple(i for i in range(self.tensor.ndim) if i != mode)
        return np.sum(np.abs(self.tensor) ** 2, axis=axes)

    def cutoff_population(self) -> float:
        return max(float(self.populations(m)[-1]) for m in range(self.n_modes))

    def density_matrix(self) -> np.ndarray:
        M = self.tensor.reshape(self.dim, -1)
        return M @ M.conj().T


def fock_vacuum(n_modes: int, n_max: int) -> TruncatedState:
    return fock_basis_state([0] * n_modes, n_max)


def fock_basis_state(occupations: Sequence[int], n_max: int) -> TruncatedState:
    t = np.zeros((n_max + 1,) * len(occupations) + (1,), dtype=complex)
    t[tuple(occupations) + (0,)] = 1.0
    return TruncatedState(t, n_max)


@lru_cache(maxsize=64)
def _local_unitary(gen: QuadraticGenerator, parameter: float, n_max: int) -> sp.csr_matrix:
    # Each generator conserves a photon-number combination, so K splits into
    # small connected blocks that are exponentiated exactly one at a time.
    K = gen.local_matrix(n_max)
    n_blocks, labels = connected_components(abs(K), directed=False)
    rows, cols, vals = [], [], []
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        block = scipy.linalg.expm(parameter * K[idx][:, idx].toarray())
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    dim = K.shape[0]
    U = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    U.eliminate_zeros()
    return U


def build_unitary(gen: QuadraticGenerator, parameter: float, n_max: int = 20) -> np.ndarray:
    """Dense ``exp(parameter * (-i H))`` on the generator's modes."""
    return _local_unitary(gen, float(parameter), n_max).toarray()


def _apply_local(tensor: np.ndarray, op, axes: Sequence[int], n_max: int) -> np.ndarray:
    """Apply a sparse operator acting on ``axes`` of ``tensor``."""
    d = n_max + 1
    k = len(axes)
    moved = np.moveaxis(tensor, list(axes), list(range(k)))
    shape = moved.shape
    out = op @ moved.reshape(d**k, -1)
    return np.moveaxis(np.asarray(out).reshape(shape), list(range(k)), list(axes))


def evolve(state: TruncatedState, gen: QuadraticGenerator, parameter: float) -> TruncatedState:
    if any(not 0 <= m < state.n_modes for m in gen.modes):
        raise IndexError(f"generator modes {gen.modes} out of range for {state.n_modes} modes")
    if parameter == 0.0:
        return state
    U = _local_unitary(gen, float(parameter), state.n_max)
    return TruncatedState(_apply_local(state.tensor, U, gen.modes, state.n_max), state.n_max, state.peak_cutoff)


def two_mode_pa(state: TruncatedState, mode_a: int, mode_b: int, strength: float, phase: float = 0.0):
    """``a -> sqrt(1+s^2) a + s e^{i phase} b^dag``."""
    return evolve(state, QuadraticGenerator("two_mode_squeeze", (mode_a, mode_b), phase), math.asinh(strength))


def degenerate_psa(state: TruncatedState, mode: int, strength: float, phase: float = 0.0):
    return evolve(state, QuadraticGenerator("single_mode_squeeze", (mode,), phase), math.asinh(strength))


def phase_shift(state: TruncatedState, mode: int, angle: float):
    """``a -> e^{i angle} a``."""
    return evolve(state, QuadraticGenerator("phase", (mode,)), angle)


def loss(state: TruncatedState, mode: int, reflectivity: float, compress_tol: float = 1e-14) -> TruncatedState:
    """Beamsplitter with a vacuum ancilla, then trace the ancilla out."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity must lie in [0, 1]")
    if reflectivity == 0.0:
        return state
    d = state.n_max + 1
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    t = state.tensor
    n = state.n_modes
    # ancilla as a new axis just before the environment
    ext = np.moveaxis(np.multiply.outer(t, vac), -1, n)
    theta = math.asin(math.sqrt(reflectivity))
    U = _local_unitary(QuadraticGenerator("beamsplitter", (0, 1)), theta, state.n_max)
    ext = _apply_local(ext, U, (mode, n), state.n_max)
    env = ext.shape[-1] * d
    M = ext.reshape(d**n, env)
    # drop environment directions that carry no weight
    gram = M.conj().T @ M
    w, V = np.linalg.eigh(gram)
    keep = w > compress_tol * max(float(w[-1]), 1e-300)
    M = M @ V[:, keep]
    return TruncatedState(M.reshape((d,) * n + (-1,)), state.n_max, state.peak_cutoff)


def beamsplitter(state: TruncatedState, mode_a: int, mode_b: int, reflectivity: float) -> TruncatedState:
    theta = math.asin(math.sqrt(reflectivity))
    return evolve(state, QuadraticGenerator("beamsplitter", (mode_a, mode_b)), theta)


def _require_converged(state: TruncatedState) -> None:
    pop = state.peak_cutoff
    if pop >= CUTOFF_POPULATION_TOL:
        raise CutoffError(f"population {pop:.2e} reached the Fock cutoff n_max={state.n_max}; raise n_max")


def quad_moments(state: TruncatedState, terms: Sequence[tuple[int, float, float]]) -> float:
    """Variance of ``sum_i w_i X_{m_i}(theta_i)``; ``terms`` holds ``(mode, angle, weight)``."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one quadrature term")
    _require_converged(state)
    a = _ladder(state.n_max)
    psi = state.tensor
    q_psi = np.zeros_like(psi)
    for mode, angle, weight in terms:
        op = weight * (np.exp(-1j * angle) * a + np.exp(1j * angle) * a.conj().T)
        q_psi = q_psi + _apply_local(psi, sp.csr_matrix(op), (mode,), state.n_max)
    norm = state.norm()
    second = float(np.vdot(q_psi, q_psi).real) / norm
    first = float(np.vdot(psi, q_psi).real) / norm
    return second - first**2


def intensity_mean(state: TruncatedState, mode: int) -> float:
    """``<a^dag a>`` of ``mode``."""
    _require_converged(state)
    pops = state.populations(mode)
    return float(np.dot(np.arange(state.n_max + 1), pops) / pops.sum())
