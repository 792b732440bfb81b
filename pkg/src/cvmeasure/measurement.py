"""Detectors: balanced homodyne, joint BHD combiner and PSA + power detector.

A measurement is described by a :class:`MeasurementChain`: an optional PSA stage
followed by a readout.  The shot-noise limit of a chain is the same chain fed
with vacuum at the PSA inputs (:func:`snl_of`), so detection loss degrades the
SNL exactly as it degrades the signal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .gaussian_core import (
    GainParam,
    GaussianState,
    LossChannel,
    QuadratureSelector,
    apply_degenerate_psa,
    apply_loss,
    apply_nondegenerate_psa,
    linear_combo_variance,
    mean_photon_number,
    quad_variance,
    vacuum_state,
)


@dataclass(frozen=True)
class BHDConfig:
    lo_phase: float = 0.0
    electronic_gain: float = 1.0
    detection_loss: LossChannel = field(default_factory=LossChannel)
    lo_amplitude_sq: float = 1.0

    def __post_init__(self):
        if not self.electronic_gain > 0:
            raise ValueError("electronic_gain must be positive")
        if not self.lo_amplitude_sq > 0:
            raise ValueError("lo_amplitude_sq must be positive")
        if not isinstance(self.detection_loss, LossChannel):
            object.__setattr__(self, "detection_loss", LossChannel(float(self.detection_loss)))

    @property
    def current_scale(self) -> float:
        """Photocurrent per unit quadrature, ``q |alpha_L|``."""
        return self.electronic_gain * math.sqrt(self.lo_amplitude_sq)


@dataclass(frozen=True)
class CombinerConfig:
    """Electronic combiner ``i_a - k i_b`` (difference) or ``i_a + k i_b`` (sum)."""

    gain: float = 1.0
    sign: str = "difference"

    def __post_init__(self):
        if not math.isfinite(self.gain):
            raise ValueError("combiner gain must be finite")
        if self.sign not in ("difference", "sum"):
            raise ValueError(f"combiner sign must be 'difference' or 'sum', got {self.sign!r}")

    @property
    def signed_gain(self) -> float:
        return -self.gain if self.sign == "difference" else self.gain


@dataclass(frozen=True)
class IntensityReading:
    """Mean output photon number split into its exact contributions.

    ``squeeze_term`` carries the quadrature amplified by ``(G+g)^2``;
    ``antisqueeze_term`` the one suppressed by ``(G-g)^2``; ``commutator_term``
    is the ``-1/2`` vacuum offset.  ``imbalance_term`` is ``(n1 - n2)/2`` for a
    non-degenerate PSA and vanishes for equal input intensities.  All terms
    already include the detection transmission ``1 - L``.
    """

    squeeze_term: float
    antisqueeze_term: float
    commutator_term: float
    imbalance_term: float = 0.0

    @property
    def term_breakdown(self) -> tuple[float, float, float]:
        return (self.squeeze_term, self.antisqueeze_term, self.commutator_term)

    @property
    def mean(self) -> float:
        return math.fsum((self.squeeze_term, self.antisqueeze_term, self.commutator_term, self.imbalance_term))

    @property
    def high_gain_approximation(self) -> float:
        return self.squeeze_term


@dataclass(frozen=True)
class BHDReadout:
    mode: int
    cfg: BHDConfig = field(default_factory=BHDConfig)


@dataclass(frozen=True)
class JointBHDReadout:
    mode_a: int
    mode_b: int
    cfg_a: BHDConfig = field(default_factory=BHDConfig)
    cfg_b: BHDConfig = field(default_factory=BHDConfig)
    comb: CombinerConfig = field(default_factory=CombinerConfig)


@dataclass(frozen=True)
class PowerReadout:
    mode: int
    loss: LossChannel = field(default_factory=LossChannel)
    electronic_gain: float = 1.0


Readout = Union[BHDReadout, JointBHDReadout, PowerReadout]


@dataclass(frozen=True)
class PSAStage:
    """One mode -> degenerate PSA, two modes -> non-degenerate PSA."""

    gain: GainParam
    modes: tuple[int, ...]

    def apply(self, state: GaussianState) -> GaussianState:
        if len(self.modes) == 1:
            return apply_degenerate_psa(state, self.modes[0], self.gain)
        return apply_nondegenerate_psa(state, self.modes[0], self.modes[1], self.gain)


@dataclass(frozen=True)
class MeasurementChain:
    readout: Readout
    psa: PSAStage | None = None

    def modes(self) -> set[int]:
        r = self.readout
        used = {r.mode_a, r.mode_b} if isinstance(r, JointBHDReadout) else {r.mode}
        if self.psa is not None:
            used.update(self.psa.modes)
        return used


def bhd_variance(state: GaussianState, mode: int, cfg: BHDConfig) -> float:
    """``q^2 |alpha_L|^2 <Delta^2 X(phi_L)>`` of the field after detection loss."""
    lossy = apply_loss(state, mode, cfg.detection_loss)
    return cfg.current_scale**2 * quad_variance(lossy, QuadratureSelector(mode, cfg.lo_phase))


def joint_bhd_variance(
    state: GaussianState,
    mode_a: int,
    mode_b: int,
    cfg_a: BHDConfig,
    cfg_b: BHDConfig,
    comb: CombinerConfig,
) -> float:
    if mode_a == mode_b:
        raise ValueError("joint BHD needs two distinct modes")
    lossy = apply_loss(apply_loss(state, mode_a, cfg_a.detection_loss), mode_b, cfg_b.detection_loss)
    terms = [
        (QuadratureSelector(mode_a, cfg_a.lo_phase), cfg_a.current_scale),
        (QuadratureSelector(mode_b, cfg_b.lo_phase), comb.signed_gain * cfg_b.current_scale),
    ]
    return linear_combo_variance(lossy, terms)


def power_reading(state: GaussianState, readout: PowerReadout) -> float:
    lossy = apply_loss(state, readout.mode, readout.loss)
    return readout.electronic_gain**2 * mean_photon_number(lossy, readout.mode)


def _validate(chain: MeasurementChain, n_modes: int | None = None) -> int:
    if not isinstance(chain, MeasurementChain):
        raise ValueError(f"expected a MeasurementChain, got {type(chain).__name__}")
    if not isinstance(chain.readout, (BHDReadout, JointBHDReadout, PowerReadout)):
        raise ValueError(f"unknown readout {chain.readout!r}")
    if chain.psa is not None and len(chain.psa.modes) not in (1, 2):
        raise ValueError("a PSA stage acts on one or two modes")
    if chain.psa is not None and len(set(chain.psa.modes)) != len(chain.psa.modes):
        raise ValueError("PSA modes must be distinct")
    used = chain.modes()
    if any(not isinstance(m, (int, np.integer)) or m < 0 for m in used):
        raise ValueError(f"invalid mode indices {sorted(used, key=str)}")
    need = max(used) + 1
    if n_modes is not None and need > n_modes:
        raise ValueError(f"chain addresses mode {need - 1} but only {n_modes} modes exist")
    return n_modes if n_modes is not None else need


def measure(state: GaussianState, chain: MeasurementChain) -> float:
    """Evaluate ``chain`` on ``state``: PSA (if any), then loss and readout."""
    _validate(chain, state.n_modes)
    if chain.psa is not None:
        state = chain.psa.apply(state)
    r = chain.readout
    if isinstance(r, BHDReadout):
        return bhd_variance(state, r.mode, r.cfg)
    if isinstance(r, JointBHDReadout):
        return joint_bhd_variance(state, r.mode_a, r.mode_b, r.cfg_a, r.cfg_b, r.comb)
    return power_reading(state, r)


def snl_of(chain: MeasurementChain, n_modes: int | None = None) -> float:
    """Shot-noise limit: the same chain with vacuum at the PSA (or detector) inputs."""
    n = _validate(chain, n_modes)
    return measure(vacuum_state(n), chain)


def degenerate_psa_intensity(
    input_state: GaussianState,
    mode: int,
    gain: GainParam,
    loss_after: LossChannel | None = None,
) -> IntensityReading:
    """Mean photon number after a degenerate PSA and a lossy power detector.

    The PSA amplifies the input quadrature at angle ``gain.phase / 2`` by
    ``G + g`` and suppresses the orthogonal one by ``G - g``.
    """
    loss_after = loss_after or LossChannel()
    t = 1.0 - loss_after.reflectivity
    G, g = gain.conj_amplitude, gain.strength
    half = gain.phase / 2.0
    var_amp = quad_variance(input_state, QuadratureSelector(mode, half))
    var_deamp = quad_variance(input_state, QuadratureSelector(mode, half + math.pi / 2))
    return IntensityReading(
        squeeze_term=t * (G + g) ** 2 / 4.0 * var_amp,
        antisqueeze_term=t * (G - g) ** 2 / 4.0 * var_deamp,
        commutator_term=-0.5 * t,
    )


def nondegenerate_psa_intensity(
    input_state: GaussianState,
    mode_a: int,
    mode_b: int,
    gain: GainParam,
    loss_after: LossChannel | None = None,
) -> IntensityReading:
    """Mean photon number at the ``mode_a`` output of a non-degenerate PSA.

    With ``alpha = phase/2`` the amplified combination is
    ``X1(alpha) + X2(alpha)`` together with ``X1(alpha+pi/2) - X2(alpha+pi/2)``;
    at ``phase = pi`` these are ``X1 - X2`` and ``Y1 + Y2``.
    """
    if mode_a == mode_b:
        raise ValueError("non-degenerate PSA needs two distinct modes")
    loss_after = loss_after or LossChannel()
    t = 1.0 - loss_after.reflectivity
    G, g = gain.conj_amplitude, gain.strength
    a = gain.phase / 2.0
    b = a + math.pi / 2

    def var(s1, th, s2):
        return linear_combo_variance(
            input_state, [(QuadratureSelector(mode_a, th), s1), (QuadratureSelector(mode_b, th), s2)]
        )

    amplified = var(1.0, a, 1.0) + var(1.0, b, -1.0)
    suppressed = var(1.0, a, -1.0) + var(1.0, b, 1.0)
    imbalance = (mean_photon_number(input_state, mode_a) - mean_photon_number(input_state, mode_b)) / 2.0
    return IntensityReading(
        squeeze_term=t * (G + g) ** 2 / 16.0 * amplified,
        antisqueeze_term=t * (G - g) ** 2 / 16.0 * suppressed,
        commutator_term=-0.5 * t,
        imbalance_term=t * imbalance,
    )
