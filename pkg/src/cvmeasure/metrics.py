"""Normalized noise reductions and inseparability for each measurement scheme.

Every evaluator has two independent routes selected by ``method``:

* ``"simulate"`` propagates the source covariance through the PSA, the
  detection losses and the detectors, and obtains the SNL by feeding vacuum
  into the PSA inputs;
* ``"closed_form"`` evaluates the analytic expressions for the symmetric
  two-mode squeezed source with equal loss on both arms.

The two agree to rounding; the test-suite holds them to 1e-10.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian_core import (
    GainParam,
    GaussianState,
    LossChannel,
    QuadratureSelector,
    apply_two_mode_pa,
    linear_combo_variance,
    vacuum_state,
)
from .measurement import (
    BHDConfig,
    BHDReadout,
    CombinerConfig,
    JointBHDReadout,
    MeasurementChain,
    PowerReadout,
    PSAStage,
    measure,
    snl_of,
)

METHODS = ("simulate", "closed_form")
SCHEME_KINDS = ("traditional_dual_bhd", "psa_power_detector", "psa_joint_bhd", "psa_single_bhd")


@dataclass(frozen=True)
class SourceSpec:
    """Two-mode squeezed source ``a1 = mu a1_in + nu a2_in^dag``."""

    gain: GainParam

    @classmethod
    def from_nu(cls, nu: float) -> "SourceSpec":
        return cls(GainParam(float(nu)))

    @property
    def mu(self) -> float:
        return self.gain.conj_amplitude

    @property
    def nu(self) -> float:
        return self.gain.strength

    def state(self) -> GaussianState:
        return apply_two_mode_pa(vacuum_state(2), 0, 1, self.gain)


@dataclass(frozen=True)
class MeasurementReport:
    var_x_minus: float
    var_y_plus: float
    snl: float
    nor_x: float
    nor_y: float
    inseparability: float

    @classmethod
    def from_variances(cls, var_x: float, var_y: float, snl: float) -> "MeasurementReport":
        nor_x, nor_y = var_x / snl, var_y / snl
        return cls(var_x, var_y, snl, nor_x, nor_y, nor_x + nor_y)


@dataclass(frozen=True)
class PowerDetectorReport:
    """Mean PSA output intensity, its vacuum-input SNL and their ratio.

    ``inseparability`` is ``2 * ratio``, the estimate of ``I_s`` that the ratio
    supports once the gain is high.
    """

    mean: float
    snl: float

    @property
    def ratio(self) -> float:
        return self.mean / self.snl

    @property
    def inseparability(self) -> float:
        return 2.0 * self.ratio


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    psa_gain: GainParam | None = None
    detection_loss: tuple[LossChannel, LossChannel] = (LossChannel(), LossChannel())
    combiner: CombinerConfig | None = None
    output_port: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; expected one of {SCHEME_KINDS}")
        if self.kind != "traditional_dual_bhd" and self.psa_gain is None:
            raise ValueError(f"scheme {self.kind!r} needs a PSA gain")
        joint = self.kind in ("traditional_dual_bhd", "psa_joint_bhd")
        if self.combiner is not None and not joint:
            raise ValueError("a combiner only applies to joint schemes")
        if self.output_port not in (1, 2):
            raise ValueError("output_port must be 1 or 2")
        object.__setattr__(self, "detection_loss", _loss_pair(self.detection_loss))


def _as_source(src) -> SourceSpec:
    if isinstance(src, SourceSpec):
        return src
    if isinstance(src, GainParam):
        return SourceSpec(src)
    return SourceSpec.from_nu(src)


def _as_psa(psa, method: str) -> GainParam:
    gain = psa if isinstance(psa, GainParam) else GainParam.deamplifying(float(psa))
    if method == "closed_form" and not gain.is_deamplifying:
        raise ValueError("closed forms assume the PSA at de-amplification (phase = pi); use method='simulate'")
    return gain


def _loss_pair(loss) -> tuple[LossChannel, LossChannel]:
    if loss is None:
        return LossChannel(), LossChannel()
    if isinstance(loss, LossChannel):
        return loss, loss
    if isinstance(loss, (int, float, np.floating)):
        return LossChannel(float(loss)), LossChannel(float(loss))
    a, b = loss
    a = a if isinstance(a, LossChannel) else LossChannel(float(a))
    b = b if isinstance(b, LossChannel) else LossChannel(float(b))
    return a, b


def _symmetric_loss(loss) -> float:
    a, b = _loss_pair(loss)
    if a.reflectivity != b.reflectivity:
        raise ValueError("closed forms need equal loss on both arms; use method='simulate'")
    return a.reflectivity


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _joint_report(state_or_none, psa: GainParam | None, losses, lam: float) -> MeasurementReport:
    la, lb = losses
    stage = None if psa is None else PSAStage(psa, (0, 1))
    x_chain = MeasurementChain(
        JointBHDReadout(0, 1, BHDConfig(0.0, detection_loss=la), BHDConfig(0.0, detection_loss=lb),
                        CombinerConfig(lam, "difference")),
        stage,
    )
    y_chain = MeasurementChain(
        JointBHDReadout(0, 1, BHDConfig(math.pi / 2, detection_loss=la), BHDConfig(math.pi / 2, detection_loss=lb),
                        CombinerConfig(lam, "sum")),
        stage,
    )
    return MeasurementReport.from_variances(
        measure(state_or_none, x_chain), measure(state_or_none, y_chain), snl_of(x_chain, 2)
    )


def source_metrics(src, method: str = "simulate") -> MeasurementReport:
    """Noise reduction of the source itself, normalized to two vacuum units."""
    _check_method(method)
    src = _as_source(src)
    if method == "closed_form":
        v = 2.0 * (src.mu - src.nu) ** 2
        return MeasurementReport.from_variances(v, v, 2.0)
    state = src.state()
    var_x = linear_combo_variance(state, [(QuadratureSelector(0, 0.0), 1.0), (QuadratureSelector(1, 0.0), -1.0)])
    var_y = linear_combo_variance(
        state, [(QuadratureSelector(0, math.pi / 2), 1.0), (QuadratureSelector(1, math.pi / 2), 1.0)]
    )
    snl = linear_combo_variance(vacuum_state(2), [(QuadratureSelector(0, 0.0), 1.0), (QuadratureSelector(1, 0.0), -1.0)])
    return MeasurementReport.from_variances(var_x, var_y, snl)


def traditional_metrics(src, loss=None, method: str = "simulate") -> MeasurementReport:
    """Two BHDs and an electronic combiner (k = 1) directly on the source."""
    _check_method(method)
    src = _as_source(src)
    if method == "closed_form":
        L = _symmetric_loss(loss)
        v = 2.0 * (1.0 - L) * (src.mu - src.nu) ** 2 + 2.0 * L
        return MeasurementReport.from_variances(v, v, 2.0)
    return _joint_report(src.state(), None, _loss_pair(loss), 1.0)


def psa_joint_metrics(src, psa, lam: float = 1.0, loss=None, method: str = "simulate") -> MeasurementReport:
    """Non-degenerate PSA followed by two BHDs combined as ``X1 - lam X2``, ``Y1 + lam Y2``."""
    _check_method(method)
    src = _as_source(src)
    gain = _as_psa(psa, method)
    if not math.isfinite(lam):
        raise ValueError("lam must be finite")
    if method == "closed_form":
        L = _symmetric_loss(loss)
        G, g, mu, nu = gain.conj_amplitude, gain.strength, src.mu, src.nu
        a, b = G + lam * g, g + lam * G
        core = (a * mu - b * nu) ** 2 + (a * nu - b * mu) ** 2
        vac = L * (1.0 + lam**2)
        var = (1.0 - L) * core + vac
        snl = (1.0 - L) * (a**2 + b**2) + vac
        return MeasurementReport.from_variances(var, var, snl)
    return _joint_report(src.state(), gain, _loss_pair(loss), lam)


def _single_closed(mu: float, nu: float, G: float, g: float, L: float) -> tuple[float, float]:
    var = (1.0 - L) * ((mu * G - nu * g) ** 2 + (mu * g - nu * G) ** 2) + L
    snl = (1.0 - L) * (G**2 + g**2) + L
    return var, snl


def psa_single_bhd_metrics(src, psa, port: int = 1, loss=None, method: str = "simulate") -> MeasurementReport:
    """One BHD at output ``port`` of the PSA; ``var_x_minus``/``var_y_plus`` hold X_out/Y_out."""
    _check_method(method)
    if port not in (1, 2):
        raise ValueError("port must be 1 or 2")
    src = _as_source(src)
    gain = _as_psa(psa, method)
    if method == "closed_form":
        L = _loss_pair(loss)[port - 1].reflectivity
        G, g = gain.conj_amplitude, gain.strength
        if port == 2:
            G, g = g, G
        var, snl = _single_closed(src.mu, src.nu, G, g, L)
        return MeasurementReport.from_variances(var, var, snl)
    mode = port - 1
    L = _loss_pair(loss)[mode]
    stage = PSAStage(gain, (0, 1))
    x_chain = MeasurementChain(BHDReadout(mode, BHDConfig(0.0, detection_loss=L)), stage)
    y_chain = MeasurementChain(BHDReadout(mode, BHDConfig(math.pi / 2, detection_loss=L)), stage)
    state = src.state()
    return MeasurementReport.from_variances(measure(state, x_chain), measure(state, y_chain), snl_of(x_chain, 2))


def psa_single_bhd_phase_scan(src, psa, phases: Sequence[float], method: str = "simulate") -> list[float]:
    """Normalized output-port-1 variance for each LO phase in ``phases``."""
    _check_method(method)
    phases = list(phases)
    if not phases:
        raise ValueError("phase scan needs at least one phase")
    src = _as_source(src)
    gain = _as_psa(psa, method)
    if method == "closed_form":
        var, snl = _single_closed(src.mu, src.nu, gain.conj_amplitude, gain.strength, 0.0)
        return [var / snl] * len(phases)
    state = src.state()
    stage = PSAStage(gain, (0, 1))
    out = []
    for phi in phases:
        chain = MeasurementChain(BHDReadout(0, BHDConfig(phi)), stage)
        out.append(measure(state, chain) / snl_of(chain, 2))
    return out


def psa_power_detector_metrics(src, psa, loss=None, method: str = "simulate") -> PowerDetectorReport:
    """Non-degenerate PSA with a power detector on output 1."""
    _check_method(method)
    src = _as_source(src)
    gain = _as_psa(psa, method)
    L = _loss_pair(loss)[0]
    if gain.strength == 0.0 or L.reflectivity == 1.0:
        raise ValueError("the power-detector SNL vanishes for g = 0 or L = 1")
    if method == "closed_form":
        G, g, mu, nu = gain.conj_amplitude, gain.strength, src.mu, src.nu
        t = 1.0 - L.reflectivity
        mean = t * ((G + g) ** 2 * (mu - nu) ** 2 / 4.0 + (G - g) ** 2 * (mu + nu) ** 2 / 4.0 - 0.5)
        return PowerDetectorReport(mean, t * g**2)
    chain = MeasurementChain(PowerReadout(0, L), PSAStage(gain, (0, 1)))
    return PowerDetectorReport(measure(src.state(), chain), snl_of(chain, 2))


def evaluate_scheme(src, scheme: SchemeSpec, method: str = "simulate"):
    """Dispatch on ``scheme.kind``."""
    loss = scheme.detection_loss
    if scheme.kind == "traditional_dual_bhd":
        lam = scheme.combiner.gain if scheme.combiner else 1.0
        if lam != 1.0:
            return psa_joint_metrics(src, GainParam.deamplifying(0.0), lam, loss, method)
        return traditional_metrics(src, loss, method)
    if scheme.kind == "psa_joint_bhd":
        lam = scheme.combiner.gain if scheme.combiner else 1.0
        return psa_joint_metrics(src, scheme.psa_gain, lam, loss, method)
    if scheme.kind == "psa_single_bhd":
        return psa_single_bhd_metrics(src, scheme.psa_gain, scheme.output_port, loss, method)
    return psa_power_detector_metrics(src, scheme.psa_gain, loss, method)
