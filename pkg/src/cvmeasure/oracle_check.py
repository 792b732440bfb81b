"""Cross-validation of the covariance-matrix algebra against the Fock-space oracle.

Each case is a short circuit of quadratic operations.  The circuit is run once
on covariance matrices and once on truncated state vectors, and a handful of
observables are compared.  Strengths are fractions of ``max_strength`` so the
whole suite can be tightened or relaxed from the command line.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import fock_oracle as fo
from .gaussian_core import (
    GainParam,
    GaussianState,
    LossChannel,
    QuadratureSelector,
    apply_beamsplitter,
    apply_degenerate_psa,
    apply_loss,
    apply_phase,
    apply_two_mode_pa,
    linear_combo_variance,
    mean_photon_number,
    vacuum_state,
)
from .measurement import degenerate_psa_intensity, nondegenerate_psa_intensity

DEFAULT_TOL = 1e-6

# (op, *args): ("pa", a, b, strength, phase) | ("dpsa", m, strength, phase)
#              ("phase", m, angle) | ("loss", m, L) | ("bs", a, b, R)
Op = tuple


def run_gaussian(ops: Sequence[Op], n_modes: int) -> GaussianState:
    st = vacuum_state(n_modes)
    for op, *args in ops:
        if op == "pa":
            a, b, s, ph = args
            st = apply_two_mode_pa(st, a, b, GainParam(s, ph))
        elif op == "dpsa":
            m, s, ph = args
            st = apply_degenerate_psa(st, m, GainParam(s, ph))
        elif op == "phase":
            st = apply_phase(st, *args)
        elif op == "loss":
            st = apply_loss(st, args[0], LossChannel(args[1]))
        elif op == "bs":
            st = apply_beamsplitter(st, *args)
        else:
            raise ValueError(f"unknown op {op!r}")
    return st


def run_fock(ops: Sequence[Op], n_modes: int, n_max: int) -> fo.TruncatedState:
    st = fo.fock_vacuum(n_modes, n_max)
    for op, *args in ops:
        if op == "pa":
            st = fo.two_mode_pa(st, *args)
        elif op == "dpsa":
            st = fo.degenerate_psa(st, *args)
        elif op == "phase":
            st = fo.phase_shift(st, *args)
        elif op == "loss":
            st = fo.loss(st, *args)
        elif op == "bs":
            st = fo.beamsplitter(st, *args)
        else:
            raise ValueError(f"unknown op {op!r}")
    return st


@dataclass(frozen=True)
class Observable:
    """``terms`` of ``(mode, angle, weight)`` give a variance; ``mode`` alone gives <n>."""

    label: str
    terms: tuple[tuple[int, float, float], ...] = ()
    mode: int | None = None
    # optional independent Gaussian-side formula replacing the direct covariance read-out
    gaussian: Callable[[], float] | None = None

    def on_gaussian(self, st: GaussianState) -> float:
        if self.gaussian is not None:
            return self.gaussian()
        if self.mode is not None:
            return mean_photon_number(st, self.mode)
        return linear_combo_variance(st, [(QuadratureSelector(m, a), w) for m, a, w in self.terms])

    def on_fock(self, st: fo.TruncatedState) -> float:
        if self.mode is not None:
            return fo.intensity_mean(st, self.mode)
        return fo.quad_moments(st, self.terms)


def var(label, *terms) -> Observable:
    return Observable(label, tuple(terms))


def photons(label, mode, gaussian=None) -> Observable:
    return Observable(label, mode=mode, gaussian=gaussian)


@dataclass(frozen=True)
class Case:
    name: str
    n_modes: int
    ops: tuple[Op, ...]
    observables: tuple[Observable, ...]


@dataclass(frozen=True)
class CheckRow:
    case: str
    quantity: str
    gaussian: float
    fock: float
    cutoff_population: float
    passed: bool
    note: str = ""

    @property
    def abs_error(self) -> float:
        return abs(self.gaussian - self.fock)


@dataclass
class OracleReport:
    rows: list[CheckRow] = field(default_factory=list)
    elapsed: float = 0.0
    n_max: int = 40
    max_strength: float = 0.8

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)

    def table(self) -> str:
        head = f"{'case':<28} {'quantity':<22} {'gaussian':>14} {'fock':>14} {'|diff|':>9} {'cutoff':>9}  result"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            res = "PASS" if r.passed else "FAIL"
            if r.note:
                res += f" ({r.note})"
            lines.append(
                f"{r.case:<28} {r.quantity:<22} {r.gaussian:>14.9f} {r.fock:>14.9f} "
                f"{r.abs_error:>9.1e} {r.cutoff_population:>9.1e}  {res}"
            )
        n_ok = sum(r.passed for r in self.rows)
        lines.append(
            f"{n_ok}/{len(self.rows)} checks passed at n_max={self.n_max}, "
            f"max strength {self.max_strength:g}, {self.elapsed:.1f} s"
        )
        return "\n".join(lines)


def default_cases(s: float) -> list[Case]:
    """Circuits whose strongest single squeezer has strength ``s``."""
    half = math.pi / 2
    pi = math.pi
    epr = (
        var("Var(X1-X2)", (0, 0.0, 1.0), (1, 0.0, -1.0)),
        var("Var(Y1+Y2)", (0, half, 1.0), (1, half, 1.0)),
        var("Var(X1+X2)", (0, 0.0, 1.0), (1, 0.0, 1.0)),
        var("Var(X1)", (0, 0.0, 1.0)),
    )

    sq_in = ("dpsa", 0, 0.9375 * s, pi)
    sq_ops = (sq_in, ("dpsa", 0, s, 0.0), ("loss", 0, 0.2))
    sq_state = run_gaussian(sq_ops[:1], 1)

    nd_in = (("pa", 0, 1, s, 0.0),)
    nd_gain = GainParam(0.625 * s, pi)
    imb_in = (("dpsa", 0, 0.5 * s, 0.0), ("pa", 0, 1, 0.375 * s, 1.0))
    imb_gain = GainParam(0.375 * s, 0.7)

    return [
        Case("vacuum", 1, (), (var("Var(X)", (0, 0.0, 1.0)), var("Var(X(0.4))", (0, 0.4, 1.0)))),
        Case("source PA", 2, (("pa", 0, 1, s, 0.0),), epr),
        Case("source PA weak", 2, (("pa", 0, 1, 0.375 * s, 0.0),), epr[:2]),
        Case(
            "source PA + loss both",
            2,
            (("pa", 0, 1, s, 0.0), ("loss", 0, 0.6), ("loss", 1, 0.6)),
            epr[:2] + (photons("<n1>", 0),),
        ),
        Case(
            "source PA + loss arm 1",
            2,
            (("pa", 0, 1, s, 0.0), ("loss", 0, 0.3)),
            (var("Var(X1-0.7X2)", (0, 0.0, 1.0), (1, 0.0, -0.7)), var("Var(X1(0.3)+X2(1.1))", (0, 0.3, 1.0), (1, 1.1, 1.0))),
        ),
        Case(
            "degenerate PSA on vacuum",
            1,
            (("dpsa", 0, s, 0.6),),
            (
                var("Var(X(phi/2))", (0, 0.3, 1.0)),
                var("Var(X(phi/2+pi/2))", (0, 0.3 + half, 1.0)),
                photons("<n> = g^2", 0, gaussian=lambda: s**2),
            ),
        ),
        Case(
            "squeezed -> PSA -> loss",
            1,
            sq_ops,
            (
                photons("<n> three-term", 0, gaussian=lambda: degenerate_psa_intensity(
                    sq_state, 0, GainParam(s, 0.0), LossChannel(0.2)).mean),
                var("Var(X)", (0, 0.0, 1.0)),
            ),
        ),
        Case(
            "non-degenerate PSA vacuum",
            2,
            (("pa", 0, 1, s, 0.0),),
            (photons("<n1> = g^2", 0, gaussian=lambda: s**2), photons("<n2> = g^2", 1, gaussian=lambda: s**2)),
        ),
        Case(
            "dis-entangler",
            2,
            (("pa", 0, 1, s, 0.0), ("pa", 0, 1, s, pi)),
            (var("Var(X1)", (0, 0.0, 1.0)), photons("<n1>", 0)),
        ),
        Case(
            "PA -> PSA(pi) -> loss",
            2,
            nd_in + (("pa", 0, 1, nd_gain.strength, pi), ("loss", 0, 0.3)),
            (
                var("Var(X1)", (0, 0.0, 1.0)),
                var("Var(X1(0.7))", (0, 0.7, 1.0)),
                var("Var(X1-X2)", (0, 0.0, 1.0), (1, 0.0, -1.0)),
                photons("<n1> exact form", 0, gaussian=lambda: nondegenerate_psa_intensity(
                    run_gaussian(nd_in, 2), 0, 1, nd_gain, LossChannel(0.3)).mean),
            ),
        ),
        Case(
            "PA -> PSA(0) composition",
            2,
            (("pa", 0, 1, 0.375 * s, 0.0), ("pa", 0, 1, 0.375 * s, 0.0)),
            (var("Var(X1-X2)", (0, 0.0, 1.0), (1, 0.0, -1.0)), photons("<n1>", 0)),
        ),
        Case(
            "PA -> phase -> PSA(pi)",
            2,
            (("pa", 0, 1, 0.75 * s, 0.0), ("phase", 0, 0.9), ("pa", 0, 1, 0.5 * s, pi)),
            (var("Var(X1-X2)", (0, 0.0, 1.0), (1, 0.0, -1.0)), var("Var(Y1+Y2)", (0, half, 1.0), (1, half, 1.0))),
        ),
        Case(
            "imbalanced inputs -> PSA",
            2,
            imb_in + (("pa", 0, 1, imb_gain.strength, imb_gain.phase),),
            (photons("<n1> exact form", 0, gaussian=lambda: nondegenerate_psa_intensity(
                run_gaussian(imb_in, 2), 0, 1, imb_gain).mean),),
        ),
        Case(
            "three-mode network",
            3,
            (("dpsa", 2, 0.75 * s, 1.0), ("pa", 0, 2, 0.625 * s, 0.4), ("bs", 1, 2, 0.3), ("loss", 0, 0.2)),
            (
                var("Var(X0(.3)+.5X2(1.1)-X1)", (0, 0.3, 1.0), (2, 1.1, 0.5), (1, 0.0, -1.0)),
                photons("<n2>", 1),
                photons("<n3>", 2),
            ),
        ),
    ]


def run_oracle_check(
    max_strength: float = 0.8,
    n_max: int = 40,
    tol: float = DEFAULT_TOL,
    cases: Sequence[Case] | None = None,
) -> OracleReport:
    if not max_strength > 0 or not math.isfinite(max_strength):
        raise ValueError("max_strength must be positive and finite")
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    report = OracleReport(n_max=n_max, max_strength=max_strength)
    t0 = time.perf_counter()
    for case in cases if cases is not None else default_cases(max_strength):
        g_state = run_gaussian(case.ops, case.n_modes)
        f_state = run_fock(case.ops, case.n_modes, n_max)
        pop = f_state.peak_cutoff
        for obs in case.observables:
            g = obs.on_gaussian(g_state)
            try:
                f = obs.on_fock(f_state)
            except fo.CutoffError:
                report.rows.append(CheckRow(case.name, obs.label, g, math.nan, pop, False, "cutoff"))
                continue
            ok = abs(g - f) <= tol
            report.rows.append(CheckRow(case.name, obs.label, g, f, pop, ok))
    report.elapsed = time.perf_counter() - t0
    return report
