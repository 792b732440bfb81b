"""Scenario files, parameter sweeps, figure presets and CSV output.

A scenario is a line-oriented text file of dotted ``key = value`` pairs::

    # PSA-assisted joint measurement under detection loss
    source.nu = 2
    scheme.kind = psa_joint
    psa.g = 5
    sweep.param = loss
    sweep.range = 0:0.6:25

``#`` starts a comment.  Angles accept ``pi`` forms such as ``pi/2`` or
``0.5*pi``.  Complex lists use Python literals (``0.6, 0.8j, 0.1+0.2j``).
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fock_oracle as fo
from .gaussian_core import GainParam
from .metrics import (
    SourceSpec,
    psa_joint_metrics,
    psa_power_detector_metrics,
    psa_single_bhd_metrics,
    source_metrics,
    traditional_metrics,
)
from .multimode import (
    LOOverlap,
    ModeLadder,
    SpectralGrid,
    below_high_gain,
    gains_from_ladder,
    multimode_psa_joint_I,
    multimode_psa_single_I,
    multimode_traditional_report,
    overlap_from_spectra,
)
from .oracle_check import run_fock

KIND_ALIASES = {
    "source": "source",
    "traditional": "traditional_dual_bhd",
    "traditional_dual_bhd": "traditional_dual_bhd",
    "psa_joint": "psa_joint_bhd",
    "psa_joint_bhd": "psa_joint_bhd",
    "psa_single": "psa_single_bhd",
    "psa_single_bhd": "psa_single_bhd",
    "psa_power": "psa_power_detector",
    "psa_power_detector": "psa_power_detector",
    "multimode_traditional": "multimode_traditional",
    "multimode_psa_single": "multimode_psa_single",
    "multimode_psa_joint": "multimode_psa_joint",
}

_COMMON = {"scheme.kind", "scheme.method", "sweep.param", "sweep.range"}
_LOSS = {"detection.loss", "detection.loss2"}
_PSA = {"psa.g", "psa.g_ratio", "psa.phase"}
_LO = {"lo.xi", "lo.zeta", "lo.phi0", "lo.psi0", "lo.spectra"}
_MM = {"source.ladder", "source.pump"} | _LO
ALLOWED_KEYS = {
    "source": _COMMON | {"source.nu"},
    "traditional_dual_bhd": _COMMON | _LOSS | {"source.nu", "combiner.lambda", "oracle.n_max"},
    "psa_joint_bhd": _COMMON | _LOSS | _PSA | {"source.nu", "combiner.lambda", "oracle.n_max"},
    "psa_single_bhd": _COMMON | _LOSS | _PSA | {"source.nu", "output.port", "oracle.n_max"},
    "psa_power_detector": _COMMON | _LOSS | _PSA | {"source.nu", "oracle.n_max"},
    "multimode_traditional": _COMMON | _MM,
    "multimode_psa_single": _COMMON | _MM | {"psa.pump", "psa.ladder", "output.port"},
    "multimode_psa_joint": _COMMON | _MM | {"psa.pump", "psa.ladder"},
}
ALL_KEYS = set().union(*ALLOWED_KEYS.values())
FLOAT_KEYS = {
    "source.nu", "source.pump", "psa.g", "psa.g_ratio", "psa.phase", "psa.pump", "detection.loss",
    "detection.loss2", "combiner.lambda", "lo.phi0", "lo.psi0",
}
SWEEP_ALIASES = {
    "nu": "source.nu",
    "g": "psa.g",
    "g_ratio": "psa.g_ratio",
    "phase": "psa.phase",
    "loss": "detection.loss",
    "loss2": "detection.loss2",
    "lambda": "combiner.lambda",
    "pump": "source.pump",
    "psa_pump": "psa.pump",
    "lo_phase": "lo.phi0",
}

_PI_FORM = re.compile(r"^([-+]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


class ConfigError(ValueError):
    """Bad scenario input; carries the offending line number and key when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


def parse_float(text: str) -> float:
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        m = _PI_FORM.match(text)
        if not m:
            raise ValueError(f"not a number: {text!r}") from None
        sign, coef, denom = m.groups()
        if denom is not None and float(denom) == 0:
            raise ValueError(f"division by zero in {text!r}")
        value = (-1.0 if sign == "-" else 1.0) * float(coef or 1.0) * math.pi / float(denom or 1.0)
    if not math.isfinite(value):
        raise ValueError(f"value must be finite: {text!r}")
    return value


def _float_list(text: str) -> list[float]:
    return [parse_float(t) for t in text.split(",") if t.strip()]


def _complex_list(text: str) -> list[complex]:
    out = []
    for t in text.split(","):
        t = t.strip().replace(" ", "")
        if t:
            out.append(complex(t))
    return out


def parse_range(text: str) -> np.ndarray:
    """``start:stop:points`` with ``points >= 1`` (both ends included)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("sweep.range must look like start:stop:points")
    start, stop = parse_float(parts[0]), parse_float(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise ValueError(f"points must be an integer, got {parts[2]!r}") from None
    if n < 1:
        raise ValueError("a sweep needs at least one point")
    return np.linspace(start, stop, n) if n > 1 else np.array([start])


@dataclass(frozen=True)
class ScenarioConfig:
    """Raw ``key -> value`` text plus where each key came from."""

    entries: Mapping[str, str]
    lines: Mapping[str, int] = field(default_factory=dict)
    base_dir: Path | None = None

    def line(self, key: str) -> int | None:
        return self.lines.get(key)

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, self.line(key), key)

    def get_float(self, key: str, default: float | None = None) -> float | None:
        if key not in self.entries:
            return default
        try:
            return parse_float(self.entries[key])
        except ValueError as exc:
            raise self.error(key, str(exc)) from None

    @property
    def kind(self) -> str:
        raw = self.entries.get("scheme.kind")
        if raw is None:
            raise ConfigError("missing required key", None, "scheme.kind")
        if raw not in KIND_ALIASES:
            raise self.error("scheme.kind", f"unknown scheme {raw!r}; expected one of {sorted(KIND_ALIASES)}")
        return KIND_ALIASES[raw]

    @property
    def sweep_key(self) -> str | None:
        raw = self.entries.get("sweep.param")
        if raw is None:
            if "sweep.range" in self.entries:
                raise self.error("sweep.range", "sweep.range given without sweep.param")
            return None
        key = SWEEP_ALIASES.get(raw, raw)
        if key not in FLOAT_KEYS or key not in ALLOWED_KEYS[self.kind]:
            raise self.error("sweep.param", f"cannot sweep {raw!r} for scheme {self.kind}")
        if "sweep.range" not in self.entries:
            raise ConfigError("sweep.param given without sweep.range", self.line("sweep.param"), "sweep.range")
        return key

    def sweep_values(self) -> np.ndarray | None:
        if self.sweep_key is None:
            return None
        try:
            return parse_range(self.entries["sweep.range"])
        except ValueError as exc:
            raise self.error("sweep.range", str(exc)) from None

    def at(self, value: float) -> "ScenarioConfig":
        """Single-point config with the swept parameter pinned to ``value``."""
        key = self.sweep_key
        if key is None:
            return self
        entries = {k: v for k, v in self.entries.items() if not k.startswith("sweep.")}
        entries[key] = repr(float(value))
        return ScenarioConfig(entries, self.lines, self.base_dir)

    def to_json(self) -> str:
        return json.dumps(dict(self.entries), sort_keys=True)


def parse_config(text: str, base_dir: Path | str | None = None) -> ScenarioConfig:
    entries: dict[str, str] = {}
    lines: dict[str, int] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", n)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError("unknown key", n, key)
        if key in entries:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", n, key)
        if not value:
            raise ConfigError("empty value", n, key)
        entries[key] = value
        lines[key] = n
    cfg = ScenarioConfig(entries, lines, Path(base_dir) if base_dir is not None else None)
    validate(cfg)
    return cfg


def config_from_mapping(entries: Mapping[str, object], base_dir: Path | str | None = None) -> ScenarioConfig:
    """Build a config from a dict; values are converted with ``str``."""
    text = "\n".join(f"{k} = {v}" for k, v in entries.items())
    return parse_config(text, base_dir)


def load_config(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from None
    return parse_config(text, path.parent)


def validate(cfg: ScenarioConfig) -> None:
    kind = cfg.kind
    for key in cfg.entries:
        if key not in ALLOWED_KEYS[kind]:
            raise cfg.error(key, f"not used by scheme {kind}")
    for key in FLOAT_KEYS & cfg.entries.keys():
        cfg.get_float(key)
    method = cfg.entries.get("scheme.method", "simulate")
    if method not in ("simulate", "closed_form"):
        raise cfg.error("scheme.method", f"unknown method {method!r}")
    if "output.port" in cfg.entries and cfg.entries["output.port"] not in ("1", "2"):
        raise cfg.error("output.port", "port must be 1 or 2")
    if "oracle.n_max" in cfg.entries:
        try:
            if int(cfg.entries["oracle.n_max"]) < 2:
                raise ValueError
        except ValueError:
            raise cfg.error("oracle.n_max", "must be an integer >= 2") from None
    sweep = cfg.sweep_key
    cfg.sweep_values()
    need = set()
    if kind.startswith("multimode"):
        need |= {"source.ladder", "source.pump"}
        if kind != "multimode_traditional":
            need.add("psa.pump")
        has_inline = "lo.xi" in cfg.entries or "lo.zeta" in cfg.entries
        if has_inline and "lo.spectra" in cfg.entries:
            raise cfg.error("lo.spectra", "give either lo.xi/lo.zeta or lo.spectra, not both")
        if not has_inline and "lo.spectra" not in cfg.entries:
            raise ConfigError("multimode schemes need lo.xi and lo.zeta or lo.spectra", None, "lo.xi")
        if has_inline and not {"lo.xi", "lo.zeta"} <= cfg.entries.keys():
            raise ConfigError("lo.xi and lo.zeta must be given together", None, "lo.zeta")
    else:
        need.add("source.nu")
        if kind not in ("source", "traditional_dual_bhd"):
            if "psa.g" in cfg.entries and "psa.g_ratio" in cfg.entries:
                raise cfg.error("psa.g_ratio", "give psa.g or psa.g_ratio, not both")
            if "psa.g" not in cfg.entries and "psa.g_ratio" not in cfg.entries:
                if sweep not in ("psa.g", "psa.g_ratio"):
                    raise ConfigError(f"scheme {kind} needs psa.g or psa.g_ratio", None, "psa.g")
    for key in need:
        if key not in cfg.entries and key != sweep:
            raise ConfigError(f"missing required key for scheme {kind}", None, key)


@dataclass(frozen=True)
class ResultRow:
    param: str
    value: float
    var_x_minus: float
    var_y_plus: float
    snl: float
    nor_x: float
    nor_y: float
    inseparability: float
    scheme: str
    flag_high_gain: bool = False
    flag_cutoff: bool = False

    @property
    def flagged(self) -> bool:
        return self.flag_high_gain or self.flag_cutoff


COLUMNS = tuple(f.name for f in fields(ResultRow))


def _losses(cfg: ScenarioConfig) -> tuple[float, float]:
    a = cfg.get_float("detection.loss", 0.0)
    return a, cfg.get_float("detection.loss2", a)


def _psa_gain(cfg: ScenarioConfig, nu: float) -> GainParam:
    g = cfg.get_float("psa.g")
    if g is None:
        g = cfg.get_float("psa.g_ratio") * nu
    return GainParam(g, cfg.get_float("psa.phase", math.pi))


def _overlap(cfg: ScenarioConfig) -> LOOverlap:
    phi0 = cfg.get_float("lo.phi0", 0.0)
    psi0 = cfg.get_float("lo.psi0", 0.0)
    if "lo.spectra" in cfg.entries:
        path = Path(cfg.entries["lo.spectra"])
        if not path.is_absolute() and cfg.base_dir is not None:
            path = cfg.base_dir / path
        if not path.is_file():
            raise cfg.error("lo.spectra", f"spectra file {str(path)!r} not found")
        try:
            with np.load(path) as data:
                grid = SpectralGrid(data["omega"], data["lo_a"], data["lo_b"], data["phi"], data["psi"])
        except KeyError as exc:
            raise cfg.error("lo.spectra", f"spectra file lacks array {exc}") from None
        return overlap_from_spectra(grid, phi0, psi0)
    try:
        xi = _complex_list(cfg.entries["lo.xi"])
        zeta = _complex_list(cfg.entries["lo.zeta"])
    except ValueError as exc:
        raise cfg.error("lo.xi", f"bad coefficient list: {exc}") from None
    return LOOverlap(xi, zeta, phi0, psi0)


def _ladder(cfg: ScenarioConfig, key: str, pump: float) -> ModeLadder:
    try:
        return ModeLadder(_float_list(cfg.entries[key]), pump)
    except ValueError as exc:
        raise cfg.error(key, str(exc)) from None


def _oracle_confirms(cfg: ScenarioConfig, kind: str, nu: float, gain: GainParam | None, var_x: float) -> bool:
    """Re-derive ``var_x_minus`` in truncated Fock space; False when it cannot be confirmed."""
    n_max = int(cfg.entries["oracle.n_max"])
    la, lb = _losses(cfg)
    ops = [("pa", 0, 1, nu, 0.0)]
    if gain is not None:
        ops.append(("pa", 0, 1, gain.strength, gain.phase))
    ops += [("loss", 0, la), ("loss", 1, lb)]
    if kind == "psa_single_bhd":
        port = int(cfg.entries.get("output.port", "1")) - 1
        terms = [(port, 0.0, 1.0)]
    elif kind == "psa_power_detector":
        terms = None
    else:
        terms = [(0, 0.0, 1.0), (1, 0.0, -cfg.get_float("combiner.lambda", 1.0))]
    try:
        st = run_fock(ops, 2, n_max)
        value = fo.intensity_mean(st, 0) if terms is None else fo.quad_moments(st, terms)
    except fo.CutoffError:
        return False
    return abs(value - var_x) <= 1e-6 * max(1.0, abs(var_x))


def evaluate_point(cfg: ScenarioConfig, param: str = "", value: float = math.nan) -> ResultRow:
    kind = cfg.kind
    method = cfg.entries.get("scheme.method", "simulate")
    high_gain = False
    if kind.startswith("multimode"):
        src_ladder = _ladder(cfg, "source.ladder", cfg.get_float("source.pump"))
        lo = _overlap(cfg)
        gains = gains_from_ladder(src_ladder)
        if kind == "multimode_traditional":
            var, _, snl = multimode_traditional_report(gains, lo)
            return _row(param, value, var, var, snl, kind)
        psa_key = "psa.ladder" if "psa.ladder" in cfg.entries else "source.ladder"
        psa_ladder = _ladder(cfg, psa_key, cfg.get_float("psa.pump"))
        amp = np.abs(lo.xi) + np.abs(lo.zeta)
        if kind == "multimode_psa_single":
            port = int(cfg.entries.get("output.port", "1"))
            amp = np.abs(lo.xi if port == 1 else lo.zeta)
            ins = multimode_psa_single_I(gains, psa_ladder, lo, port)
        else:
            ins = multimode_psa_joint_I(gains, psa_ladder, lo)
        high_gain = (
            below_high_gain(psa_ladder.weights[0] * psa_ladder.pump_strength)
            or not amp[0] > 0
        )
        # normalized units: the SNL of one quadrature pair is 2
        return _row(param, value, ins, ins, 2.0, kind, high_gain)

    nu = cfg.get_float("source.nu")
    if nu is None or nu < 0:
        raise cfg.error("source.nu", "source.nu must be given and >= 0")
    src = SourceSpec.from_nu(nu)
    losses = _losses(cfg)
    gain = None
    if kind == "source":
        rep = source_metrics(src, method)
    elif kind == "traditional_dual_bhd":
        lam = cfg.get_float("combiner.lambda", 1.0)
        if lam == 1.0:
            rep = traditional_metrics(src, losses, method)
        else:
            gain = GainParam.deamplifying(0.0)
            rep = psa_joint_metrics(src, gain, lam, losses, method)
    else:
        gain = _psa_gain(cfg, nu)
        if kind == "psa_joint_bhd":
            rep = psa_joint_metrics(src, gain, cfg.get_float("combiner.lambda", 1.0), losses, method)
        elif kind == "psa_single_bhd":
            port = int(cfg.entries.get("output.port", "1"))
            rep = psa_single_bhd_metrics(src, gain, port, losses, method)
        else:
            p = psa_power_detector_metrics(src, gain, losses, method)
            cutoff = "oracle.n_max" in cfg.entries and not _oracle_confirms(cfg, kind, nu, gain, p.mean)
            return ResultRow(param, value, p.mean, p.mean, p.snl, p.ratio, p.ratio, p.inseparability, kind,
                             False, cutoff)
    cutoff = "oracle.n_max" in cfg.entries and kind != "source" and not _oracle_confirms(
        cfg, kind, nu, gain, rep.var_x_minus)
    return ResultRow(param, value, rep.var_x_minus, rep.var_y_plus, rep.snl, rep.nor_x, rep.nor_y,
                     rep.inseparability, kind, False, cutoff)


def _row(param, value, var_x, var_y, snl, kind, high_gain=False) -> ResultRow:
    nx, ny = var_x / snl, var_y / snl
    return ResultRow(param, value, var_x, var_y, snl, nx, ny, nx + ny, kind, high_gain, False)


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> list[ResultRow]:
    """One row per sweep point, in sweep order; ``jobs > 1`` evaluates points on threads."""
    values = cfg.sweep_values()
    if values is None:
        return [_guarded(cfg, cfg, "", math.nan)]
    param = cfg.entries["sweep.param"]
    points = [(cfg.at(v), float(v)) for v in values]

    def one(item):
        point, v = item
        return _guarded(cfg, point, param, v)

    if jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, points))
    return [one(p) for p in points]


def reevaluate(cfg: ScenarioConfig, row: ResultRow) -> ResultRow:
    """Recompute one row of ``cfg``'s sweep from its recorded swept value."""
    if cfg.sweep_key is None:
        return _guarded(cfg, cfg, "", math.nan)
    return _guarded(cfg, cfg.at(row.value), cfg.entries["sweep.param"], row.value)


def _guarded(cfg: ScenarioConfig, point: ScenarioConfig, param: str, value: float) -> ResultRow:
    try:
        return evaluate_point(point, param, value)
    except ConfigError:
        raise
    except ValueError as exc:
        key = "sweep.range" if param else None
        suffix = f" at {param} = {value:.12g}" if param else ""
        raise ConfigError(f"{exc}{suffix}", cfg.line(key) if key else None, key) from None


# figure presets ----------------------------------------------------------------

@dataclass(frozen=True)
class Curve:
    name: str
    config: ScenarioConfig
    rows: tuple[ResultRow, ...]


PRESETS = ("ent_vs_gain_a", "ent_vs_gain_ratio_b", "loss_jm_a", "loss_single_b")
_NUS = (0.3, 0.6, 2.0)


def _preset_specs(name: str) -> list[tuple[str, dict]]:
    if name == "ent_vs_gain_a":
        specs = [
            (f"nu{nu:g}", {"source.nu": nu, "scheme.kind": "psa_single", "sweep.param": "g", "sweep.range": "0:6:121"})
            for nu in _NUS
        ]
        specs += [
(f"ref_nu{nu:g}", {"source.nu": nu, "scheme.kind": "source"}) for nu in _NUS
        ]
        specs.append(("snl", {"source.nu": 0, "scheme.kind": "source"}))
        return specs
    if name == "ent_vs_gain_ratio_b":
        return [
            (f"nu{nu:g}", {"source.nu": nu, "scheme.kind": "psa_single", "sweep.param": "g_ratio", "sweep.range": "0:5:101"})
            for nu in _NUS
        ]
    if name == "loss_jm_a":
        return [
            (f"g{g}", {"source.nu": 2, "scheme.kind": "psa_joint", "psa.g": g, "combiner.lambda": 1,
                       "sweep.param": "loss", "sweep.range": "0:1:101"})
            for g in (0, 2, 3, 5)
        ]
    if name == "loss_single_b":
        specs = [
            (f"g{g}", {"source.nu": 2, "scheme.kind": "psa_single", "psa.g": g,
                       "sweep.param": "loss", "sweep.range": "0:1:101"})
            for g in (2, 3, 5)
        ]
        specs.append(("ref_Is", {"source.nu": 2, "scheme.kind": "source"}))
        return specs
    raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")


def figure_preset(name: str, jobs: int = 1) -> list[Curve]:
    """Every curve of a figure preset; reference levels are single-row curves."""
    curves = []
    for curve, entries in _preset_specs(name):
        cfg = config_from_mapping(entries)
        curves.append(Curve(f"{name}_{curve}", cfg, tuple(run_scenario(cfg, jobs))))
    return curves


# CSV ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def rows_to_csv(rows: Iterable[ResultRow], cfg: ScenarioConfig, curve: str = "scenario") -> str:
    buf = io.StringIO()
    buf.write(f"# curve={curve} scenario={cfg.to_json()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_csv(path: Path | str, rows: Iterable[ResultRow], cfg: ScenarioConfig, curve: str = "scenario") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows, cfg, curve))
    return path


def write_curves(curves: Sequence[Curve], out_dir: Path | str) -> list[Path]:
    out_dir = Path(out_dir)
    return [write_csv(out_dir / f"{c.name}.csv", c.rows, c.config, c.name) for c in curves]


_META = re.compile(r"^# curve=(\S+) scenario=(\{.*\})$")


def read_csv(path_or_text: Path | str) -> tuple[str, ScenarioConfig, list[ResultRow]]:
    """Parse a file written by :func:`write_csv` back into ``(curve, config, rows)``."""
    text = path_or_text.read_text() if isinstance(path_or_text, Path) else path_or_text
    first, _, body = text.partition("\n")
    m = _META.match(first)
    if not m:
        raise ValueError("missing '# curve=... scenario=...' metadata line")
    cfg = config_from_mapping(json.loads(m.group(2)))
    rows = []
    for rec in csv.DictReader(io.StringIO(body)):
        kw = {}
        for c in COLUMNS:
            if c in ("param", "scheme"):
                kw[c] = rec[c]
            elif c.startswith("flag_"):
                kw[c] = rec[c] == "1"
            else:
                kw[c] = float(rec[c])
        rows.append(ResultRow(**kw))
    return m.group(1), cfg, rows


def row_as_text(row: ResultRow) -> dict[str, str]:
    """Row values as they appear in the CSV, for precision-aware comparison."""
    return {k: _fmt(v) for k, v in asdict(row).items()}
