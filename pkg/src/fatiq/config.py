"""Run configuration: one INI-style file drives every subcommand.

Sections and keys (all optional; missing values fall back to the bundled
worked-example defaults):

    [specimen]  m, alpha, lambda_ref and either kappa or (p, n_p, s_p)
    [beam]      b, f, h, e, length, dx, dy, dz_web, dz_flange
    [load]      p_mean, c_values, p_values
    [mc]        replications, seed, n_min, n_max, n_points
    [sn_simulate]  severities, specimens
    [miner_demo]   sequence (severity:count pairs), repeats, sequence_csv

Validation happens at parse time: any value violating a model invariant
is rejected with a section.key diagnostic before computation starts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .ibeam import BeamGeometry, BeamGrid
from .loading import McConfig
from .specimen import DetailCategory, SeveritySequence, WeibullBasquinParams, load_severity_csv
from .structure import SizeEffectModel

__all__ = ["RunConfig", "load_config"]

DEFAULTS = {
    "specimen": {
        "m": "1.5",
        "alpha": "3.0",
        "p": "0.05",
        "n_p": "2e6",
        "s_p": "200.0",
        "lambda_ref": "3e-5",
    },
    "beam": {
        "b": "0.65",
        "f": "0.012",
        "h": "1.315",
        "e": "0.06",
        "length": "20.0",
        "dx": "0.02",
        "dy": "0.005",
        "dz_web": "0.002",
        "dz_flange": "0.01",
    },
    "load": {
        "p_mean": "0.25",
        "c_values": "0 0.2 0.5 1",
        "p_values": "0.15 0.2 0.25 0.3 0.35",
    },
    "mc": {
        "replications": "10000",
        "seed": "20260810",
        "n_min": "1e3",
        "n_max": "1e9",
        "n_points": "200",
    },
    "sn_simulate": {
        "severities": "150 200 250 300 350",
        "specimens": "50",
    },
    "miner_demo": {
        "sequence": "280:50000 160:150000",
        "repeats": "60",
        "sequence_csv": "",
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters for one run."""

    params: WeibullBasquinParams
    lambda_ref: float
    geometry: BeamGeometry
    grid: BeamGrid
    p_mean: float
    c_values: tuple[float, ...]
    p_values: tuple[float, ...]
    replications: int
    seed: int
    n_min: float
    n_max: float
    n_points: int
    sn_severities: tuple[float, ...]
    sn_specimens: int
    miner_sequence: SeveritySequence
    raw: dict = field(repr=False, default_factory=dict)

    def mc_config(self, replications: int | None = None, seed: int | None = None) -> McConfig:
        return McConfig.log_grid(
            replications=replications if replications is not None else self.replications,
            n_min=self.n_min,
            n_max=self.n_max,
            points=self.n_points,
            master_seed=seed if seed is not None else self.seed,
        )

    def size_effect_model(self) -> SizeEffectModel:
        return SizeEffectModel(
            m=self.params.m,
            alpha=self.params.alpha,
            kappa_ref=self.params.kappa,
            lambda_ref=self.lambda_ref,
        )


def _merged(path: Path | None) -> tuple[configparser.ConfigParser, dict]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_dict(DEFAULTS)
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as fh:
                parser.read_file(fh, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        for section in parser.sections():
            if section not in DEFAULTS:
                raise ConfigError(f"unknown config section [{section}]")
            for key in parser[section]:
                if key not in DEFAULTS[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
    snapshot = {s: dict(parser[s]) for s in parser.sections()}
    return parser, snapshot


def _int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(raw)
    return int(value)


def _get(parser, section, key, conv, positive=False):
    raw = parser.get(section, key)
    try:
        value = conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from exc
    if positive and value <= 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {raw!r}")
    return value


def _floats(parser, section, key) -> tuple[float, ...]:
    raw = parser.get(section, key).replace(",", " ")
    try:
        return tuple(float(tok) for tok in raw.split())
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse list {raw!r}") from exc


def _parse_sequence(parser) -> SeveritySequence:
    csv_path = parser.get("miner_demo", "sequence_csv").strip()
    if csv_path:
        try:
            seq = load_severity_csv(csv_path)
        except (OSError, DomainError) as exc:
            raise ConfigError(f"miner_demo.sequence_csv: {exc}") from exc
    else:
        blocks = []
        for token in parser.get("miner_demo", "sequence").replace(",", " ").split():
            try:
                severity, count = token.split(":")
                blocks.append((float(severity), int(float(count))))
            except ValueError as exc:
                raise ConfigError(
                    f"miner_demo.sequence: expected severity:count pairs, got {token!r}"
                ) from exc
        if not blocks:
            raise ConfigError("miner_demo.sequence: empty sequence")
        try:
            seq = SeveritySequence(tuple(blocks))
        except DomainError as exc:
            raise ConfigError(f"miner_demo.sequence: {exc}") from exc
    repeats = _get(parser, "miner_demo", "repeats", _int, positive=True)
    return seq.repeated(repeats)


def load_config(path: Path | str | None = None) -> RunConfig:
    """Parse and validate a config file (or the defaults when path is None)."""
    parser, snapshot = _merged(None if path is None else Path(path))
    try:
        m = _get(parser, "specimen", "m", float, positive=True)
        alpha = _get(parser, "specimen", "alpha", float, positive=True)
        if parser.has_option("specimen", "kappa"):
            params = WeibullBasquinParams(m=m, alpha=alpha, kappa=_get(parser, "specimen", "kappa", float, positive=True))
        else:
            detail = DetailCategory(
                p=_get(parser, "specimen", "p", float),
                n_p=_get(parser, "specimen", "n_p", float, positive=True),
                s_p=_get(parser, "specimen", "s_p", float, positive=True),
            )
            params = WeibullBasquinParams.from_detail(m, alpha, detail)
        geometry = BeamGeometry(
            b=_get(parser, "beam", "b", float, positive=True),
            f=_get(parser, "beam", "f", float, positive=True),
            h=_get(parser, "beam", "h", float, positive=True),
            e=_get(parser, "beam", "e", float, positive=True),
            length=_get(parser, "beam", "length", float, positive=True),
        )
        grid = BeamGrid(
            dx=_get(parser, "beam", "dx", float, positive=True),
            dy=_get(parser, "beam", "dy", float, positive=True),
            dz_web=_get(parser, "beam", "dz_web", float, positive=True),
            dz_flange=_get(parser, "beam", "dz_flange", float, positive=True),
        )
        config = RunConfig(
            params=params,
            lambda_ref=_get(parser, "specimen", "lambda_ref", float, positive=True),
            geometry=geometry,
            grid=grid,
            p_mean=_get(parser, "load", "p_mean", float, positive=True),
            c_values=_floats(parser, "load", "c_values"),
            p_values=_floats(parser, "load", "p_values"),
            replications=_get(parser, "mc", "replications", _int, positive=True),
            seed=_get(parser, "mc", "seed", _int),
            n_min=_get(parser, "mc", "n_min", float, positive=True),
            n_max=_get(parser, "mc", "n_max", float, positive=True),
            n_points=_get(parser, "mc", "n_points", _int, positive=True),
            sn_severities=_floats(parser, "sn_simulate", "severities"),
            sn_specimens=_get(parser, "sn_simulate", "specimens", _int, positive=True),
            miner_sequence=_parse_sequence(parser),
            raw=snapshot,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if any(c < 0 for c in config.c_values):
        raise ConfigError("load.c_values: coefficients of variation must be >= 0")
    if any(p <= 0 for p in config.p_values):
        raise ConfigError("load.p_values: loads must be positive")
    if any(s <= 0 for s in config.sn_severities):
        raise ConfigError("sn_simulate.severities: severities must be positive")
    if config.n_max <= config.n_min:
        raise ConfigError("mc.n_max must exceed mc.n_min")
    return config

