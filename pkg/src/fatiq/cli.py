"""Command-line entry point: one subcommand per numerical experiment.

Every subcommand reads one config file (or the bundled defaults), writes
CSV artifacts plus a run manifest with content digests, and is
reproducible byte for byte given the same config and seed.  `--check`
re-derives each experiment's acceptance assertions and exits nonzero when
one fails.

Exit codes: 0 success, 2 config error, 3 numeric or domain error,
4 check failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, GridTooShort, HotPointStructureError, SequenceExhausted
from .health import SeededRng, empirical_survival, quantile_nearest_rank, simulate_ncf_constant
from .ibeam import severity_field, severity_grid, moment_inertia, beam_volume
from .laplace import locate_hot_points, table1
from .loading import (
    ConstantLoad,
    GammaPowerLoad,
    gamma_fit,
    load_pdf,
    mc_survival,
    ncf_quantile_det,
    ncf_quantile_sto,
)
from .specimen import (
    miner_damage_prefix,
    miner_ncf,
    sn_quantile,
    survival_from_damage,
    survival_variable,
)
from .structure import compute_q, failure_density, survival_from_power_sum

logger = logging.getLogger(__name__)

Z99 = 2.5758293035489004  # two-sided 99% normal quantile

TABLE1_KS = (4.5, 6.0, 10.0)
TABLE1_TARGETS = {
    4.5: (1.21, 0.36, 0.20, 0.05),
    6.0: (1.11, 0.32, 0.22, 0.04),
    10.0: (0.96, 0.24, 0.27, 0.02),
}
TABLE1_TOL = (0.03, 0.02, 0.02, 0.02)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Run:
    """Collects outputs and check results for one subcommand run."""

    def __init__(self, subcommand: str, cfg: RunConfig, out_dir: Path, seed: int):
        self.subcommand = subcommand
        self.cfg = cfg
        self.out_dir = out_dir
        self.seed = seed
        self.outputs: list[Path] = []
        self.failures: list[str] = []
        self.t0 = time.monotonic()
        out_dir.mkdir(parents=True, exist_ok=True)

    def emit_csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        write_csv(path, header, rows)
        self.outputs.append(path)
        return path

    def emit_json(self, name: str, payload) -> Path:
        path = self.out_dir / name
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.outputs.append(path)
        return path

    def check(self, ok: bool, label: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {self.subcommand}: {label}"
        print(line)
        if not ok:
            self.failures.append(label)

    def manifest(self) -> None:
        payload = {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "config": self.cfg.raw,
            "versions": {
                "fatiq": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "wall_time_s": round(time.monotonic() - self.t0, 3),
            "outputs": [
                {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size}
                for p in self.outputs
            ],
        }
        path = self.out_dir / "run_manifest.json"
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _binomial_band(p: float, n: int) -> float:
    return Z99 * math.sqrt(p * (1.0 - p) / n) + 1.0 / n


def cmd_sn_simulate(run: Run, check: bool) -> None:
    cfg = run.cfg
    params = cfg.params
    rows = []
    samples = {}
    for i, s in enumerate(cfg.sn_severities):
        draws = simulate_ncf_constant(params, s, SeededRng(run.seed, 100 + i), size=cfg.sn_specimens)
        samples[s] = draws
        rows.extend((s, j, draws[j]) for j in range(draws.size))
    run.emit_csv("sn_samples.csv", ["severity_mpa", "specimen", "ncf"], rows)

    s_grid = np.geomspace(min(cfg.sn_severities) / 1.2, max(cfg.sn_severities) * 1.2, 101)
    run.emit_csv(
        "sn_curves.csv",
        ["severity_mpa", "n_p05", "n_p50"],
        [(s, sn_quantile(params, 0.05, s), sn_quantile(params, 0.5, s)) for s in s_grid],
    )
    run.emit_csv(
        "sn_empirical.csv",
        ["severity_mpa", "n_emp_p05", "n_emp_p50", "n_theory_p05", "n_theory_p50"],
        [
            (
                s,
                quantile_nearest_rank(samples[s], 0.05),
                quantile_nearest_rank(samples[s], 0.5),
                sn_quantile(params, 0.05, s),
                sn_quantile(params, 0.5, s),
            )
            for s in cfg.sn_severities
        ],
    )
    if check:
        for p in (0.05, 0.5):
            band = _binomial_band(p, cfg.sn_specimens)
            ok = all(
                abs(np.mean(samples[s] <= sn_quantile(params, p, s)) - p) <= band
                for s in cfg.sn_severities
            )
            run.check(ok, f"empirical p={p} failure fractions inside 99% binomial bands")


def cmd_miner_demo(run: Run, check: bool) -> None:
    cfg = run.cfg
    params, seq = cfg.params, cfg.miner_sequence
    total = seq.total_cycles
    grid = np.unique(np.round(np.geomspace(max(1.0, total * 1e-4), total, 400)))
    damage = {p: miner_damage_prefix(params, p, seq, grid) for p in (0.05, 0.5)}
    surv = survival_variable(params, seq, grid)
    run.emit_csv(
        "miner_curves.csv",
        ["n", "survival", "damage_p05", "damage_p50"],
        zip(grid, surv, damage[0.05], damage[0.5]),
    )
    ncf_rows = []
    for p in (0.05, 0.5):
        crossing = miner_ncf(params, p, seq)
        ncf_rows.append((p, crossing.n_real, crossing.n_cycles))
    run.emit_csv("miner_ncf.csv", ["p", "n_real", "n_cycles"], ncf_rows)
    if check:
        for p, n_real, _ in ncf_rows:
            at_crossing = survival_variable(params, seq, n_real)
            run.check(
                abs(at_crossing - (1.0 - p)) < 1e-9,
                f"survival at the damage-1 crossing equals 1-p for p={p}",
            )
        ident = np.max(
            np.abs(
                survival_from_damage(params.m, 0.05, damage[0.05])
                - survival_from_damage(params.m, 0.5, damage[0.5])
            )
        )
        run.check(ident < 1e-12, "survival identity is p-independent to 1e-12")


def _structure_constant(cfg: RunConfig):
    cells = severity_grid(cfg.geometry, cfg.grid)
    return cells, compute_q(cells, cfg.size_effect_model())


def cmd_beam(run: Run, check: bool) -> None:
    cfg = run.cfg
    geom = cfg.geometry
    cells, qc = _structure_constant(cfg)

    ys = np.linspace(0.0, geom.h / 2.0, 6)
    xs = np.linspace(0.0, geom.length, 401)
    slice_rows = []
    for y in ys:
        vals = severity_field(geom, xs, y, 0.0)
        slice_rows.extend((x, y, 0.0, v) for x, v in zip(xs, vals))
    run.emit_csv("severity_slices.csv", ["x", "y", "z", "s_u"], slice_rows)

    density = failure_density(cells, cfg.params.m, cfg.params.alpha)
    in_flange = np.abs(cells.positions[:, 1]) >= geom.web_half_height
    run.emit_csv(
        "beam_summary.csv",
        ["q", "alpha", "m", "i_z", "volume_m3", "n_cells", "density_mass_total", "density_mass_flange"],
        [
            (
                qc.q,
                qc.alpha,
                qc.m,
                moment_inertia(geom),
                cells.total_measure,
                cells.n_cells,
                float(np.sum(density.weights)),
                float(np.sum(density.weights[in_flange])),
            )
        ],
    )

    k = cfg.params.alpha * cfg.params.m
    map_x = np.linspace(0.0, geom.length / 2.0, 201)
    map_y = np.linspace(0.0, geom.h / 2.0, 101)
    i_total = qc.q * cfg.lambda_ref * cfg.params.kappa**cfg.params.m
    map_rows = []
    for y in map_y:
        vals = severity_field(geom, map_x, y, 0.0) ** k / i_total
        map_rows.extend((x, y, v) for x, v in zip(map_x, vals))
    run.emit_csv("failure_density_map.csv", ["x", "y", "p_fail"], map_rows)

    grid = cfg.mc_config(seed=run.seed).n_grid
    surv_rows = []
    curves = {}
    for p_load in cfg.p_values:
        prob = survival_from_power_sum(qc, grid * p_load**qc.alpha)
        curves[p_load] = prob
        surv_rows.extend((p_load, n, v) for n, v in zip(grid, prob))
    run.emit_csv("survival_constant_load.csv", ["p_mn", "n", "survival"], surv_rows)

    if check:
        run.check(
            abs(float(np.sum(density.weights)) - 1.0) < 1e-9,
            "failure-point masses sum to 1 within 1e-9",
        )
        probe_x = np.linspace(0.05, geom.length / 2.0, 23)
        probe = severity_field(geom, probe_x, geom.h / 2.0, 0.0)
        mirror = severity_field(geom, geom.length - probe_x, geom.h / 2.0, 0.0)
        run.check(
            float(np.max(np.abs(probe / mirror - 1.0))) < 1e-12,
            "failure density map symmetric under x -> L - x",
        )
        loads = sorted(cfg.p_values)
        ordered = True
        for lo, hi in zip(loads, loads[1:]):
            diff = curves[lo] - curves[hi]
            both_interior = (curves[lo] > 1e-12) & (curves[lo] < 1.0 - 1e-12)
            ordered &= bool(np.all(diff >= 0.0) and np.all(diff[both_interior] > 0.0))
        run.check(ordered, "survival curves ordered by load pointwise")


def cmd_random_load(run: Run, check: bool) -> None:
    cfg = run.cfg
    _, qc = _structure_constant(cfg)
    mc = cfg.mc_config(seed=run.seed)

    density_rows = []
    models = {}
    for c in cfg.c_values:
        model = gamma_fit(cfg.p_mean, c, qc.alpha)
        models[c] = model
        if isinstance(model, GammaPowerLoad):
            p_grid = np.linspace(cfg.p_mean * 0.01, cfg.p_mean * (1.0 + 5.0 * c), 400)
            density_rows.extend((c, p, v) for p, v in zip(p_grid, load_pdf(model, p_grid)))
    run.emit_csv("load_density.csv", ["c", "p_mn", "pdf"], density_rows)

    surv_rows = []
    medians = {}
    for c in sorted(models):
        curve = mc_survival(qc, models[c], mc)
        medians[c] = ncf_quantile_sto(curve, 0.5)
        stderr = curve.stderr if curve.stderr is not None else np.zeros_like(curve.prob)
        surv_rows.extend(
            (c, n, v, se) for n, v, se in zip(curve.n, curve.prob, stderr)
        )
    run.emit_csv("survival_random_load.csv", ["c", "n", "survival", "stderr"], surv_rows)
    run.emit_csv(
        "median_ncf.csv", ["c", "median_ncf"], [(c, medians[c]) for c in sorted(medians)]
    )

    if check:
        gen = SeededRng(run.seed, 999).generator()
        ok_mean, ok_cv = True, True
        for c, model in models.items():
            if isinstance(model, ConstantLoad):
                continue
            draws = gen.gamma(model.a, 1.0 / model.theta, size=10**6) ** (1.0 / model.alpha)
            ok_mean &= abs(float(np.mean(draws)) / cfg.p_mean - 1.0) < 0.005
            ok_cv &= abs(float(np.std(draws, ddof=1) / np.mean(draws)) / c - 1.0) < 0.01
        run.check(ok_mean, "sampled load means within 0.5% of the target mean")
        run.check(ok_cv, "sampled load CVs within 1% of their targets")
        cs = sorted(medians)
        run.check(
            all(medians[hi] < medians[lo] for lo, hi in zip(cs, cs[1:])),
            "median NCF strictly decreasing in c",
        )
        if 0.0 in models:
            closed = ncf_quantile_det(qc, cfg.p_mean, 0.5)
            run.check(
                abs(medians[0.0] / closed - 1.0) < 0.01,
                "c=0 median matches the closed form within 1%",
            )


def cmd_equiv_load(run: Run, check: bool) -> None:
    cfg = run.cfg
    _, qc = _structure_constant(cfg)
    mc = cfg.mc_config(seed=run.seed)
    probs = (0.05, 0.5)
    rows = []
    ratios = {p: [] for p in probs}
    for c in sorted(cfg.c_values):
        model = gamma_fit(cfg.p_mean, c, qc.alpha)
        curve = mc_survival(qc, model, mc)
        for p in probs:
            n_sto = ncf_quantile_sto(curve, p)
            p_eq = (
                (-math.log1p(-p)) ** (1.0 / qc.m) / (qc.q ** (1.0 / qc.m) * n_sto)
            ) ** (1.0 / qc.alpha)
            rows.append((c, p, p_eq, p_eq / cfg.p_mean))
            ratios[p].append(p_eq / cfg.p_mean)
    run.emit_csv("equiv_load.csv", ["c", "p", "p_eq_mn", "ratio"], rows)

    # p-insensitivity of the ratio is observed, not guaranteed: log, don't assert
    spread = max(abs(a / b - 1.0) for a, b in zip(ratios[probs[0]], ratios[probs[1]]))
    if spread > 0.02:
        logger.info(
            "equivalent-load ratios differ by %.1f%% between p=0.05 and p=0.5", 100 * spread
        )

    if check:
        cs = sorted(cfg.c_values)
        for p in probs:
            if 0.0 in cs:
                at0 = ratios[p][cs.index(0.0)]
                run.check(abs(at0 - 1.0) < 0.01, f"ratio at c=0 equals 1 within 1% for p={p}")
            nondecreasing = all(
                b >= a * (1.0 - 1e-9) for a, b in zip(ratios[p], ratios[p][1:])
            )
            run.check(nondecreasing, f"equivalent-load ratio nondecreasing in c for p={p}")


def cmd_laplace(run: Run, check: bool, ks) -> None:
    cfg = run.cfg
    rows = table1(cfg.geometry, cfg.grid, ks)
    run.emit_csv(
        "table1.csv",
        [
            "k",
            "ratio",
            "fraction_i1",
            "web_fraction_1",
            "web_fraction_2",
            "i1",
            "i2",
            "i_quadrature",
        ],
        [
            (r.k, r.ratio, r.fraction_i1, r.web_fraction_1, r.web_fraction_2, r.i1, r.i2, r.i_quadrature)
            for r in rows
        ],
    )
    hp1, hp2 = locate_hot_points(cfg.geometry)
    payload = {}
    for name, hp in (("corner", hp1), ("flange_edge", hp2)):
        payload[name] = {
            "position": [hp.x, hp.y, hp.z],
            "severity": hp.severity,
            "log_severity_derivatives": hp.derivatives,
            "delta": [hp.delta_x, hp.delta_y, hp.delta_z],
            "characteristic_lengths": {
                str(k): (
                    [hp.delta_x / k, hp.delta_y / math.sqrt(k), hp.delta_z / k]
                    if name == "corner"
                    else [hp.delta_x / math.sqrt(k), hp.delta_y / k, hp.delta_z / k]
                )
                for k in ks
            },
        }
    run.emit_json("hotpoints.json", payload)

    if check:
        by_k = {r.k: r for r in rows}
        for k, targets in TABLE1_TARGETS.items():
            if k not in by_k:
                continue
            r = by_k[k]
            values = (r.ratio, r.fraction_i1, r.web_fraction_1, r.web_fraction_2)
            ok = all(abs(v - t) <= tol for v, t, tol in zip(values, targets, TABLE1_TOL))
            run.check(ok, f"approximation-quality row k={k} within tolerances")
        ordered = [by_k[k].ratio for k in sorted(by_k)]
        run.check(
            all(abs(b - 1.0) < abs(a - 1.0) for a, b in zip(ordered, ordered[1:])),
            "|ratio - 1| decreases as k grows",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fatiq",
        description="Probabilistic fatigue-life experiments on the bundled I-beam example.",
    )
    parser.add_argument("--version", action="version", version=f"fatiq {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    names = {
        "sn-simulate": "simulate a constant-severity fatigue test campaign",
        "miner-demo": "survival and damage curves for a variable-severity sequence",
        "beam": "severity field, structure constant and failure density of the beam",
        "random-load": "survival under random i.i.d. loads",
        "equiv-load": "deterministic equivalent load vs coefficient of variation",
        "laplace": "hot-point approximation quality table",
    }
    for name, help_text in names.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="INI config file")
        p.add_argument("--out-dir", type=Path, default=Path("fatiq-out"), help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override [mc] seed")
        p.add_argument("--replications", type=int, default=None, help="override [mc] replications")
        p.add_argument(
            "--n-grid",
            type=str,
            default=None,
            metavar="MIN:MAX:POINTS",
            help="override the survival-curve cycle grid",
        )
        p.add_argument("--check", action="store_true", help="run acceptance assertions")
        if name == "laplace":
            p.add_argument(
                "--k",
                type=str,
                default="4.5,6,10",
                help="comma-separated severity exponents",
            )
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    import dataclasses

    updates = {}
    if args.replications is not None:
        if args.replications < 1:
            raise ConfigError("--replications must be >= 1")
        updates["replications"] = args.replications
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.n_grid is not None:
        try:
            n_min, n_max, points = args.n_grid.split(":")
            updates.update(n_min=float(n_min), n_max=float(n_max), n_points=int(points))
        except ValueError as exc:
            raise ConfigError(f"--n-grid expects MIN:MAX:POINTS, got {args.n_grid!r}") from exc
        if updates["n_min"] <= 0 or updates["n_max"] <= updates["n_min"] or updates["n_points"] < 2:
            raise ConfigError(f"--n-grid values out of range: {args.n_grid!r}")
    if not updates:
        return cfg
    raw = dict(cfg.raw)
    raw["mc"] = dict(raw.get("mc", {}))
    for key, value in updates.items():
        if key in ("replications", "seed", "n_min", "n_max", "n_points"):
            raw["mc"][{"replications": "replications", "seed": "seed", "n_min": "n_min", "n_max": "n_max", "n_points": "n_points"}[key]] = str(value)
    return dataclasses.replace(cfg, raw=raw, **updates)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if os.environ.get("FATIQ_THREADS"):
        logger.info("parallelism capped at FATIQ_THREADS=%s", os.environ["FATIQ_THREADS"])
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        run = Run(args.subcommand, cfg, args.out_dir, cfg.seed)
        if args.subcommand == "sn-simulate":
            cmd_sn_simulate(run, args.check)
        elif args.subcommand == "miner-demo":
            cmd_miner_demo(run, args.check)
        elif args.subcommand == "beam":
            cmd_beam(run, args.check)
        elif args.subcommand == "random-load":
            cmd_random_load(run, args.check)
        elif args.subcommand == "equiv-load":
            cmd_equiv_load(run, args.check)
        elif args.subcommand == "laplace":
            try:
                ks = tuple(float(tok) for tok in args.k.split(","))
            except ValueError as exc:
                raise ConfigError(f"--k expects comma-separated numbers, got {args.k!r}") from exc
            cmd_laplace(run, args.check, ks)
        run.manifest()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, SequenceExhausted, GridTooShort, HotPointStructureError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    if args.check and run.failures:
        print(f"{len(run.failures)} check(s) failed", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
