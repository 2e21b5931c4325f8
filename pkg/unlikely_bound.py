#!/usr/bin/env python3
"""
unlikely_bound.py — degree bound pipeline for parameters c where both a and b
are preperiodic under z^2 + c.

Stages (each runnable on its own from files):
  build-poly   f_c^n(a) - a in Z[c], integer roots divided out   -> poly_a{a}_n{n}.txt
  solve-roots  all complex roots, certified at extended precision -> roots_a{a}_n{n}.csv
  energy       regularized self/cross energies of root clouds     -> energy_*.json
  bound        lower bound on d_inf(mu_a, mu_b), UB curve, degree -> bound.json
  run          all of the above for the witnesses of a and b      -> report.json

Usage:
  python3 unlikely_bound.py run --out out/
  python3 unlikely_bound.py run --config pipeline.conf.json --threads 4 --report text
  python3 unlikely_bound.py build-poly --a 0 --n 11 --out out/
  python3 unlikely_bound.py solve-roots --poly out/poly_a0_n11.txt --out out/
  python3 unlikely_bound.py energy --self out/roots_a1_n11.csv --eps 9.556e-7
  python3 unlikely_bound.py bound --alpha out/roots_a1_n11.csv --beta out/roots_a0_n11.csv
  python3 unlikely_bound.py bound --lower-bound 0.566325

Exit codes: 0 ok, 1 stage error, 2 invalid config, 3 certification failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

from bounds import (
    PUBLISHED_CONSTANTS,
    BoundReport,
    EpsilonRule,
    LowerBound,
    NoBound,
    assemble_lower_bound,
    build_bound_report,
    format_bound_table,
    solve_max_degree,
    upper_bound_curve,
)
from critpoly import (
    DeflationError,
    IntPoly,
    IterationSpec,
    PolyFile,
    PolyFormatError,
    deflate_integer_roots,
    iterate_orbit_poly,
    read_poly_text,
    write_poly_text,
)
from energy import (
    EXACT_QUADRATURE,
    PAPER_BOUND,
    DiscreteMeasure,
    EnergyError,
    discrete_energy,
    regularized_cross_energy,
    regularized_self_energy,
    write_energy_json,
)
from mandel import MembershipSummary, PointCloudError, emit_point_cloud, membership_summary
from rootsolve import (
    CertificationReport,
    ConjugateSet,
    RootSolveError,
    RootsFormatError,
    SolverSettings,
    certify,
    evaluator_for,
    read_roots_csv,
    root_disc_radius,
    solve_all_roots,
    write_roots_csv,
)
from validate_config import validate_config

MODE_BOTH = "both"
PIPELINE_MODES = (PAPER_BOUND, EXACT_QUADRATURE, MODE_BOTH)
REPORT_FORMATS = ("json", "text")
REPORT_SCHEMA = 1

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_CONFIG = 2
EXIT_CERT = 3

# Knobs that change how a run executes, not what it computes; kept out of the report.
EXECUTION_KEYS = ("threads", "out_dir", "report_format")

Say = Callable[[str], None]


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


class ConfigError(ValueError):
    pass


def _quiet(_: str) -> None:
    pass


def printer(quiet: bool) -> Say:
    return _quiet if quiet else print


# ---------------- configuration ----------------

@dataclass
class PipelineConfig:
    a: int = 0
    b: int = 1
    n: int = 11
    eps_witness: Union[float, str] = "auto"
    mode: str = PAPER_BOUND
    residual_tol: float = 1e-10
    step_tol: float = 1e-12
    min_separation: float = 1e-8
    conjugate_tol: float = 1e-10
    max_sweeps: int = 2000
    polish_prec: int = 106
    certify_prec: int = 212
    membership_iter: int = 10_000
    return_tol: float = 1e-8
    ub_eps_exponent: float = 2.0
    ub_window: int = 5
    scan_cap: int = 10 ** 6
    threads: int = 1
    out_dir: str = "out"
    report_format: str = "json"

    def __post_init__(self) -> None:
        for name in ("a", "b", "n", "max_sweeps", "polish_prec", "certify_prec",
                     "membership_iter", "ub_window", "scan_cap", "threads"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.mode not in PIPELINE_MODES:
            raise ConfigError(f"mode must be one of {', '.join(PIPELINE_MODES)}, got {self.mode!r}")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"report_format must be json or text, got {self.report_format!r}")
        if self.eps_witness != "auto":
            if isinstance(self.eps_witness, bool) or not isinstance(self.eps_witness, (int, float)) \
                    or not self.eps_witness > 0:
                raise ConfigError(f"eps_witness must be 'auto' or a positive number, got {self.eps_witness!r}")
            self.eps_witness = float(self.eps_witness)
        for name in ("residual_tol", "step_tol", "min_separation", "conjugate_tol", "ub_eps_exponent"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def result_dict(self) -> dict:
        return {k: v for k, v in self.to_dict().items() if k not in EXECUTION_KEYS}

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(
            residual_tol=self.residual_tol,
            step_tol=self.step_tol,
            min_separation=self.min_separation,
            max_sweeps=self.max_sweeps,
            polish_prec=self.polish_prec,
            certify_prec=self.certify_prec,
        )

    def witness_specs(self) -> tuple[IterationSpec, IterationSpec]:
        """(alpha, beta): the periodicity equations for b and for a."""
        return IterationSpec.periodic(self.b, self.n), IterationSpec.periodic(self.a, self.n)

    def witness_epsilon(self, *degrees: int) -> float:
        if self.eps_witness != "auto":
            return float(self.eps_witness)
        d = max(degrees)
        if d < 1:
            raise ConfigError("cannot choose eps automatically for an empty witness")
        return 1.0 / (d * d)

    def energy_modes(self) -> tuple[str, ...]:
        if self.mode == MODE_BOTH:
            return (PAPER_BOUND, EXACT_QUADRATURE)
        return (self.mode,)

    def ub_rule(self) -> EpsilonRule:
        return EpsilonRule(exponent=self.ub_eps_exponent)


def load_config(path: Optional[str], overrides: dict) -> PipelineConfig:
    data = validate_config(path) if path else {}
    return PipelineConfig.from_dict(data).with_overrides(**overrides)


# ---------------- file names ----------------

def _stem(spec: IterationSpec) -> str:
    return f"a{spec.a}_n{spec.n}"


def poly_path(out_dir: Union[str, Path], spec: IterationSpec) -> Path:
    return Path(out_dir) / f"poly_{_stem(spec)}.txt"


def roots_path(out_dir: Union[str, Path], spec: IterationSpec) -> Path:
    return Path(out_dir) / f"roots_{_stem(spec)}.csv"


def cloud_path(out_dir: Union[str, Path], spec: IterationSpec) -> Path:
    return Path(out_dir) / f"cloud_{_stem(spec)}.csv"


# ---------------- stages ----------------

def stage_build_poly(spec: IterationSpec, out_dir: Union[str, Path]) -> tuple[PolyFile, Path]:
    try:
        deflated, removed = deflate_integer_roots(iterate_orbit_poly(spec))
        path = write_poly_text(poly_path(out_dir, spec), deflated, spec, removed)
    except (DeflationError, OSError, ValueError) as e:
        raise StageError("build-poly", str(e)) from e
    return PolyFile(poly=deflated, spec=spec, removed=tuple(removed)), path


@dataclass
class WitnessResult:
    spec: IterationSpec
    poly: IntPoly
    removed: tuple[int, ...]
    roots: ConjugateSet
    certification: CertificationReport
    membership: MembershipSummary
    disc_radius: float
    roots_file: Path

    @property
    def inside_disc(self) -> bool:
        return self.membership.max_abs <= self.disc_radius

    @property
    def passed(self) -> bool:
        return self.certification.passed and self.membership.passed and self.inside_disc

    def boundary_coefficients(self, low: int = 6, high: int = 3) -> dict:
        coeffs = self.poly.coeffs
        return {"low": list(coeffs[:low]), "high": list(coeffs[-high:]) if coeffs else []}

    def to_dict(self) -> dict:
        return {
            "label": self.spec.label,
            "a": self.spec.a,
            "n": self.spec.n,
            "degree": self.poly.degree,
            "removed": list(self.removed),
            "boundary_coefficients": self.boundary_coefficients(),
            "roots_file": self.roots_file.name,
            "certification": self.certification.to_dict(),
            "membership": self.membership.to_dict(),
            "disc_radius": self.disc_radius,
            "inside_disc": self.inside_disc,
            "passed": self.passed,
        }


def stage_solve_roots(poly_file: PolyFile, cfg: PipelineConfig, out_dir: Union[str, Path]) -> WitnessResult:
    spec = poly_file.spec
    if spec is None or spec.a != spec.b:
        raise StageError("solve-roots", "polynomial file carries no periodicity header (a=.. b=a n=..)")
    ev = evaluator_for(spec, poly_file.removed)
    if ev.degree != poly_file.poly.degree:
        raise StageError("solve-roots", f"header says degree {poly_file.poly.degree}, "
                                        f"evaluator for {spec.label} has degree {ev.degree}")
    try:
        roots = solve_all_roots(ev, ev.degree, cfg.solver_settings(), label=spec.label)
        path = write_roots_csv(roots_path(out_dir, spec), roots)
        emit_point_cloud(roots, cloud_path(out_dir, spec))
        roots = read_roots_csv(path)
    except (RootSolveError, RootsFormatError, PointCloudError, OSError) as e:
        raise StageError("solve-roots", str(e)) from e

    report = certify(roots, ev, tol=cfg.residual_tol, prec=cfg.certify_prec,
                     min_separation=cfg.min_separation, conjugate_tol=cfg.conjugate_tol)
    member = membership_summary(roots.points, spec.a, cfg.membership_iter, cfg.return_tol)
    return WitnessResult(spec=spec, poly=poly_file.poly, removed=poly_file.removed, roots=roots,
                         certification=report, membership=member,
                         disc_radius=root_disc_radius(spec.a), roots_file=path)


def stage_lower_bounds(alpha: ConjugateSet, beta: ConjugateSet, cfg: PipelineConfig,
                       say: Say = _quiet) -> dict[str, LowerBound]:
    """One lower bound per requested energy mode; discrete self energies are shared."""
    out: dict[str, LowerBound] = {}
    try:
        eps = cfg.witness_epsilon(alpha.degree, beta.degree)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            mu = DiscreteMeasure.uniform(alpha.points)
            nu = DiscreteMeasure.uniform(beta.points)
            alpha_self = discrete_energy(mu, mu, workers=cfg.threads)
            beta_self = discrete_energy(nu, nu, workers=cfg.threads)
            for mode in cfg.energy_modes():
                out[mode] = assemble_lower_bound(mu, nu, eps, mode=mode, workers=cfg.threads,
                                                 alpha_self=alpha_self, beta_self=beta_self)
        for w in caught:
            say(f"[WARN] {w.message}")
    except (EnergyError, ConfigError) as e:
        raise StageError("energy", str(e)) from e
    return out


def stage_bound(lower_bounds: dict[str, LowerBound], labels: tuple[str, str],
                cfg: PipelineConfig) -> BoundReport:
    primary = lower_bounds.get(PAPER_BOUND) or lower_bounds[EXACT_QUADRATURE]
    exact = lower_bounds.get(EXACT_QUADRATURE) if PAPER_BOUND in lower_bounds else None
    try:
        return build_bound_report(primary, cfg.ub_rule(), witness_labels=labels,
                                  window=cfg.ub_window, exact=exact, cap=cfg.scan_cap)
    except (NoBound, ValueError) as e:
        raise StageError("bound", str(e)) from e


def bound_from_roots_files(alpha_file: Union[str, Path], beta_file: Union[str, Path],
                           cfg: PipelineConfig, say: Say = _quiet
                           ) -> tuple[dict[str, LowerBound], BoundReport]:
    try:
        alpha = read_roots_csv(alpha_file)
        beta = read_roots_csv(beta_file)
    except RootsFormatError as e:
        raise StageError("bound", str(e)) from e
    lower_bounds = stage_lower_bounds(alpha, beta, cfg, say)
    return lower_bounds, stage_bound(lower_bounds, (alpha.label, beta.label), cfg)


# ---------------- report ----------------

def energy_columns(lb: LowerBound) -> dict:
    e = lb.energies
    return {
        "epsilon": lb.epsilon,
        "regularized_self_alpha": e.self_mu.to_dict(),
        "regularized_self_beta": e.self_nu.to_dict(),
        "cross": e.cross.to_dict(),
        "minus_two_cross": -2.0 * e.cross.total,
        "radicand": e.radicand,
        "distance": e.distance,
    }


def published_comparison(lb: LowerBound) -> list[dict]:
    e = lb.energies
    computed = {
        "discrete_self_alpha": lb.alpha_self_discrete,
        "discrete_self_beta": lb.beta_self_discrete,
        "regularized_self_alpha": e.self_mu.total,
        "regularized_self_beta": e.self_nu.total,
        "minus_two_cross": -2.0 * e.cross.total,
        "lower_bound_proposition": lb.value,
        "lower_bound_theorem": lb.value,
    }
    return [
        {"name": key, "published": value, "computed": computed[key], "delta": computed[key] - value}
        for key, value in PUBLISHED_CONSTANTS.items()
    ]


def build_report(cfg: PipelineConfig, witnesses: dict[str, WitnessResult],
                 lower_bounds: dict[str, LowerBound], bound: BoundReport) -> dict:
    primary = bound.lower_bound
    return {
        "schema": REPORT_SCHEMA,
        "config": cfg.result_dict(),
        "witnesses": {role: w.to_dict() for role, w in witnesses.items()},
        "certified": all(w.passed for w in witnesses.values()),
        "discrete_self": {"alpha": primary.alpha_self_discrete, "beta": primary.beta_self_discrete},
        "energies": {mode: energy_columns(lb) for mode, lb in lower_bounds.items()},
        "published_constants": published_comparison(primary),
        "bound": bound.to_dict(),
        "lower_bound": primary.value,
        "max_degree": bound.max_degree,
    }


def format_text_report(report: dict) -> str:
    lines = [f"schema {report['schema']}  certified={report['certified']}"]
    for role, w in report["witnesses"].items():
        cert = w["certification"]
        lines.append(f"{role:<6} {w['label']:<12} degree {w['degree']:<6} "
                     f"max residual {cert['max_residual']:.2e}  min sep {cert['min_separation']:.2e}  "
                     f"|c| <= {w['membership']['max_abs']:.4f} (disc {w['disc_radius']:.4f})  "
                     f"{'ok' if w['passed'] else 'FAILED'}")
    lines.append("")
    lines.append(f"{'constant':<26}{'published':>14}{'computed':>16}{'delta':>14}")
    for row in report["published_constants"]:
        lines.append(f"{row['name']:<26}{row['published']:>14.6f}{row['computed']:>16.8f}"
                     f"{row['delta']:>+14.2e}")
    lines.append("")
    lines.append(format_bound_table(report["bound"]))
    return "\n".join(lines)


def write_report(report: dict, out_dir: Union[str, Path], fmt: str = "json") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    if fmt == "text":
        text_path = out / "report.txt"
        text_path.write_text(format_text_report(report) + "\n")
        return text_path
    return path


def _read_poly(path: Union[str, Path], stage: str) -> PolyFile:
    try:
        return read_poly_text(path)
    except PolyFormatError as e:
        raise StageError(stage, str(e)) from e


def _log_witness(say: Say, role: str, w: WitnessResult) -> None:
    cert = w.certification
    say(f"[ROOTS] {role} {w.spec.label}: {cert.count} roots -> {w.roots_file}")
    say(f"[CERT] {role} {w.spec.label}: {'pass' if cert.passed else 'FAIL'} "
        f"(max residual {cert.max_residual:.2e}, min separation {cert.min_separation:.2e}, "
        f"conjugate gap {cert.conjugate_gap:.2e})")
    for failure in cert.failures:
        say(f"[CERT]   {failure}")
    say(f"[ORBIT] {role} a={w.spec.a}: {w.membership.bounded}/{w.membership.count} bounded, "
        f"max |c| {w.membership.max_abs:.4f} (disc radius {w.disc_radius:.4f})")


def run_pipeline(cfg: PipelineConfig, quiet: bool = True) -> tuple[dict, int]:
    """Every stage for the witnesses of cfg.b (alpha) and cfg.a (beta).

    Roots are always read back from their CSV files, so a composed run sees
    exactly what the standalone stages see. Returns (report, exit code).
    """
    say = printer(quiet)
    out = Path(cfg.out_dir)
    witnesses: dict[str, WitnessResult] = {}
    for role, spec in zip(("alpha", "beta"), cfg.witness_specs()):
        built, path = stage_build_poly(spec, out)
        say(f"[POLY] {role} {spec.label}: degree {built.poly.degree}, "
            f"removed roots {list(built.removed)} -> {path}")
        witnesses[role] = stage_solve_roots(_read_poly(path, "solve-roots"), cfg, out)
        _log_witness(say, role, witnesses[role])

    lower_bounds, bound = bound_from_roots_files(witnesses["alpha"].roots_file,
                                                 witnesses["beta"].roots_file, cfg, say)
    for mode, lb in lower_bounds.items():
        say(f"[ENERGY] {mode}: d_inf {lb.distance:.8f}, -2 cross {-2.0 * lb.energies.cross.total:.8f}, "
            f"near pairs {lb.energies.cross.near_pair_count}")
    say(f"[BOUND] lower bound {bound.lower_bound.value:.6f} -> max degree {bound.max_degree}")

    report = build_report(cfg, witnesses, lower_bounds, bound)
    path = write_report(report, out, cfg.report_format)
    say(f"[REPORT] wrote {path}")
    return report, (EXIT_OK if report["certified"] else EXIT_CERT)


# ---------------- subcommands ----------------

def cmd_build_poly(cfg: PipelineConfig, args, say: Say) -> int:
    spec = IterationSpec.periodic(cfg.a, cfg.n)
    built, path = stage_build_poly(spec, cfg.out_dir)
    say(f"[POLY] {spec.label}: degree {built.poly.degree}, removed roots {list(built.removed)} -> {path}")
    return EXIT_OK


def cmd_solve_roots(cfg: PipelineConfig, args, say: Say) -> int:
    w = stage_solve_roots(_read_poly(args.poly, "solve-roots"), cfg, cfg.out_dir)
    _log_witness(say, "roots", w)
    return EXIT_OK if w.passed else EXIT_CERT


def _energy_payload(kind: str, sets: list[ConjugateSet], cfg: PipelineConfig) -> dict:
    eps = cfg.witness_epsilon(*(s.degree for s in sets))
    measures = [DiscreteMeasure.uniform(s.points) for s in sets]
    payload: dict = {"schema": REPORT_SCHEMA, "kind": kind, "labels": [s.label for s in sets],
                     "epsilon": eps, "breakdowns": {}}
    if kind == "self":
        payload["discrete_energy"] = discrete_energy(measures[0], measures[0], workers=cfg.threads)
    for mode in cfg.energy_modes():
        regs = [m.regularize(eps) for m in measures]
        if kind == "self":
            breakdown = regularized_self_energy(regs[0], mode, cfg.threads)
        else:
            breakdown = regularized_cross_energy(regs[0], regs[1], mode, cfg.threads)
        payload["breakdowns"][mode] = breakdown.to_dict()
    if kind == "cross":
        payload["minus_two_cross"] = {m: -2.0 * b["total"] for m, b in payload["breakdowns"].items()}
    return payload


def cmd_energy(cfg: PipelineConfig, args, say: Say) -> int:
    files = [args.self_file] if args.self_file else list(args.cross_files)
    kind = "self" if args.self_file else "cross"
    try:
        sets = [read_roots_csv(f) for f in files]
        payload = _energy_payload(kind, sets, cfg)
        path = write_energy_json(Path(cfg.out_dir) / f"energy_{kind}_{'_'.join(s.label for s in sets)}.json",
                                 payload)
    except (RootsFormatError, EnergyError, ConfigError, OSError) as e:
        raise StageError("energy", str(e)) from e
    for mode, b in payload["breakdowns"].items():
        say(f"[ENERGY] {kind} {mode}: total {b['total']:.8f} "
            f"({b['near_pair_count']} near pairs, eps {payload['epsilon']:.4e})")
    say(f"[REPORT] wrote {path}")
    return EXIT_OK


def cmd_bound(cfg: PipelineConfig, args, say: Say) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rule = cfg.ub_rule()
    if args.lower_bound is not None:
        try:
            degree = solve_max_degree(args.lower_bound, rule, cfg.scan_cap)
        except (NoBound, ValueError) as e:
            raise StageError("bound", str(e)) from e
        degrees = range(max(1, degree - cfg.ub_window), degree + cfg.ub_window + 1)
        payload = {"schema": REPORT_SCHEMA, "lower_bound": args.lower_bound, "max_degree": degree,
                   "epsilon_rule": rule.to_dict(), "ub_curve": upper_bound_curve(degrees, rule)}
        path = out / "bound.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")
        say(f"[BOUND] lower bound {args.lower_bound} -> max degree {degree}")
        say(f"[REPORT] wrote {path}")
        return EXIT_OK

    if not (args.alpha and args.beta):
        raise StageError("bound", "need --alpha and --beta roots files, or --lower-bound")
    _, bound = bound_from_roots_files(args.alpha, args.beta, cfg, say)
    path = out / "bound.json"
    path.write_text(json.dumps({"schema": REPORT_SCHEMA, **bound.to_dict()}, indent=2) + "\n")
    if cfg.report_format == "text":
        say(format_bound_table(bound))
    say(f"[BOUND] lower bound {bound.lower_bound.value:.6f} -> max degree {bound.max_degree}")
    say(f"[REPORT] wrote {path}")
    return EXIT_OK


def cmd_run(cfg: PipelineConfig, args, say: Say) -> int:
    report, code = run_pipeline(cfg, quiet=args.quiet)
    if cfg.report_format == "text" and not args.quiet:
        print(format_text_report(report))
    if code == EXIT_CERT:
        say("[WARN] certification failed; see report for details")
    return code


def _eps_arg(text: str) -> Union[float, str]:
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to JSON pipeline config (see pipeline.conf.json)")
    common.add_argument("--a", type=int, help="Initial value a (beta witness; default 0)")
    common.add_argument("--b", type=int, help="Initial value b (alpha witness; default 1)")
    common.add_argument("--n", type=int, help="Iteration depth (default 11)")
    common.add_argument("--eps", type=_eps_arg, dest="eps_witness", help="Circle radius, or 'auto' for 1/d^2")
    common.add_argument("--mode", choices=PIPELINE_MODES, help="Energy mode (default paper-bound)")
    common.add_argument("--threads", type=int, help="Worker threads for pair sums (default 1)")
    common.add_argument("--out", dest="out_dir", help="Output directory (default out/)")
    common.add_argument("--residual-tol", type=float, dest="residual_tol", help="Root residual threshold")
    common.add_argument("--report", choices=REPORT_FORMATS, dest="report_format", help="Report format")
    common.add_argument("--quiet", action="store_true", help="Only print errors")

    ap = argparse.ArgumentParser(description="Effective degree bound for parameters with two preperiodic points")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("build-poly", parents=[common], help="Write the deflated periodicity polynomial for --a, --n")

    p = sub.add_parser("solve-roots", parents=[common], help="Solve and certify a polynomial file")
    p.add_argument("--poly", required=True, help="Polynomial text file from build-poly")

    p = sub.add_parser("energy", parents=[common], help="Regularized energies of roots files")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--self", dest="self_file", help="Roots CSV for a self energy")
    group.add_argument("--cross", dest="cross_files", nargs=2, metavar="CSV", help="Two roots CSVs")

    p = sub.add_parser("bound", parents=[common], help="Lower bound, UB curve and max degree")
    p.add_argument("--alpha", help="Roots CSV of the alpha witness")
    p.add_argument("--beta", help="Roots CSV of the beta witness")
    p.add_argument("--lower-bound", type=float, dest="lower_bound", help="Scan for a given lower bound only")

    sub.add_parser("run", parents=[common], help="Run every stage and write report.json")
    return ap


COMMANDS = {
    "build-poly": cmd_build_poly,
    "solve-roots": cmd_solve_roots,
    "energy": cmd_energy,
    "bound": cmd_bound,
    "run": cmd_run,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key) for key in
                 ("a", "b", "n", "eps_witness", "mode", "threads", "out_dir", "residual_tol", "report_format")}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, TypeError) as e:
        print(f"[config] Invalid pipeline config: {e}")
        return EXIT_CONFIG

    say = printer(args.quiet)
    try:
        return COMMANDS[args.command](cfg, args, say)
    except StageError as e:
        print(f"[ERROR] stage {e.stage}: {e}")
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
