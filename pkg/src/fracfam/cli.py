"""Command-line front end: `fracfam solve` runs a configured problem and
writes the trajectory CSV; `fracfam verify` runs a named verification suite.

Exit codes: 0 success / all checks pass, 1 validation or I/O failure (or
failing verify rows), 2 solver non-convergence, 64 unknown verify suite.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .families import (
    DEFAULT_CHENLI_MATRIX,
    CheckRow,
    FamilyKind,
    VerificationReport,
    apply_family_subordinated,
    brute_force_volterra,
    family_bound_witness,
    family_symbol,
    family_symbol_table,
    verify_alpha_resolvent_equation,
    verify_family_identities,
)
from .fracalc import GridFunction, TimeGrid, caputo_derivative, numeric_laplace, rl_integral
from .solver import (
    ForcingTerm,
    NonConvergenceError,
    NonlinearityDescriptor,
    ProblemSpec,
    SolveResult,
    linear_mild_solution,
    picard_solve,
)
from .specfun import (
    MLParams,
    WrightParams,
    gamma_fn,
    mittag_leffler,
    subordination_density,
    wright_phi,
    wright_tail_cutoff,
)
from .spectral import (
    SpectralField,
    SpectralOperator,
    apply_fractional_power,
    fractional_power_via_integral,
    sine_inverse,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONCONVERGENCE = 2
EXIT_USAGE = 64

_SUITES = ("specfun", "fracalc", "families", "chenli", "all")


class ValidationError(ValueError):
    """Config validation failure naming the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field_name = field_name


@dataclass
class ConfigFile:
    """Validated solve/verify configuration with documented defaults."""

    alpha: float
    T: float
    n_steps: int
    n_modes: int
    beta: float = 0.5
    m_collocation: int | None = None
    initial_x: list = field(default_factory=list)
    initial_y: list = field(default_factory=list)
    f: list = field(default_factory=list)
    h: dict = field(default_factory=lambda: {"name": "zero"})
    tol: float = 1e-8
    max_iter: int = 200
    damping: float = 1.0

    def __post_init__(self) -> None:
        if not 1.0 < self.alpha <= 2.0:
            raise ValidationError("alpha", "alpha must lie in (1,2]")
        if self.T <= 0.0:
            raise ValidationError("T", "T must be > 0")
        if self.n_steps < 1:
            raise ValidationError("n_steps", "n_steps must be >= 1")
        if self.n_modes < 1:
            raise ValidationError("n_modes", "n_modes must be >= 1")
        if not 0.0 <= self.beta < 1.0:
            raise ValidationError("beta", "beta must lie in [0,1)")
        if self.m_collocation is None:
            self.m_collocation = 2 * self.n_modes
        if self.m_collocation < self.n_modes:
            raise ValidationError("m_collocation", "m_collocation must be >= n_modes")
        if self.tol <= 0.0:
            raise ValidationError("tol", "tol must be > 0")
        if self.max_iter < 1:
            raise ValidationError("max_iter", "max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping", "damping must lie in (0,1]")

    def to_json(self) -> str:
        payload = {
            "alpha": self.alpha,
            "T": self.T,
            "n_steps": self.n_steps,
            "n_modes": self.n_modes,
            "beta": self.beta,
            "m_collocation": self.m_collocation,
            "initial_x": self.initial_x,
            "initial_y": self.initial_y,
            "f": self.f,
            "h": self.h,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "damping": self.damping,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


_REQUIRED = ("alpha", "T", "n_steps", "n_modes")
_KNOWN = set(_REQUIRED) | {
    "beta",
    "m_collocation",
    "initial_x",
    "initial_y",
    "f",
    "h",
    "tol",
    "max_iter",
    "damping",
}


def parse_config(path: str) -> ConfigFile:
    """Load and validate a JSON config; raises ValidationError with the
    offending field named."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValidationError("path", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError("json", f"parse error at line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ValidationError("json", "top level must be an object")
    for key in raw:
        if key not in _KNOWN:
            raise ValidationError(key, "unknown field")
    for key in _REQUIRED:
        if key not in raw:
            raise ValidationError(key, "required field is missing")
    kwargs = {}
    for key, value in raw.items():
        kwargs[key] = value
    try:
        return ConfigFile(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("config", str(exc))


def _field_from_spec(spec, n_modes: int, name: str) -> SpectralField:
    """[{"mode": n, "scale": a}, ...] or "zero"."""
    if spec in ("zero", [], None):
        return SpectralField.zero(n_modes)
    coeffs = np.zeros(n_modes)
    if not isinstance(spec, list):
        raise ValidationError(name, "expected 'zero' or a list of {mode, scale}")
    for item in spec:
        mode = item.get("mode")
        if not isinstance(mode, int) or not 1 <= mode <= n_modes:
            raise ValidationError(name, f"mode must be an integer in 1..{n_modes}")
        coeffs[mode - 1] += float(item.get("scale", 1.0))
    return SpectralField(coeffs)


def _forcing_from_spec(spec, n_modes: int) -> ForcingTerm:
    """[{"poly_t": [a0,a1,...], "shape": [{"mode": n, "scale": a}, ...]}, ...]."""
    if spec in ("zero", [], None):
        return ForcingTerm.zero(n_modes)
    profiles = []
    for item in spec:
        poly = item.get("poly_t")
        if not isinstance(poly, list) or not poly:
            raise ValidationError("f", "each profile needs a nonempty poly_t list")
        shape = _field_from_spec(item.get("shape"), n_modes, "f.shape").coeffs
        profiles.append((np.asarray(poly, dtype=float), shape))
    return ForcingTerm.from_profiles(n_modes, profiles)


def _nonlinearity_from_spec(spec: dict) -> NonlinearityDescriptor:
    name = spec.get("name", "zero")
    scale = float(spec.get("scale", 1.0))
    if name == "zero":
        return NonlinearityDescriptor.zero()
    if name in ("sin", "cubic"):
        return NonlinearityDescriptor.pointwise(name, scale=scale)
    if name == "poly":
        coeffs = spec.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise ValidationError("h", "poly nonlinearity needs a coeffs list")
        return NonlinearityDescriptor.pointwise("poly", scale=scale, coeffs=coeffs)
    if name == "linear_memory":
        kt = np.asarray(spec.get("kernel_poly_t", [1.0]), dtype=float)
        ks = np.asarray(spec.get("kernel_poly_s", [1.0]), dtype=float)
        dkt = np.polynomial.polynomial.polyder(kt) if kt.size > 1 else np.zeros(1)
        pv = np.polynomial.polynomial.polyval
        return NonlinearityDescriptor.linear_memory(
            lambda t, s: pv(t, kt) * pv(s, ks),
            lambda t, s: pv(t, dkt) * pv(s, ks),
        )
    raise ValidationError("h", f"unknown nonlinearity name {name!r}")


def build_problem(cfg: ConfigFile) -> tuple[ProblemSpec, TimeGrid]:
    operator = SpectralOperator(cfg.n_modes)
    spec = ProblemSpec(
        alpha=cfg.alpha,
        operator=operator,
        x=_field_from_spec(cfg.initial_x, cfg.n_modes, "initial_x"),
        y=_field_from_spec(cfg.initial_y, cfg.n_modes, "initial_y"),
        f=_forcing_from_spec(cfg.f, cfg.n_modes),
        h=_nonlinearity_from_spec(cfg.h),
        beta=cfg.beta,
        m_collocation=cfg.m_collocation,
    )
    return spec, TimeGrid(cfg.T, cfg.n_steps)


def write_csv(result: SolveResult, cfg: ConfigFile, path: str, nodal: bool = False) -> None:
    """Schema: t,res_fp,res_volterra,c_1..c_N[,u_1..u_M]; 17 significant
    digits, '\\n' line endings (lossless round-trip for regression tests)."""
    n_modes = result.trajectory.shape[1]
    header = ["t", "res_fp", "res_volterra"] + [f"c_{j}" for j in range(1, n_modes + 1)]
    if nodal:
        header += [f"u_{j}" for j in range(1, cfg.m_collocation + 1)]
    lines = [",".join(header)]
    fmt = lambda v: format(float(v), ".17g")
    for i in range(result.trajectory.shape[0]):
        t = result.grid.nodes[i]
        row = [
            fmt(t),
            fmt(result.fp_residual_per_node[i]),
            fmt(result.volterra_residual_per_node[i]),
        ]
        row += [fmt(v) for v in result.trajectory[i]]
        if nodal:
            samples = sine_inverse(result.field_at(i), cfg.m_collocation).samples
            row += [fmt(v) for v in samples]
        lines.append(",".join(row))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise RuntimeError(f"cannot write CSV to {path}: {exc}")


def run_solve(cfg: ConfigFile, out_path: str, nodal: bool = False) -> int:
    spec, grid = build_problem(cfg)
    try:
        result = picard_solve(
            spec, grid, tol=cfg.tol, max_iter=cfg.max_iter, damping=cfg.damping
        )
    except NonConvergenceError as exc:
        if exc.result is not None:
            write_csv(exc.result, cfg, out_path, nodal=nodal)
        print(
            f"solve: NOT CONVERGED after {exc.iterations} iterations; "
            f"last update {exc.residual:.6e}"
        )
        return EXIT_NONCONVERGENCE
    write_csv(result, cfg, out_path, nodal=nodal)
    print(
        f"solve: converged={result.converged} iterations={result.iterations} "
        f"res_fp={result.fixed_point_residual:.6e} "
        f"res_volterra={result.volterra_residual:.6e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


def _suite_specfun(cfg: ConfigFile) -> VerificationReport:
    rows = []
    rng = np.random.default_rng(20240817)
    xs = rng.uniform(0.1, 30.0, size=200)
    resid = max(abs(gamma_fn(x + 1.0) - x * gamma_fn(x)) / abs(gamma_fn(x + 1.0)) for x in xs)
    rows.append(CheckRow("gamma_recurrence", float(resid), 1e-12))

    zs = np.linspace(-4.0, 2.0, 50)
    resid = max(
        abs(mittag_leffler(MLParams(1.0, 1.0), z) - np.exp(z)) / abs(np.exp(z)) for z in zs
    )
    rows.append(CheckRow("ml_exponential_reduction", float(resid), 1e-10))

    ts = np.linspace(0.05, 6.0, 50)
    resid = max(
        abs(mittag_leffler(MLParams(2.0, 1.0), -t * t) - np.cos(t)) for t in ts
    ) / 1.0
    rows.append(CheckRow("ml_cosine_reduction", float(resid), 1e-10))

    zs = np.linspace(0.0, 6.0, 25)
    resid = max(
        abs(wright_phi(WrightParams(0.5), z) - np.exp(-z * z / 4.0) / np.sqrt(np.pi))
        / (np.exp(-z * z / 4.0) / np.sqrt(np.pi))
        for z in zs
    )
    rows.append(CheckRow("wright_half_gaussian", float(resid), 1e-9))

    worst = 0.0
    from numpy.polynomial.legendre import leggauss

    xg, wg = leggauss(16)
    for g in (0.6, 0.75, 0.9):
        for t in (0.5, 1.0, 2.0):
            z_max = wright_tail_cutoff(g, 1e-12)
            edges = np.linspace(0.0, z_max * t ** g, 41)
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                for x_, w_ in zip(xg, wg):
                    total += half * w_ * subordination_density(g, t, mid + half * x_)
            worst = max(worst, abs(total - 1.0))
    rows.append(CheckRow("wright_normalization", worst, 1e-6))
    return VerificationReport(rows)


def _suite_fracalc(cfg: ConfigFile) -> VerificationReport:
    rows = []
    grid = TimeGrid(2.0, 512)
    t = grid.nodes
    for label, values in (("const", np.ones_like(t)), ("linear", t), ("sine", np.sin(t))):
        u = GridFunction(grid, values)
        worst = 0.0
        for a, b in ((0.5, 0.5), (0.7, 1.1)):
            once = rl_integral(a + b, u).values
            twice = rl_integral(a, rl_integral(b, u)).values
            worst = max(worst, float(np.abs(once - twice).max()))
        # dominated by the t^b kink of the intermediate at the first nodes
        rows.append(CheckRow(f"semigroup_{label}", worst, 2e-3))

    u = GridFunction(grid, t ** 2)
    expected = 2.0 * t ** 3.5 / gamma_fn(4.5)
    resid = float(np.abs(rl_integral(1.5, u).values - expected).max())
    rows.append(CheckRow("rl_integral_monomial", resid, 1e-6))

    smooth = GridFunction(grid, t ** 2)
    cap = caputo_derivative(1.5, smooth, 0.0, 0.0).values[1:-1]
    expected = (2.0 * t ** 0.5 / gamma_fn(1.5))[1:-1]
    rows.append(
        CheckRow("caputo_monomial", float(np.abs(cap - expected).max()), 5e-2)
    )

    lap_grid = TimeGrid(40.0, 1 << 20)
    est = numeric_laplace(GridFunction(lap_grid, np.ones(lap_grid.n_steps + 1)), 1.0, 1.0, 0.0)
    rows.append(
        CheckRow("laplace_constant", abs(est.value - 1.0) , 1e-9 + est.truncation_bound)
    )
    return VerificationReport(rows)


def _suite_families(cfg: ConfigFile) -> VerificationReport:
    operator = SpectralOperator(cfg.n_modes)
    grid = TimeGrid(cfg.T, cfg.n_steps)
    report = verify_family_identities(cfg.alpha, operator, grid)

    bound = family_bound_witness(cfg.alpha, operator, grid)
    report.rows.append(CheckRow("cosine_bound_witness_minus_one", max(0.0, bound - 1.0), 1e-9))

    # classical reduction at alpha = 2
    tt = np.linspace(0.0, cfg.T, 100)
    worst = 0.0
    for n in range(1, min(cfg.n_modes, 4) + 1):
        lam = -float(n * n)
        cos_tab = family_symbol_table(2.0, FamilyKind.COSINE, lam, tt)
        sin_tab = family_symbol_table(2.0, FamilyKind.SINE, lam, tt)
        worst = max(worst, float(np.abs(cos_tab - np.cos(n * tt)).max()))
        worst = max(worst, float(np.abs(sin_tab - np.sin(n * tt) / n).max()))
    report.rows.append(CheckRow("classical_reduction_alpha2", worst, 1e-10))

    # oracle equivalence on a coarse grid
    vgrid = TimeGrid(2.0, 512)
    worst = 0.0
    for lam in (-1.0, -9.0):
        oracle = brute_force_volterra(cfg.alpha, lam, vgrid).values
        symbol = family_symbol_table(cfg.alpha, FamilyKind.COSINE, lam, vgrid.nodes)
        worst = max(worst, float(np.abs(oracle - symbol).max()))
    report.rows.append(CheckRow("volterra_oracle_agreement", worst, 2e-3))

    # subordination cross-check at a few points
    if cfg.alpha < 2.0:
        u = SpectralField(np.ones(min(cfg.n_modes, 5)))
        worst = 0.0
        for t in (0.5, 1.0):
            sub = apply_family_subordinated(cfg.alpha, t, u, tol=1e-6).coeffs
            lam = SpectralOperator(u.n_modes).eigenvalues
            ml = np.array(
                [family_symbol(cfg.alpha, FamilyKind.COSINE, l_, t) for l_ in lam]
            )
            worst = max(worst, float(np.abs(sub - ml).max()))
        report.rows.append(CheckRow("subordination_vs_symbol", worst, 1e-6))
    return report


def _suite_chenli(cfg: ConfigFile) -> VerificationReport:
    rows = []
    # T = 1.024 puts (t,s) = (0.4, 0.9) exactly on power-of-two grids
    grid = TimeGrid(1.024, cfg.n_steps)
    resid = verify_alpha_resolvent_equation(cfg.alpha, DEFAULT_CHENLI_MATRIX, 0.4, 0.9, grid)
    rows.append(CheckRow("chenli_default_matrix", resid, 1e-4))
    resid0 = verify_alpha_resolvent_equation(cfg.alpha, np.zeros((2, 2)), 0.4, 0.9, grid)
    rows.append(CheckRow("chenli_zero_generator", resid0, 1e-14))
    fine = verify_alpha_resolvent_equation(
        cfg.alpha, DEFAULT_CHENLI_MATRIX, 0.4, 0.9, TimeGrid(1.024, 2 * cfg.n_steps)
    )
    ratio_ok = fine <= 0.6 * resid if resid > 1e-12 else True
    rows.append(CheckRow("chenli_mesh_halving", 0.0 if ratio_ok else 1.0, 0.5))
    return VerificationReport(rows)


def run_verify(suite: str, cfg: ConfigFile, out_path: str | None = None) -> tuple[VerificationReport, int]:
    """Run a named verification suite; returns (report, exit_code)."""
    if suite not in _SUITES:
        raise KeyError(suite)
    report = VerificationReport([])
    if suite in ("specfun", "all"):
        report.extend(_suite_specfun(cfg))
    if suite in ("fracalc", "all"):
        report.extend(_suite_fracalc(cfg))
    if suite in ("families", "all"):
        report.extend(_suite_families(cfg))
    if suite in ("chenli", "all"):
        report.extend(_suite_chenli(cfg))
    _print_report(report, cfg)
    if out_path:
        _write_report_csv(report, out_path)
    return report, EXIT_OK if report.passed else EXIT_ERROR


def _print_report(report: VerificationReport, cfg: ConfigFile) -> None:
    width = max((len(r.name) for r in report.rows), default=10) + 2
    print(f"# alpha={cfg.alpha} T={cfg.T} n_steps={cfg.n_steps} n_modes={cfg.n_modes}")
    print(f"{'check':<{width}}{'residual':>14}{'tolerance':>14}  status")
    for row in report.rows:
        status = "pass" if row.passed else "FAIL"
        print(f"{row.name:<{width}}{row.residual:>14.4e}{row.tolerance:>14.4e}  {status}")
    print(f"overall: {'pass' if report.passed else 'FAIL'}")


def _write_report_csv(report: VerificationReport, path: str) -> None:
    lines = ["check,residual,tolerance,pass"]
    for row in report.rows:
        lines.append(
            f"{row.name},{format(row.residual, '.17g')},{format(row.tolerance, '.17g')},"
            f"{str(row.passed).lower()}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_DEFAULT_VERIFY_CONFIG = dict(alpha=1.5, T=1.0, n_steps=2048, n_modes=8)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracfam",
        description="fractional resolvent families: solve and verify",
    )
    sub = parser.add_subparsers(dest="command")
    p_solve = sub.add_parser("solve", help="run a configured solve, write trajectory CSV")
    p_solve.add_argument("--config", required=True, help="JSON problem config")
    p_solve.add_argument("--out", required=True, help="output CSV path")
    p_solve.add_argument("--nodal", action="store_true", help="append nodal columns u_1..u_M")
    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", required=True, help="|".join(_SUITES))
    p_verify.add_argument("--config", help="optional JSON config (defaults used otherwise)")
    p_verify.add_argument("--out", help="optional report CSV path")

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    try:
        if args.command == "solve":
            cfg = parse_config(args.config)
            return run_solve(cfg, args.out, nodal=args.nodal)
        if args.command == "verify":
            if args.suite not in _SUITES:
                print(
                    f"unknown suite {args.suite!r}; expected one of {', '.join(_SUITES)}",
                    file=sys.stderr,
                )
                return EXIT_USAGE
            cfg = parse_config(args.config) if args.config else ConfigFile(**_DEFAULT_VERIFY_CONFIG)
            _, code = run_verify(args.suite, cfg, args.out)
            return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
