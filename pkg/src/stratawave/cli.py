"""Command-line front end: reproducible runs over the library modules.

Subcommands: dispersion, expand, branch, field, flow, verify, plot.
Flags override values from a JSON config file (--config).  Outputs are
deterministic for identical configs; CSV numbers carry 17 significant
digits with '\\n' line endings, and every output file gets a sidecar
``<out>.meta.json`` with the fully resolved configuration.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics, continuation, dispersion, elliptic, flowfield
from .model import FluidParams, WaveProfile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SUBCOMMANDS = ("dispersion", "expand", "branch", "field", "flow", "verify", "plot")

_DEFAULTS = {
    "rho": 1.0,
    "rho_bar": 0.9,
    "g": 9.8,
    "sigma": 0.0,
    "omega": 1.0,
    "omega_bar": 0.5,
    "branch": 1,
    "s": 0.02,
    "nx": 64,
    "ny": 97,
    "tol": 1e-10,
    "method": "asymptotic",
}


class ConfigError(ValueError):
    """Configuration that fails validation before any computation."""


@dataclass
class RunConfig:
    """Fully resolved run parameters; round-trips losslessly through JSON."""

    params: FluidParams
    k: int | None
    branch: int
    s: float | None
    s_max: float | None
    ds: float | None
    nx: int
    ny: int
    tol: float
    method: str
    out: str | None

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        d = dict(_DEFAULTS)
        d.update({k: v for k, v in raw.items() if v is not None})
        try:
            params = FluidParams(
                rho=float(d["rho"]), rho_bar=float(d["rho_bar"]), g=float(d["g"]),
                sigma=float(d["sigma"]), omega=float(d["omega"]),
                omega_bar=float(d["omega_bar"]),
                wave_speed=float(d.get("wave_speed", 1.0)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        k = d.get("k")
        if k is not None:
            k = int(k)
            if k < 1:
                raise ConfigError("k must be a positive integer")
        branch = int(d["branch"])
        if branch not in (1, 2):
            raise ConfigError("branch must be 1 or 2")
        nx, ny = int(d["nx"]), int(d["ny"])
        if nx < 8 or nx & (nx - 1):
            raise ConfigError("nx must be a power of two, at least 8")
        if ny < 8:
            raise ConfigError("ny must be at least 8")
        method = str(d["method"])
        if method not in ("asymptotic", "elliptic"):
            raise ConfigError("method must be 'asymptotic' or 'elliptic'")
        s = None if d.get("s") is None else float(d["s"])
        s_max = None if d.get("s_max") is None else float(d["s_max"])
        ds = None if d.get("ds") is None else float(d["ds"])
        for name, val in (("s", s), ("s_max", s_max), ("ds", ds)):
            if val is not None and val < 0.0:
                raise ConfigError(f"{name} must be nonnegative")
        tol = float(d["tol"])
        if not (tol > 0.0):
            raise ConfigError("tol must be positive")
        return cls(params=params, k=k, branch=branch, s=s, s_max=s_max, ds=ds,
                   nx=nx, ny=ny, tol=tol, method=method,
                   out=d.get("out"))

    def require_k(self) -> int:
        if self.k is None:
            raise ConfigError("missing required wavenumber: pass --k or set it in --config")
        return self.k

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update({
            "k": self.k, "branch": self.branch, "s": self.s,
            "s_max": self.s_max, "ds": self.ds, "nx": self.nx, "ny": self.ny,
            "tol": self.tol, "method": self.method, "out": self.out,
        })
        return d


# -- output helpers ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _emit(config: RunConfig, payload: dict, csv_spec=None) -> None:
    """Write CSV + config sidecar when --out is set, else JSON to stdout."""
    if config.out and csv_spec is not None:
        header, rows = csv_spec
        _write_csv(config.out, header, rows)
        with open(config.out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump({"config": config.to_dict(), **payload}, fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
    else:
        json.dump({"config": config.to_dict(), **payload}, sys.stdout, indent=2,
                  sort_keys=True)
        sys.stdout.write("\n")


# -- subcommand handlers ------------------------------------------------------


def _run_dispersion(config: RunConfig) -> int:
    k_max = config.require_k()
    rows = []
    for k in range(1, k_max + 1):
        lam1, lam2 = dispersion.bifurcation_points(k, config.params)
        rows.append((k, lam1, lam2,
                     dispersion.kernel_is_simple(k, 1, config.params),
                     dispersion.kernel_is_simple(k, 2, config.params)))
    payload = {"rows": [[_fmt(v) for v in r] for r in rows]}
    _emit(config, payload,
          (["k", "lambda_1", "lambda_2", "simple_1", "simple_2"], rows))
    return EXIT_OK


def _run_expand(config: RunConfig) -> int:
    k = config.require_k()
    coeff = asymptotics.second_order_coefficients(k, config.branch, config.params)
    s = config.s if config.s is not None else 0.0
    expansion = asymptotics.branch_expansion(k, config.branch, config.params, s)
    payload = {
        "coefficients": coeff.to_dict(),
        "s": s,
        "lambda": expansion["lambda"],
        "profile": expansion["profile"].to_dict(),
    }
    rows = [(j + 1, c) for j, c in enumerate(expansion["profile"].coeffs)]
    _emit(config, payload, (["harmonic", "coefficient"], rows))
    return EXIT_OK


def _branch_points(config: RunConfig):
    k = config.require_k()
    if config.s_max is not None and config.ds is not None:
        branch = continuation.trace_branch(
            k, config.branch, config.params, config.s_max, config.ds,
            tol=config.tol, nx=config.nx, ny=config.ny)
        return branch.points
    s = config.s if config.s is not None else _DEFAULTS["s"]
    expansion = asymptotics.branch_expansion(k, config.branch, config.params, s)
    point = continuation.newton_correct(
        expansion["lambda"], expansion["profile"], s, config.params,
        tol=config.tol, nx=config.nx, ny=config.ny,
        branch_id=(k, config.branch))
    return [point]


def _run_branch(config: RunConfig) -> int:
    points = _branch_points(config)
    n = max(len(p.profile.coeffs) for p in points)
    header = ["s", "lambda", "residual"] + [f"a{j}" for j in range(1, n + 1)]
    rows = [(p.s, p.lam, p.residual, *p.profile.padded(n)) for p in points]
    payload = {"points": [p.to_dict() for p in points]}
    _emit(config, payload, (header, rows))
    return EXIT_OK


def _fields_at(config: RunConfig):
    """(lam, lower FieldGrid, upper FieldGrid) per the configured method."""
    k = config.require_k()
    s = config.s if config.s is not None else _DEFAULTS["s"]
    if config.method == "asymptotic":
        lam = asymptotics.branch_expansion(k, config.branch, config.params, s)["lambda"]
        lower = asymptotics.lower_field_expansion(
            k, config.branch, config.params, s, nx=config.nx, ny=config.ny)
        upper = asymptotics.upper_field_expansion(
            k, config.branch, config.params, s, nx=config.nx, ny=config.ny)
        return lam, lower, upper
    expansion = asymptotics.branch_expansion(k, config.branch, config.params, s)
    point = continuation.newton_correct(
        expansion["lambda"], expansion["profile"], s, config.params,
        tol=config.tol, nx=config.nx, ny=config.ny,
        branch_id=(k, config.branch))
    lower = elliptic.solve_lower(point.profile, config.params,
                                 nx=config.nx, ny=config.ny)
    upper = elliptic.solve_upper(point.lam, point.profile, config.params,
                                 nx=config.nx, ny=config.ny)
    return point.lam, lower, upper


def _run_field(config: RunConfig) -> int:
    lam, lower, upper = _fields_at(config)
    rows = []
    for grid in (lower, upper):
        vel = flowfield.velocity(grid)
        x, y = vel["x"], vel["y"]
        u, v = vel["u_rel"], vel["v"]
        psi = grid.values
        for i in range(grid.nx):
            for j in range(grid.ny):
                rows.append((grid.layer, x[i, j], y[i, j], psi[i, j],
                             u[i, j], v[i, j]))
    payload = {"lambda": lam}
    _emit(config, payload, (["layer", "x", "y", "psi", "u_rel", "v"], rows))
    return EXIT_OK


def _run_flow(config: RunConfig) -> int:
    _, lower, _ = _fields_at(config)
    report = flowfield.find_stagnation_points(lower)
    layer = flowfield.separatrix_and_layer(lower)
    rows = []
    for idx, line in enumerate(layer["closed_streamline_samples"]):
        for x, y in line.points:
            rows.append((idx, x, y))
    payload = {"report": report.to_dict()}
    _emit(config, payload, (["id", "x", "y"], rows))
    return EXIT_OK


def _run_plot(config: RunConfig) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _, lower, _ = _fields_at(config)
    report = flowfield.find_stagnation_points(lower)
    layer = flowfield.separatrix_and_layer(lower)
    pf = flowfield.PushforwardField(lower)

    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    xs = np.linspace(0.0, pf.period, 512)
    ax.plot(xs, pf.surface(xs), color="black", lw=1.5, label="surface")
    sep = report.separatrix
    if sep.size:
        ax.plot(sep[:, 0], sep[:, 1], color="tab:blue", lw=2.5, label="separatrix")
    for curve, color in ((report.y_zeta_curve, "tab:blue"),
                         (report.xi_curve, "tab:red"),
                         (report.xi_bar_curve, "tab:red")):
        if np.asarray(curve).size:
            c = np.asarray(curve)
            ax.plot(c[:, 0], c[:, 1], ls="--", lw=1.0, color=color)
    for line in layer["closed_streamline_samples"]:
        p = line.points
        ax.plot(p[:, 0], p[:, 1], lw=0.8, color="tab:green")
        m = len(p) // 4
        if len(p) > 8:
            ax.annotate("", xy=p[m + 1], xytext=p[m],
                        arrowprops={"arrowstyle": "->", "color": "tab:green"})
    for x, y, kind in report.points:
        ax.plot([x], [y], marker="o" if kind == "surface" else "x",
                color="black", ms=6)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="lower right", fontsize=8)
    out = config.out or "flow.svg"
    fig.savefig(out, format="svg")
    plt.close(fig)
    with open(out + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump({"config": config.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _run_verify(config: RunConfig) -> int:
    """Fast cross-module invariant sweep; exit 0 only if everything passes."""
    params = config.params
    checks = []

    def record(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    k = config.k if config.k is not None else 1
    for i in (1, 2):
        lam = dispersion.bifurcation_points(k, params)[i - 1]
        val = dispersion.mu(k, lam, params)
        scale = dispersion._mu_scale(k, lam, params)
        record(f"dispersion root, branch {i}", abs(val) < 1e-12 * scale,
               f"mu = {val:.3e} at lambda = {lam:.9g}")

    coeff = asymptotics.second_order_coefficients(k, config.branch, params)
    resid = coeff.alpha_k * 2.0 * dispersion.mu(2 * k, coeff.Lambda, params) + coeff.A_k
    record("expansion coefficient identity", abs(resid) <= 1e-12 * abs(coeff.A_k),
           f"residual = {resid:.3e}")

    flat = WaveProfile.zero(k)
    low = elliptic.solve_lower(flat, params, nx=32, ny=49)
    y = low.y_nodes()
    defect = float(np.max(np.abs(low.values - 0.5 * params.omega * y**2)))
    record("laminar lower solve", defect < 1e-10, f"sup defect = {defect:.3e}")

    lam0 = coeff.Lambda
    psi0 = elliptic.Psi(lam0, flat, params, nx=32, ny=49)
    record("flat interface is a solution", float(np.max(np.abs(psi0))) < 1e-11,
           f"sup |Psi| = {float(np.max(np.abs(psi0))):.3e}")

    d = elliptic.frechet_dPsi(lam0 + 0.3, flat, params, (1.0,), nx=64, ny=65)
    from .model import cosine_coefficients

    coeffs = cosine_coefficients(d, 4)[1]
    target = dispersion.mu(k, lam0 + 0.3, params)
    rel = abs(coeffs[0] - target) / max(abs(target), 1e-30)
    record("linearization matches the dispersion symbol", rel < 1e-5,
           f"relative error = {rel:.3e}")

    s = config.s if config.s is not None else 0.02
    expansion = asymptotics.branch_expansion(k, config.branch, params, s)
    try:
        point = continuation.newton_correct(
            expansion["lambda"], expansion["profile"], s, params,
            tol=config.tol, nx=32, ny=49)
        record("newton correction at small amplitude",
               point.residual < config.tol,
               f"residual = {point.residual:.3e}, lambda = {point.lam:.9g}")
    except continuation.NoConvergence as exc:
        record("newton correction at small amplitude", False, str(exc))

    if params.omega != 0.0:
        fld = asymptotics.lower_field_expansion(k, config.branch, params, s,
                                                nx=64, ny=65)
        try:
            report = flowfield.find_stagnation_points(fld)
            record("three stagnation points", report.count == 3,
                   f"count = {report.count}, zeta = {report.zeta:.6g}")
        except ValueError as exc:
            record("three stagnation points", False, str(exc))

    passed = all(c["passed"] for c in checks)
    payload = {"passed": passed, "checks": checks}
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            json.dump({"config": config.to_dict(), **payload}, fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
    else:
        json.dump({"config": config.to_dict(), **payload}, sys.stdout, indent=2,
                  sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK if passed else EXIT_NUMERICAL


_HANDLERS = {
    "dispersion": _run_dispersion,
    "expand": _run_expand,
    "branch": _run_branch,
    "field": _run_field,
    "flow": _run_flow,
    "verify": _run_verify,
    "plot": _run_plot,
}


def run(subcommand: str, config) -> int:
    """Execute one subcommand; returns the process exit status."""
    if subcommand not in _HANDLERS:
        print(f"unknown subcommand: {subcommand}", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(config, RunConfig):
        try:
            config = RunConfig.from_mapping(dict(config))
        except ConfigError as exc:
            print(f"invalid configuration: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return _HANDLERS[subcommand](config)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (elliptic.NumericalFailure, continuation.NoConvergence,
            asymptotics.DegenerateBranchError) as exc:
        json.dump({"error": "numerical-failure", "type": type(exc).__name__,
                   "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_NUMERICAL


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag, kwargs in (
        ("--rho", {"type": float}),
        ("--rho-bar", {"type": float}),
        ("--g", {"type": float}),
        ("--sigma", {"type": float}),
        ("--omega", {"type": float}),
        ("--omega-bar", {"type": float}),
        ("--k", {"type": int}),
        ("--branch", {"type": int, "choices": (1, 2)}),
        ("--s", {"type": float}),
        ("--s-max", {"type": float}),
        ("--ds", {"type": float}),
        ("--nx", {"type": int}),
        ("--ny", {"type": int}),
        ("--tol", {"type": float}),
        ("--method", {"choices": ("asymptotic", "elliptic")}),
        ("--out", {"type": str}),
        ("--config", {"type": str, "dest": "config_file"}),
    ):
        common.add_argument(flag, **kwargs)
    parser = argparse.ArgumentParser(
        prog="stratawave",
        description="periodic internal waves between two constant-vorticity layers",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    raw = {}
    if args.config_file:
        try:
            with open(args.config_file, encoding="utf-8") as fh:
                raw.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"invalid configuration: cannot read {args.config_file}: {exc}",
                  file=sys.stderr)
            return EXIT_CONFIG
    flag_values = {k: v for k, v in vars(args).items()
                   if k not in ("subcommand", "config_file") and v is not None}
    raw.update(flag_values)
    try:
        config = RunConfig.from_mapping(raw)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.subcommand, config)


if __name__ == "__main__":
    sys.exit(main())
