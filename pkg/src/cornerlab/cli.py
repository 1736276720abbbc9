"""``corner-lab`` command line front end.

Exit status: 0 on success, 1 when a check fails or a library error occurs,
2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import experiments as X
from . import fem, meshing, norms, report, singular, spectral
from .errors import ConfigError, CornerLabError
from .geometry import family_from_dict, fig2_family

COMMANDS = ("verify", "exponents", "sweep", "inner", "coeffs", "h2check", "report")


@dataclass
class RunConfig:
    command: str
    config: str | None = None
    out: str = "out"
    jobs: int = 1
    order: int = 2
    deterministic: bool = False
    h: float | None = None
    eps_count: int | None = None
    omega: float | None = None
    count: int = 3
    data: dict = field(default_factory=dict)


def build_parser():
    p = argparse.ArgumentParser(prog="corner-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for eps sweeps")
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--deterministic", action="store_true", help="single worker, fixed seeds")
    p.add_argument("--h", type=float, help="arc spacing of the polar mesh at r0/2")
    p.add_argument("--eps-count", type=int, help="number of eps values in sweeps")
    p.add_argument("--omega", type=float, help="sector opening for 'exponents'")
    p.add_argument("--count", type=int, default=3, help="number of exponents")
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig(args.command, args.config, args.out, args.jobs, args.order,
                    args.deterministic, args.h, args.eps_count, args.omega, args.count)
    if cfg.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if cfg.h is not None and cfg.h <= 0:
        raise ConfigError("--h must be positive")
    if cfg.eps_count is not None and cfg.eps_count < 4:
        raise ConfigError("--eps-count must be at least 4 for rate fits")
    if cfg.config:
        if not os.path.isfile(cfg.config):
            raise ConfigError(f"config file not found: {cfg.config}")
        try:
            with open(cfg.config) as fh:
                cfg.data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg.data, dict):
            raise ConfigError("config must be a JSON object")
    if cfg.deterministic:
        cfg.jobs = 1
    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}") from exc
    return cfg


# ---------------------------------------------------------------- config pieces
def _family(cfg: RunConfig):
    if "family" not in cfg.data:
        return fig2_family()
    try:
        return family_from_dict(cfg.data["family"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad family section: {exc}") from exc


def _budget(cfg: RunConfig, family):
    b = dict(cfg.data.get("budget", {}))
    try:
        budget = meshing.MeshBudget(**b)
    except TypeError as exc:
        raise ConfigError(f"bad budget section: {exc}") from exc
    if cfg.h is not None:
        n = int(math.ceil(0.5 * family.sector.r0 * family.sector.omega / cfg.h))
        n += n % 2
        budget = meshing.MeshBudget(n, budget.pattern_layers, budget.pattern_ratio,
                                    budget.outer_h, budget.polar_radius, budget.far_ratio)
    return budget


def _eps(cfg: RunConfig, family):
    if "eps" in cfg.data:
        return [float(e) for e in cfg.data["eps"]]
    return X.default_eps(family.eps0, cfg.eps_count or 5)


def _rhs(cfg: RunConfig, family, default=None):
    spec = cfg.data.get("rhs")
    if spec is None:
        return default or fem.AnalyticDeltaPhiH1(family.sector)
    try:
        return _rhs_from(spec, family)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad rhs section: {exc}") from exc


def _rhs_from(spec, family):
    kind = spec["kind"]
    if kind == "delta_phi_h":
        return fem.AnalyticDeltaPhiH1(family.sector, int(spec.get("j", 1)))
    if kind == "bump":
        return fem.AnnulusBump(family.sector, float(spec["center"]), float(spec["width"]),
                               float(spec.get("amplitude", 1.0)), int(spec.get("sign", 1)),
                               int(spec.get("mode", 0)))
    if kind == "combination":
        return fem.Combination(tuple((float(w), _rhs_from(s, family)) for w, s in spec["terms"]))
    raise ValueError(f"unknown rhs kind {kind!r}")


# ---------------------------------------------------------------- commands
def cmd_exponents(cfg: RunConfig):
    omega = cfg.omega if cfg.omega is not None else float(cfg.data.get("omega", 1.5 * math.pi))
    if omega <= 0 or omega > 2 * math.pi:
        raise ConfigError("omega must lie in (0, 2 pi]")
    if cfg.count < 1:
        raise ConfigError("--count must be positive")
    rows = [(e.j, e.mu, e.lam_plus, e.lam_minus) for e in spectral.exponents_sector(omega, cfg.count)]
    path = os.path.join(cfg.out, "exponents.csv")
    report.write_csv(path, [f"singular exponents j pi / omega of a sector, omega = {omega!r}"],
                     ["j", "mu", "lambda_plus", "lambda_minus"], rows)
    for r in rows:
        print(",".join(report.fmt(v) for v in r))
    return 0


def cmd_verify(cfg: RunConfig):
    from .verify import run_suite

    rows = run_suite()
    path = os.path.join(cfg.out, "verify.csv")
    report.write_csv(path, ["analytic verification suite: value, tolerance and outcome per check"],
                     ["check", "value", "tolerance", "passed"],
                     [(n, v, t, "1" if ok else "0") for n, v, t, ok in rows])
    for n, v, t, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'} {n}: {v:.3e} (tol {t:.1e})")
    return 0 if all(r[3] for r in rows) else 1


def cmd_sweep(cfg: RunConfig):
    family = _family(cfg)
    req = [tuple(map(float, r)) for r in cfg.data.get("norms", [[1.75, 2.0], [1.2, 2.0]])]
    sc = X.SweepConfig(family, _rhs(cfg, family), _eps(cfg, family), req, _budget(cfg, family),
                       cfg.order, cfg.out, cfg.jobs)
    table = X.blowup_sweep(sc)
    names = ["eps"] + [f"s{s:g}_p{p:g}" for s, p in req]
    rows = [[e] + [table.columns[r][i] for r in req] for i, e in enumerate(table.eps)]
    header = ["fractional seminorm of u_eps on the corner layer eps*Q versus eps",
              "predicted log-log slope pi/omega - s + 2/p"]
    header += [report.fit_line(f"s={s:g} p={p:g}", f) for (s, p), f in table.fits.items()]
    report.write_csv(os.path.join(cfg.out, "sweep.csv"), header, names, rows)
    for (s, p), f in table.fits.items():
        report.svg_loglog(os.path.join(cfg.out, f"sweep_s{s:g}_p{p:g}.svg"), table.eps,
                          table.columns[(s, p)], f"seminorm s={s:g}, p={p:g} on eps*Q", f,
                          f.predicted)
        print(report.fit_line(f"s={s:g} p={p:g}", f))
    return 0


def cmd_inner(cfg: RunConfig):
    family = _family(cfg)
    eps = _eps(cfg, family)
    table = X.inner_sweep(family, _rhs(cfg, family, X.generic_rhs(family)), eps,
                          float(cfg.data.get("R_art", 256.0)), _budget(cfg, family), cfg.order)
    f = table.fits["residual"]
    header = ["relative H1(eps*Q) residual of the leading inner term eps^lam c1(u0) K1(x/eps)",
              "predicted decay slope: first exponent gap lambda'", report.fit_line("residual", f)]
    report.write_csv(os.path.join(cfg.out, "inner.csv"), header, ["eps", "residual"],
                     list(zip(eps, table.columns["residual"])))
    report.svg_loglog(os.path.join(cfg.out, "inner.svg"), eps, table.columns["residual"],
                      "leading inner term residual", f, f.predicted)
    print(report.fit_line("residual", f))
    return 0


def cmd_coeffs(cfg: RunConfig):
    family = _family(cfg)
    eps = _eps(cfg, family)
    table = X.coefficient_sweep(family, _rhs(cfg, family), eps, _budget(cfg, family), cfg.order)
    names = ["eps"] + list(table.columns)
    rows = [[e] + [table.columns[k][i] for k in table.columns] for i, e in enumerate(eps)]
    f = table.fits["d1"]
    header = ["singular coefficients d_l at the small corners eps*O_l",
              "predicted slope of |d_1|: pi/omega - pi/varpi", report.fit_line("|d1|", f),
              f"max relative |d1|-|d2| gap {X.symmetry_defect(table):.3e}" if "d2" in table.columns else ""]
    report.write_csv(os.path.join(cfg.out, "coeffs.csv"), [h for h in header if h], names, rows)
    report.svg_loglog(os.path.join(cfg.out, "coeffs.svg"), eps, np.abs(table.columns["d1"]),
                      "small-corner coefficient |d_1|", f, f.predicted)
    print(report.fit_line("|d1|", f))
    return 0


def cmd_h2check(cfg: RunConfig):
    family = _family(cfg)
    eps = _eps(cfg, family)
    table, res = X.constrained_sweep(family, eps, None, _budget(cfg, family), cfg.order)
    f = table.fits["c1_over_f"]
    ratio = np.array(table.columns["ratio"])
    header = ["|c1(u0)| for data whose solutions on Omega_eps have no small-corner singularity",
              "upper bound: |c1(u0)| <= C eps^(1 - pi/omega) ||f||_L2",
              report.fit_line("|c1|/||f||", f),
              f"ratio max/min {ratio.max() / ratio.min():.4g}"]
    rows = [(e, r.c1, r.f_norm, r.ratio, r.nullity) for e, r in zip(eps, res)]
    report.write_csv(os.path.join(cfg.out, "h2check.csv"), header,
                     ["eps", "c1", "f_norm", "ratio", "nullity"], rows)
    report.svg_loglog(os.path.join(cfg.out, "h2check.svg"), eps, table.columns["c1_over_f"],
                      "constrained |c1(u0)| / ||f||", f, f.predicted)
    print(report.fit_line("|c1|/||f||", f))
    print(f"ratio max/min {ratio.max() / ratio.min():.4g}")
    return 0


def cmd_report(cfg: RunConfig):
    lines = []
    status = 0
    for name, fn in (("sweep", cmd_sweep), ("inner", cmd_inner), ("coeffs", cmd_coeffs),
                     ("h2check", cmd_h2check)):
        status |= fn(cfg)
        path = os.path.join(cfg.out, f"{name}.csv")
        with open(path) as fh:
            lines.append(f"== {name} ==")
            lines.extend(ln.rstrip("\n")[2:] for ln in fh if ln.startswith("#"))
    with open(os.path.join(cfg.out, "report.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return status


HANDLERS = {"verify": cmd_verify, "exponents": cmd_exponents, "sweep": cmd_sweep,
            "inner": cmd_inner, "coeffs": cmd_coeffs, "h2check": cmd_h2check,
            "report": cmd_report}


def run(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CornerLabError as exc:
        print(f"{cfg.command} failed in {_origin(exc)}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


def _origin(exc):
    """``module.function`` of the innermost library frame that raised ``exc``."""
    tb = exc.__traceback__
    where = "cornerlab"
    while tb is not None:
        code = tb.tb_frame.f_code
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("cornerlab.") and mod not in ("cornerlab.cli", "cornerlab.errors"):
            where = f"{mod.split('.', 1)[1]}.{code.co_name}"
        tb = tb.tb_next
    return where


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
