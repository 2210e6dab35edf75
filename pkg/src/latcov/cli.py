"""Command-line experiment runner.

Every subcommand writes CSV output, a text summary and the resolved
configuration into its output directory.  Settings come from (lowest to
highest priority) built-in defaults, a ``key = value`` config file, the
``LATCOV_OUT`` environment variable (output directory only) and flags.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import LatcovError, SquareCase

OUT_ENV = "LATCOV_OUT"
SUBCOMMANDS = ("spectrum", "count", "covar-global", "covar-window", "dio-gap",
               "appendix-sums", "densities", "sigma-infinity", "constant-c", "verify")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- config files -------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def write_config(cfg: dict, path) -> None:
    with open(path, "w") as fh:
        for k in sorted(cfg):
            if cfg[k] is not None:
                fh.write(f"{k} = {cfg[k]}\n")


def parse_form(text: str):
    from .quadform import QuadForm, as_fraction
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise UsageError(f"form {text!r} must be three comma-separated numbers a,b,c")
    try:
        return QuadForm(*(as_fraction(p) for p in parts))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad form {text!r}: {exc}") from exc


def _floats(text) -> list[float]:
    return [float(Fraction(s.strip())) for s in str(text).split(",") if s.strip()]


def _ints(text) -> list[int]:
    return [int(s.strip()) for s in str(text).split(",") if s.strip()]


# -- argument parser ------------------------------------------------------------

# (name, type-description, default) per subcommand; every value is kept as text
OPTIONS = {
    "spectrum": [("form", "a,b,c", "1,0,1"), ("ymax", "real", "10")],
    "count": [("form", "a,b,c", "1,0,1"), ("R", "reals", "10"), ("T", "real", None),
              ("step", "real", "0.01"), ("h", "real", None)],
    "covar-global": [("form1", "a,b,c", "4/3,4/3,4/3"), ("form2", "a,b,c", "1,0,1"),
                     ("T", "real", "1000"), ("ymax", "real", "100"), ("step", "real", None)],
    "covar-window": [("form1", "a,b,c", "4/3,4/3,4/3"), ("form2", "a,b,c", "1,0,3"),
                     ("h", "reals", "0.1,0.03,0.01"), ("ymax", "real", "300"),
                     ("T", "real", None), ("step", "real", None), ("irrational", "bool", "false")],
    "dio-gap": [("form1", "a,b,c", "4/3,4/3,4/3"), ("form2", "a,b,c", "1,0,3"),
                ("M", "ints", "10,20,40,80,160,300")],
    "appendix-sums": [("kind", "mult_case|square_case|non_square", "mult_case"),
                      ("N", "int", "1000000"), ("a", "int", "1"), ("b", "int", "1")],
    "densities": [("p", "ints", "2,3,5,7"), ("alpha", "ints", "1"), ("kmax", "int", None)],
    "sigma-infinity": [("alpha", "real", "1"), ("epsilon", "real", "0.01"),
                       ("samples", "int", "10000000"), ("seed", "int", "0"),
                       ("correct_bias", "bool", "false")],
    "constant-c": [("a", "int", "1"), ("b", "int", "1"), ("terms", "int", "1000000")],
    "verify": [("suite", "all|quadform|counting|covariance|appendix", "all")],
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latcov", description="Covariance of lattice-point counting errors.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--out", help=f"output directory (else ${OUT_ENV}, config 'out', ./latcov_out/<cmd>)")
        sp.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        sp.add_argument("--plot", action="store_true", help="also emit a data file and plot script")
        for key, desc, _ in opts:
            sp.add_argument(f"--{key.lower().replace('_', '-')}" if key not in ("R", "T", "N", "M") else f"--{key}",
                            dest=key, metavar=desc.upper() if desc != "bool" else "BOOL")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg: dict[str, str | None] = {k: d for k, _, d in OPTIONS[args.subcommand]}
    cfg.update({"threads": "1", "plot": "false", "out": None})
    if args.config:
        file_cfg = read_config(args.config)
        # a resolved config from an earlier run names its subcommand
        named = file_cfg.pop("subcommand", args.subcommand)
        if named != args.subcommand:
            raise UsageError(f"config {args.config} is for {named!r}, not {args.subcommand!r}")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {args.subcommand}: {sorted(unknown)}")
        cfg.update(file_cfg)
    if os.environ.get(OUT_ENV):
        cfg["out"] = os.environ[OUT_ENV]
    for key in list(cfg):
        val = getattr(args, key, None)
        if key == "plot":
            val = "true" if args.plot else None
        if val is not None:
            cfg[key] = str(val)
    if not cfg["out"]:
        cfg["out"] = str(Path("latcov_out") / args.subcommand)
    cfg["subcommand"] = args.subcommand
    return cfg


def _need(cfg, key):
    if cfg.get(key) in (None, ""):
        raise UsageError(f"--{key} is required for {cfg['subcommand']}")
    return cfg[key]


def _bool(text) -> bool:
    return str(text).lower() in ("1", "true", "yes", "on")


# -- subcommands --------------------------------------------------------------------

def _cmd_spectrum(cfg, out: Path) -> str:
    from .quadform import enumerate_spectrum
    sp = enumerate_spectrum(parse_form(_need(cfg, "form")), float(Fraction(_need(cfg, "ymax"))))
    sp.to_csv(out / "spectrum.csv")
    return (f"form {sp.form}: {len(sp)} distinct frequencies, "
            f"{sp.total_multiplicity} vectors with Y <= {sp.y_max}\n")


def _cmd_count(cfg, out: Path) -> str:
    import csv
    from .counting import GridSpec, error_normalized, lattice_count, sample_error
    form = parse_form(_need(cfg, "form"))
    lines = []
    with open(out / "count.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["R", "count", "F"])
        for R in _floats(_need(cfg, "R")):
            n = lattice_count(form, R)
            F = error_normalized(form, R) if R > 0 else float("nan")
            w.writerow([f"{R:.17g}", n, f"{F:.17g}"])
            lines.append(f"N({R:g}) = {n}, F = {F:.10g}")
    if cfg.get("T"):
        h = float(cfg["h"]) if cfg.get("h") else None
        s = sample_error(form, float(cfg["T"]), GridSpec(float(cfg["step"])), h=h)
        s.to_csv(out / "samples.csv")
        lines.append(f"{len(s)} samples of F on [1, {cfg['T']}] written")
    return "\n".join(lines) + "\n"


def _cmd_covar_global(cfg, out: Path) -> str:
    from .covariance import covariance_report
    f1, f2 = parse_form(_need(cfg, "form1")), parse_form(_need(cfg, "form2"))
    step = float(cfg["step"]) if cfg.get("step") else None
    rep = covariance_report(f1, f2, float(_need(cfg, "T")), float(_need(cfg, "ymax")), step=step)
    rep.to_csv(out / "report.csv")
    return rep.to_text()


def _cmd_covar_window(cfg, out: Path) -> str:
    import csv
    from .covariance import (classify_pair, common_arrays, covariance_report, f_of_h,
                             predicted_covariance, write_plot_script)
    from .quadform import enumerate_spectrum
    f1, f2 = parse_form(_need(cfg, "form1")), parse_form(_need(cfg, "form2"))
    ymax = float(_need(cfg, "ymax"))
    hs = _floats(_need(cfg, "h"))
    try:
        case = classify_pair(f1, f2, irrational=_bool(cfg.get("irrational")))
    except LatcovError as exc:
        case, note = None, f"no asymptotic regime: {exc}\n"
    else:
        note = f"regime: {case.kind}\n"
    cs = common_arrays(enumerate_spectrum(f1, ymax), enumerate_spectrum(f2, ymax))
    fs = [f_of_h(cs, h) for h in hs]
    preds = [predicted_covariance(case, h) if case else float("nan") for h in hs]
    with open(out / "f_of_h.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "f", "predicted"])
        for h, f, p in zip(hs, fs, preds):
            w.writerow([f"{h:.17g}", f"{f:.17g}", f"{p:.17g}"])
    text = note + "".join(f"h = {h:g}: f = {f:.10g}, predicted = {p:.10g}\n"
                          for h, f, p in zip(hs, fs, preds))
    if _bool(cfg.get("plot")):
        write_plot_script(out / "f_of_h", hs, fs, preds)
    if cfg.get("T"):
        step = float(cfg["step"]) if cfg.get("step") else None
        for h in hs:
            rep = covariance_report(f1, f2, float(cfg["T"]), ymax, h=h, step=step, case=case)
            rep.to_csv(out / f"report_h{h:g}.csv")
            text += rep.to_text()
    return text


def _cmd_dio_gap(cfg, out: Path) -> str:
    import csv
    from .covariance import diophantine_gap, kappa_fit
    f1, f2 = parse_form(_need(cfg, "form1")), parse_form(_need(cfg, "form2"))
    Ms = _ints(_need(cfg, "M"))
    gaps = [diophantine_gap(f1, f2, M) for M in Ms]
    with open(out / "gaps.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "gap", "n1", "n2", "m1", "m2"])
        for g in gaps:
            w.writerow([g.M, f"{g.gap:.17g}", *(g.n or ("", "")), *(g.m or ("", ""))])
    text = "".join(f"D({g.M}) = {g.gap:.10g} at n={g.n}, m={g.m}\n" for g in gaps)
    if len(Ms) >= 2:
        text += f"fitted kappa = {kappa_fit(Ms, gaps):.6g}\n"
    return text


def _cmd_appendix_sums(cfg, out: Path) -> str:
    from .arith import partial_sum
    kind = _need(cfg, "kind")
    params = () if kind == "mult_case" else (int(cfg["a"]), int(cfg["b"]))
    N = int(_need(cfg, "N"))
    if N > 10**7:
        raise UsageError("N must be at most 10^7 in table mode")
    try:
        fit = partial_sum(kind, N, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    fit.to_csv(out / "partial_sums.csv")
    return fit.summary()


def _cmd_densities(cfg, out: Path) -> str:
    from .singular import densities_to_csv, density_report
    reports = []
    for p in _ints(_need(cfg, "p")):
        for a in _ints(_need(cfg, "alpha")):
            kmax = int(cfg["kmax"]) if cfg.get("kmax") else None
            reports.append(density_report(p, a, kmax))
    densities_to_csv(reports, out / "densities.csv")
    return "".join(
        f"p={r.p} alpha={r.alpha}: closed form {r.closed_form} ({r.lemma_id}), "
        f"N_k/p^3k at k={r.empirical[-1][0]}: {float(r.empirical[-1][1]):.10g}, "
        f"recursions {'hold' if r.recursion_ok else 'FAIL'}\n" for r in reports)


def _cmd_sigma_infinity(cfg, out: Path) -> str:
    from .singular import sigma_infinity, sigma_infinity_mc
    alpha = float(Fraction(_need(cfg, "alpha")))
    est, se = sigma_infinity_mc(alpha, float(cfg["epsilon"]), int(cfg["samples"]), int(cfg["seed"]),
                                correct_bias=_bool(cfg["correct_bias"]))
    exact = sigma_infinity(alpha)
    with open(out / "sigma_infinity.csv", "w") as fh:
        fh.write("alpha,closed_form,estimate,std_error\n")
        fh.write(f"{alpha:.17g},{exact:.17g},{est:.17g},{se:.17g}\n")
    return (f"closed form {exact:.10g}; Monte Carlo {est:.10g} +- {se:.3g} "
            f"({abs(est - exact) / se:.2f} standard errors)\n")


def _cmd_constant_c(cfg, out: Path) -> str:
    from .singular import constant_C
    a, b = int(_need(cfg, "a")), int(_need(cfg, "b"))
    try:
        sc = constant_C(a, b, int(cfg["terms"]))
    except SquareCase as exc:
        (out / "constant_c.csv").write_text(f"factor,value\nsquare_constant,{exc.square_constant:.17g}\n")
        return f"{exc}; square-case constant = {exc.square_constant:.12g}\n"
    sc.to_csv(out / "constant_c.csv")
    return sc.to_text()


def _cmd_verify(cfg, out: Path) -> tuple[str, bool]:
    from .verify import run_suite
    results = run_suite(cfg["suite"])
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    with open(out / "verify.csv", "w") as fh:
        fh.write("check,passed\n")
        fh.writelines(f"{name},{int(ok)}\n" for name, ok, _ in results)
    return "\n".join(lines) + "\n", all(ok for _, ok, _ in results)


# csv file, gnuplot "using" spec, log axes; subcommands with one-row output have none
PLOTS = {
    "spectrum": ("spectrum.csv", "3:4 with impulses", ""),
    "count": ("count.csv", "1:3 with linespoints", ""),
    "dio-gap": ("gaps.csv", "1:2 with linespoints", "xy"),
    "appendix-sums": ("partial_sums.csv", "1:($2/$1) with linespoints", "x"),
    "densities": ("densities.csv", "2:($3/$4) with linespoints", ""),
}


def write_generic_plot(out: Path, subcommand: str) -> str | None:
    """Plot script for the subcommand's main CSV, run from inside ``out``."""
    if subcommand not in PLOTS:
        return None
    name, using, logs = PLOTS[subcommand]
    script = out / f"{Path(name).stem}.plt"
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if logs:
        lines.append(f"set logscale {logs}")
    lines.append(f"plot '{name}' using {using}")
    script.write_text("\n".join(lines) + "\n")
    return script.name


HANDLERS = {
    "spectrum": _cmd_spectrum, "count": _cmd_count, "covar-global": _cmd_covar_global,
    "covar-window": _cmd_covar_window, "dio-gap": _cmd_dio_gap,
    "appendix-sums": _cmd_appendix_sums, "densities": _cmd_densities,
    "sigma-infinity": _cmd_sigma_infinity, "constant-c": _cmd_constant_c,
    "verify": _cmd_verify,
}


def run(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_config(cfg, out / "config.resolved")
    result = HANDLERS[cfg["subcommand"]](cfg, out)
    passed = True
    if isinstance(result, tuple):
        result, passed = result
    if _bool(cfg.get("plot")) and cfg["subcommand"] != "covar-window":
        script = write_generic_plot(out, cfg["subcommand"])
        result += f"plot script: {script}\n" if script else "no plot for this subcommand\n"
    (out / "summary.txt").write_text(result)
    sys.stdout.write(result)
    return 0 if passed else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if cfg.get("threads") and int(cfg["threads"]) < 1:
            raise UsageError("--threads must be positive")
        return run(cfg)
    except (UsageError, LatcovError, ValueError) as exc:
        print(f"latcov {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
