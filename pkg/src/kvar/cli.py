"""Command-line interface.

Subcommands: estimate (one Monte-Carlo estimate), closed-form (exact
values), sweep (estimator curves over a k-grid, written as CSV tables
plus a manifest and a rendered figure), replay (re-run a manifest).

Exit codes: 0 success, 2 usage/domain errors, 3 I/O and dataset errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import (
    DatasetError,
    InsufficientDataError,
    KvarError,
    ParameterError,
    ShapeError,
    UnsupportedFamilyError,
)
from .analytic import (
    UNIT_SQUARE_VARINF,
    kvar_exponential,
    kvar_two_point,
    kvar_uniform,
    varinf_tukey,
    varinf_weibull,
)
from .experiments import SweepConfig, fit_loglog_slope, run_sweep
from .kvariance import estimate_kvar
from .streams import derive_seed
from .measures import (
    Dataset,
    Exponential,
    Gaussian,
    GaussianMixture,
    Logistic,
    LowRankGaussian,
    MeasureSpec,
    SphereUniform,
    TukeyLambda,
    TwoPoint,
    Uniform01,
    Weibull,
    load_dataset,
)

USAGE_ERROR = 2
IO_ERROR = 3

_FLOAT_FMT = "%.17g"


def _fmt(value: float) -> str:
    return _FLOAT_FMT % value


def parse_kgrid(text: str) -> tuple[int, ...]:
    """Parse 'a:b:x2' (geometric), 'a:b:+s' (arithmetic), or 'k1,k2,...'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"k-grid must look like a:b:x2 or a:b:+s, got {text!r}")
        lo_s, hi_s, step = parts
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise ParameterError(f"k-grid bounds must be integers, got {text!r}") from None
        if lo < 1 or hi < lo:
            raise ParameterError(f"k-grid needs 1 <= a <= b, got {text!r}")
        ks = []
        if step.startswith("x"):
            try:
                factor = int(step[1:])
            except ValueError:
                raise ParameterError(f"geometric step must be an integer, got {step!r}") from None
            if factor < 2:
                raise ParameterError(f"geometric factor must be >= 2, got {factor}")
            k = lo
            while k <= hi:
                ks.append(k)
                k *= factor
        elif step.startswith("+"):
            try:
                stride = int(step[1:])
            except ValueError:
                raise ParameterError(f"arithmetic step must be an integer, got {step!r}") from None
            if stride < 1:
                raise ParameterError(f"arithmetic step must be >= 1, got {stride}")
            ks = list(range(lo, hi + 1, stride))
        else:
            raise ParameterError(f"k-grid step must start with 'x' or '+', got {step!r}")
        if not ks:
            raise ParameterError(f"k-grid {text!r} is empty")
        return tuple(ks)
    try:
        ks = tuple(int(p) for p in text.split(",") if p.strip() != "")
    except ValueError:
        raise ParameterError(f"k-grid entries must be integers, got {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise ParameterError(f"k-grid must be nonempty positive integers, got {text!r}")
    return ks


def _parse_floats(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ParameterError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ParameterError(f"expected at least one number, got {text!r}")
    return vals


def _parse_ints(text: str) -> list[int]:
    try:
        vals = [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ParameterError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals:
        raise ParameterError(f"expected at least one integer, got {text!r}")
    return vals


def load_config(path) -> dict[str, str]:
    """Read a flat 'key = value' config file; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ParameterError(f"{path}: line {lineno}: expected 'key = value', got {line.strip()!r}")
            key, value = body.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _merged(args: argparse.Namespace, config: dict[str, str], key: str, cast, default=None):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        raw = config[key]
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _build_family_spec(
    family: str,
    *,
    rate=None,
    shape=None,
    lam=None,
    mean=None,
    cov_diag=None,
    x=None,
    dim=None,
    dprime=None,
) -> MeasureSpec:
    fam = family.strip().lower()
    if fam == "uniform01":
        return Uniform01()
    if fam == "exponential":
        return Exponential(rate=1.0 if rate is None else rate)
    if fam == "weibull":
        if shape is None:
            raise ParameterError("weibull needs --shape")
        return Weibull(shape=shape)
    if fam == "tukey":
        if lam is None:
            raise ParameterError("tukey needs --lambda")
        return TukeyLambda(lam=lam)
    if fam == "logistic":
        return Logistic()
    if fam == "gaussian":
        if mean is None and cov_diag is None:
            d = 1 if dim is None else dim
            return Gaussian(mean=(0.0,) * d, cov_diag=(1.0,) * d)
        mean_t = tuple(_parse_floats(mean)) if mean is not None else None
        cov_t = tuple(_parse_floats(cov_diag)) if cov_diag is not None else None
        if mean_t is None:
            mean_t = (0.0,) * len(cov_t)
        if cov_t is None:
            cov_t = (1.0,) * len(mean_t)
        return Gaussian(mean=mean_t, cov_diag=cov_t)
    if fam == "gmm":
        if x is None or dim is None:
            raise ParameterError("gmm needs --x and --dim")
        return GaussianMixture(separation=x, dim_=dim)
    if fam == "lowrank":
        if dprime is None or dim is None:
            raise ParameterError("lowrank needs --dprime and --dim")
        return LowRankGaussian(rank=dprime, dim_=dim)
    if fam == "sphere":
        if dprime is None or dim is None:
            raise ParameterError("sphere needs --dprime and --dim")
        return SphereUniform(span_dim=dprime, dim_=dim)
    if fam == "two-point":
        return TwoPoint(dim_=1 if dim is None else dim)
    raise ParameterError(
        f"unknown family {family!r}; choose from uniform01, exponential, weibull, tukey, "
        "logistic, gaussian, gmm, lowrank, sphere, two-point"
    )


def _family_param_argv(args: argparse.Namespace, *, x_attr: str = "x", dprime_attr: str = "dprime") -> list[str]:
    """Flags that pin down the family parameters, for replayable manifests."""
    argv: list[str] = []
    for flag, val in (
        ("--rate", args.rate), ("--shape", args.shape), ("--lambda", args.lam),
        ("--mean", args.mean), ("--cov-diag", args.cov_diag),
        ("--x", getattr(args, x_attr, None)),
        ("--dim", args.dim), ("--dprime", getattr(args, dprime_attr, None)),
    ):
        if val is not None:
            argv += [flag, str(val)]
    return argv


def _threads(args: argparse.Namespace, config: dict[str, str]) -> int:
    val = getattr(args, "threads", None)
    if val is None and "threads" in config:
        val = int(config["threads"])
    if val is None:
        env = os.environ.get("KVAR_THREADS", "").strip()
        val = int(env) if env else 1
    if val < 1:
        raise ParameterError(f"--threads must be >= 1, got {val}")
    return val


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_manifest(path: Path, command: str, argv: list[str], seed: int, outputs: list[str]) -> None:
    doc = {
        "tool": "kvar",
        "version": __version__,
        "command": command,
        "argv": argv,
        "master_seed": seed,
        "outputs": outputs,
        "started_utc": _utc_now(),
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _estimate_csv_lines(est, radius_given: bool) -> list[str]:
    radius = _fmt(est.mcdiarmid) if (radius_given and est.mcdiarmid is not None) else ""
    return [
        "k,d,n,estimate,stderr,mcdiarmid_radius",
        f"{est.k},{est.d},{est.n},{_fmt(est.estimate)},{_fmt(est.stderr)},{radius}",
    ]


def _sweep_csv_lines(records) -> list[str]:
    lines = ["label,k,estimate,stderr,n,elapsed_seconds"]
    for r in records:
        lines.append(
            f"{r.label},{r.k},{_fmt(r.estimate)},{_fmt(r.stderr)},{r.n},{r.elapsed_seconds:.6f}"
        )
    return lines


def _slug(label: str) -> str:
    return "".join(c if (c.isalnum() or c in "._-") else "_" for c in label)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_estimate(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else {}
    family = _merged(args, config, "family", str)
    dataset_path = _merged(args, config, "dataset", str)
    if (family is None) == (dataset_path is None):
        raise ParameterError("estimate needs exactly one of --family or --dataset")
    k = _merged(args, config, "k", int)
    n = _merged(args, config, "n", int)
    if k is None or n is None:
        raise ParameterError("estimate needs --k and --n")
    seed = _merged(args, config, "seed", int, 0)
    radius = _merged(args, config, "radius", float)
    threads = _threads(args, config)

    if dataset_path is not None:
        spec: MeasureSpec = Dataset(handle=load_dataset(dataset_path))
    else:
        spec = _build_family_spec(
            family,
            rate=args.rate,
            shape=args.shape,
            lam=args.lam,
            mean=args.mean,
            cov_diag=args.cov_diag,
            x=args.x,
            dim=args.dim,
            dprime=args.dprime,
        )
    est = estimate_kvar(spec, k, n, seed, workers=threads, support_radius=radius)
    lines = _estimate_csv_lines(est, radius_given=radius is not None)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        argv = ["estimate", "--k", str(k), "--n", str(n), "--seed", str(seed)]
        if dataset_path is not None:
            argv += ["--dataset", str(dataset_path)]
        else:
            argv += ["--family", family] + _family_param_argv(args)
        if radius is not None:
            argv += ["--radius", repr(radius)]
        _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "estimate", argv, seed, [out.name])
    else:
        print("\n".join(lines))
    return 0


def cmd_closed_form(args: argparse.Namespace) -> int:
    form = args.form
    if form == "uniform":
        value = kvar_uniform(args.k)
    elif form == "exponential":
        value = kvar_exponential(args.k, rate=args.rate)
    elif form == "weibull-inf":
        value = varinf_weibull(args.alpha)
    elif form == "tukey-inf":
        value = varinf_tukey(args.lam)
    elif form == "two-point":
        value = kvar_two_point(args.k, args.d)
    elif form == "unit-square-inf":
        value = UNIT_SQUARE_VARINF
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown closed form {form!r}")
    print("infinite" if math.isinf(value) else _fmt(value))
    return 0


def _sweep_curves(args: argparse.Namespace, config: dict[str, str], threads: int):
    """Build (curves, slopes, canonical argv tail) for the chosen sweep mode."""
    mode = args.mode
    kgrid_text = _merged(args, config, "kgrid", str)
    n = _merged(args, config, "n", int)
    seed = _merged(args, config, "seed", int, 0)
    if kgrid_text is None or n is None:
        raise ParameterError("sweep needs --kgrid and --n")
    kgrid = parse_kgrid(kgrid_text)
    cutoff = _merged(args, config, "cutoff", int, 32)
    do_fit = bool(getattr(args, "fit", False)) or (
        "fit" in config and _merged(args, config, "fit", bool, False)
    )

    if mode in ("gmm", "lowdim", "sphere"):
        d = _merged(args, config, "d", int)
        if d is None:
            raise ParameterError(f"sweep {mode} needs --d")
        if mode == "gmm":
            xs_text = _merged(args, config, "x", str)
            if xs_text is None:
                raise ParameterError("sweep gmm needs --x")
            labelled = [(f"x={float(x):g}", GaussianMixture(separation=float(x), dim_=d))
                        for x in _parse_floats(xs_text)]
            argv = ["sweep", "gmm", "--d", str(d), "--x", xs_text]
        else:
            dprimes_text = _merged(args, config, "dprime", str)
            if dprimes_text is None:
                raise ParameterError(f"sweep {mode} needs --dprime")
            make = (
                (lambda r: LowRankGaussian(rank=r, dim_=d))
                if mode == "lowdim"
                else (lambda r: SphereUniform(span_dim=r, dim_=d))
            )
            labelled = [(f"dprime={r}", make(r)) for r in _parse_ints(dprimes_text)]
            argv = ["sweep", mode, "--d", str(d), "--dprime", dprimes_text]
        curves = {}
        # per-curve seeds derived by curve index, matching gmm_sweep/sphere_sweep
        for idx, (label, spec) in enumerate(labelled):
            curves[label] = run_sweep(
                SweepConfig(
                    spec=spec,
                    k_grid=kgrid,
                    n_per_k=n,
                    master_seed=derive_seed(seed, idx),
                    label=label,
                    workers=threads,
                )
            )
    elif mode == "dataset":
        path = _merged(args, config, "path", str)
        if path is None:
            raise ParameterError("sweep dataset needs --path")
        spec = Dataset(handle=load_dataset(path))
        curves = {
            "dataset": run_sweep(
                SweepConfig(
                    spec=spec, k_grid=kgrid, n_per_k=n, master_seed=seed,
                    label="dataset", workers=threads,
                )
            )
        }
        argv = ["sweep", "dataset", "--path", str(path)]
    elif mode == "family":
        family = _merged(args, config, "family", str)
        if family is None:
            raise ParameterError("sweep family needs --family")
        spec = _build_family_spec(
            family,
            rate=args.rate,
            shape=args.shape,
            lam=args.lam,
            mean=args.mean,
            cov_diag=args.cov_diag,
            x=args.x_param,
            dim=args.dim,
            dprime=getattr(args, "dprime_param", None),
        )
        curves = {
            family: run_sweep(
                SweepConfig(
                    spec=spec, k_grid=kgrid, n_per_k=n, master_seed=seed,
                    label=family, workers=threads,
                )
            )
        }
        argv = ["sweep", "family", "--family", family] + _family_param_argv(
            args, x_attr="x_param", dprime_attr="dprime_param"
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown sweep mode {mode!r}")

    argv += ["--kgrid", kgrid_text, "--n", str(n), "--seed", str(seed), "--cutoff", str(cutoff)]
    if do_fit:
        argv.append("--fit")
    return curves, do_fit, cutoff, argv, seed


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else {}
    threads = _threads(args, config)
    curves, do_fit, cutoff, argv, seed = _sweep_curves(args, config, threads)

    out_dir = Path(_merged(args, config, "out", str, f"kvar-sweep-{args.mode}"))
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for label, records in curves.items():
        name = f"{_slug(label)}.csv"
        (out_dir / name).write_text("\n".join(_sweep_csv_lines(records)) + "\n", encoding="utf-8")
        outputs.append(name)

    # tables are on disk before any fit can fail
    slopes = {}
    if do_fit:
        for label, records in curves.items():
            slopes[label] = fit_loglog_slope(records, k_min=cutoff)

    plot = not args.no_plot and _merged(args, config, "plot", bool, True)
    if plot:
        from .figures import render_sweep_figure

        render_sweep_figure(curves, out_dir / "sweep.png", title=f"sweep {args.mode}", slopes=slopes or None)
        outputs.append("sweep.png")

    _write_manifest(out_dir / "manifest.json", f"sweep {args.mode}", argv, seed, outputs)

    for label, fit in slopes.items():
        print(f"{label}: slope={fit.slope:.6f} intercept={fit.intercept:.6f} "
              f"r2={fit.r_squared:.6f} points={fit.n_points}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    argv = list(doc["argv"])
    out_dir = args.out
    if out_dir is None:
        raise ParameterError("replay needs --out (a fresh directory for the replayed outputs)")
    argv += ["--out", str(out_dir)]
    if argv and argv[0] == "sweep":
        argv.append("--no-plot")
    return main(argv)


# ---------------------------------------------------------------------------
# parser


def _add_family_params(p: argparse.ArgumentParser, x_dest: str = "x", dprime_dest: str = "dprime") -> None:
    p.add_argument("--rate", type=float, help="exponential rate")
    p.add_argument("--shape", type=float, help="weibull shape")
    p.add_argument("--lambda", dest="lam", type=float, help="tukey lambda")
    p.add_argument("--mean", type=str, help="gaussian mean, comma list")
    p.add_argument("--cov-diag", type=str, help="gaussian covariance diagonal, comma list")
    p.add_argument("--x", dest=x_dest, type=float, help="mixture separation in [0,1)")
    p.add_argument("--dim", type=int, help="ambient dimension")
    p.add_argument("--dprime", dest=dprime_dest, type=int, help="intrinsic/span dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kvar", description="k-variance estimates, closed forms, and sweeps")
    parser.add_argument("--version", action="version", version=f"kvar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="Monte-Carlo k-variance estimate")
    p_est.add_argument("--family", type=str)
    p_est.add_argument("--dataset", type=str, help="delimited numeric file, bootstrap resampled")
    p_est.add_argument("--k", type=int)
    p_est.add_argument("--n", type=int, help="number of trials")
    p_est.add_argument("--seed", type=int)
    p_est.add_argument("--radius", type=float, help="support radius for the concentration bound")
    p_est.add_argument("--out", type=str, help="write CSV here instead of stdout")
    p_est.add_argument("--threads", type=int)
    p_est.add_argument("--config", type=str, help="flat key=value config file; flags override it")
    _add_family_params(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_cf = sub.add_parser("closed-form", help="exact k-variance values")
    cf_sub = p_cf.add_subparsers(dest="form", required=True)
    cf_uniform = cf_sub.add_parser("uniform")
    cf_uniform.add_argument("--k", type=int, required=True)
    cf_exp = cf_sub.add_parser("exponential")
    cf_exp.add_argument("--k", type=int, required=True)
    cf_exp.add_argument("--rate", type=float, default=1.0)
    cf_weib = cf_sub.add_parser("weibull-inf")
    cf_weib.add_argument("--alpha", type=float, required=True, help="weibull shape")
    cf_tukey = cf_sub.add_parser("tukey-inf")
    cf_tukey.add_argument("--lambda", dest="lam", type=float, required=True)
    cf_two = cf_sub.add_parser("two-point")
    cf_two.add_argument("--k", type=int, required=True)
    cf_two.add_argument("--d", type=int, required=True)
    cf_sub.add_parser("unit-square-inf")
    p_cf.set_defaults(func=cmd_closed_form)

    p_sweep = sub.add_parser("sweep", help="estimator curves over a k-grid")
    sweep_sub = p_sweep.add_subparsers(dest="mode", required=True)
    common = []
    for mode in ("gmm", "lowdim", "sphere", "dataset", "family"):
        sp = sweep_sub.add_parser(mode)
        sp.add_argument("--kgrid", type=str, help="a:b:x2 geometric, a:b:+s arithmetic, or comma list")
        sp.add_argument("--n", type=int, help="trials per grid point")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=str, help="output directory")
        sp.add_argument("--fit", action="store_true", help="fit and print log-log slopes")
        sp.add_argument("--cutoff", type=int, help="smallest k included in slope fits (default 32)")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--config", type=str, help="flat key=value config file; flags override it")
        sp.add_argument("--no-plot", action="store_true", help="skip the rendered figure")
        sp.set_defaults(func=cmd_sweep, mode=mode)
        common.append(sp)
    sp_gmm, sp_lowdim, sp_sphere, sp_dataset, sp_family = common
    sp_gmm.add_argument("--d", type=int, help="ambient dimension")
    sp_gmm.add_argument("--x", type=str, help="comma list of separations")
    sp_lowdim.add_argument("--d", type=int, help="ambient dimension")
    sp_lowdim.add_argument("--dprime", type=str, help="comma list of ranks")
    sp_sphere.add_argument("--d", type=int, help="ambient dimension")
    sp_sphere.add_argument("--dprime", type=str, help="comma list of span dimensions")
    sp_dataset.add_argument("--path", type=str, help="delimited numeric file")
    sp_family.add_argument("--family", type=str)
    _add_family_params(sp_family, x_dest="x_param", dprime_dest="dprime_param")

    p_replay = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p_replay.add_argument("manifest", type=str)
    p_replay.add_argument("--out", type=str, help="directory for the replayed outputs")
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, UnsupportedFamilyError, ShapeError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except KvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
