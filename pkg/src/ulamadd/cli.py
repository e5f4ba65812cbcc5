"""Command-line front end for the adding-process toolkit.

Every subcommand resolves its flags into a config dictionary that is
embedded verbatim in the output (CSV comment lines or the JSON ``meta``
block) together with the package version, so any output file can be rerun
to byte-identical data.  Floats are serialized with 17 significant digits.

Exit codes: 0 success, 2 flag/validation errors, 1 numerical failures
(nonconvergence, infeasible fits), the latter with a diagnostic JSON on the
selected output stream.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, continuous, exact, martingales, stats
from .process import (
    ConstantWeight,
    ContinuizedSpec,
    DiscreteInit,
    DiscreteSpec,
    PathInit,
    TwoPointWeight,
    WeightSpec,
    simulate_continuized,
    simulate_discrete,
    simulate_discrete_weighted,
)

__all__ = ["main"]


class _CliError(Exception):
    """Validation problem: reported on stderr, exit code 2."""


# ------------------------------------------------------------ serialization


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt_float(value)
    return str(value)


def _json_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{key}": {_json_text(val, indent + 1)}'
            for key, val in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq)
        if flat:
            return "[" + ", ".join(_json_text(v) for v in seq) + "]"
        items = [inner + _json_text(v, indent + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        return _json_text({"re": obj.real, "im": obj.imag}, indent)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_out(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _meta(command: str, config: dict) -> dict:
    return {
        "tool": "ulamadd",
        "version": __version__,
        "command": command,
        "config": config,
    }


def _emit_table(args, command: str, config: dict, columns, rows) -> None:
    meta = _meta(command, config)
    if args.format == "json":
        payload = {
            "meta": meta,
            "data": {"columns": list(columns), "rows": [list(r) for r in rows]},
        }
        _write_out(args, _json_text(payload))
        return
    lines = [
        f"# ulamadd {__version__}",
        "# config " + _json_text({"command": command, **config}).replace("\n", " "),
        ",".join(columns),
    ]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    _write_out(args, "\n".join(lines))


def _emit_object(args, command: str, config: dict, data: dict) -> None:
    _write_out(args, _json_text({"meta": _meta(command, config), "data": data}))


# ------------------------------------------------------------ flag parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as err:
        raise _CliError(f"expected comma-separated numbers, got {text!r}") from err


def _ints(text: str) -> list[int]:
    values = _floats(text)
    out = [int(round(v)) for v in values]
    if any(abs(v - i) > 1e-9 for v, i in zip(values, out)):
        raise _CliError(f"expected integers, got {text!r}")
    return out


def _int_grid(lo: int, hi: int, count: int) -> list[int]:
    if hi < lo:
        raise _CliError("grid upper end below its start")
    pts = np.unique(
        np.round(np.geomspace(lo, hi, num=min(count, hi - lo + 1))).astype(np.int64)
    )
    return [int(v) for v in pts]


def _weight_arg(text: str | None, fallback: float):
    if text is None:
        return ConstantWeight(float(fallback))
    parts = _floats(text)
    if len(parts) != 3:
        raise _CliError("random weight takes v1,v2,prob1")
    return TwoPointWeight(parts[0], parts[1], parts[2])


def _path_init(args) -> PathInit:
    values = _floats(args.init)
    tau = float(getattr(args, "tau", 0.0) or 0.0)
    if tau == 0.0:
        if len(values) != 1:
            raise _CliError("a point start (tau = 0) takes a single init value")
        return PathInit(0.0, values)
    return PathInit(tau, values)


# ------------------------------------------------------------ subcommands


def _cmd_simulate(args) -> int:
    init_vals = _floats(args.init)
    seed = int(args.seed)
    if args.kind == "discrete":
        r = len(init_vals)
        n_max = int(args.n)
        if n_max < r:
            raise _CliError("n must be at least the initial history length")
        grid = _ints(args.grid) if args.grid else _int_grid(r, n_max, 25)
        if grid[0] < r or grid[-1] > n_max:
            raise _CliError("grid indices must lie in [r, n]")
        config = {
            "kind": "discrete",
            "init": init_vals,
            "p": args.p,
            "a": args.a,
            "b": args.b,
            "n": n_max,
            "grid": grid,
            "seed": seed,
        }
        try:
            traj = simulate_discrete_weighted(
                DiscreteInit(init_vals), args.p, n_max, seed, args.a, args.b
            )
        except ValueError as err:
            raise _CliError(str(err)) from err
        rows = [
            (n, traj.values[n - 1], traj.partial_sums[n - 1]) for n in grid
        ]
        _emit_table(args, "simulate", config, ("n", "x", "s"), rows)
        return 0
    init = _path_init(args)
    t_max = float(args.t_max)
    if not t_max > init.tau:
        raise _CliError("t-max must exceed tau")
    if args.grid:
        grid = _floats(args.grid)
    else:
        grid = list(init.tau + (t_max - init.tau) * np.arange(1, 21) / 20.0)
    if any(t2 <= t1 for t1, t2 in zip(grid, grid[1:])) or grid[0] <= init.tau:
        raise _CliError("grid times must be strictly increasing and exceed tau")
    if grid[-1] > t_max:
        raise _CliError("grid times must not exceed t-max")
    spec = ContinuizedSpec(
        args.alpha,
        args.beta,
        WeightSpec(_weight_arg(args.random_a, args.a), _weight_arg(args.random_b, args.b)),
    )
    config = {
        "kind": "continuized",
        "init": list(init.values),
        "tau": init.tau,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "a": args.a,
        "b": args.b,
        "random_a": args.random_a,
        "random_b": args.random_b,
        "t_max": t_max,
        "grid": grid,
        "seed": seed,
    }
    traj = simulate_continuized(init, spec, t_max, seed)
    rows = [(t, traj.value_at(t), traj.integral(t)) for t in grid]
    _emit_table(args, "simulate", config, ("t", "x", "s"), rows)
    return 0


def _cmd_exact(args) -> int:
    init_vals = _floats(args.init)
    r = len(init_vals)
    n_max = int(args.n)
    moment = int(args.moment)
    if n_max < r:
        raise _CliError("n must be at least the initial history length")
    if moment in (3, 4) and (args.p != 1.0 or init_vals != [1.0]):
        raise _CliError("moments 3 and 4 are exact for p = 1, init = [1] only")
    grid = _ints(args.grid) if args.grid else _int_grid(r, n_max, 24)
    if grid[0] < r or grid[-1] > n_max:
        raise _CliError("grid indices must lie in [r, n]")
    config = {
        "init": init_vals,
        "p": args.p,
        "moment": moment,
        "n": n_max,
        "grid": grid,
    }
    init = DiscreteInit(init_vals)
    if moment == 1:
        seq = exact.mean_sequence(init, args.p, n_max)
        offset = 1
    elif moment == 2:
        seq = exact.second_moment_sequence(init, args.p, n_max)
        offset = r
    elif moment == 3:
        seq = exact.third_moment_sequence(n_max)
        offset = 1
    else:
        seq = exact.fourth_moment_sequence(n_max)
        offset = 1
    rows = [
        (n, seq[n - offset], seq[n - offset] / float(n) ** moment) for n in grid
    ]
    _emit_table(args, "exact", config, ("n", "value", "scaled"), rows)
    return 0


def _cmd_continuous(args) -> int:
    grid = _floats(args.grid) if args.grid else list(np.geomspace(1.0, args.t_max, 24))
    if any(t <= 0 for t in grid) or any(
        t2 <= t1 for t1, t2 in zip(grid, grid[1:])
    ):
        raise _CliError("grid times must be positive and strictly increasing")
    if args.product:
        theta = float(args.theta)
        if not 0.0 < theta <= 1.0:
            raise _CliError("theta must lie in (0, 1]")
        config = {"product": True, "theta": theta, "grid": grid}
        rows = []
        for t in grid:
            c = continuous.product_moment_continuized(theta * t, t)
            rows.append((theta * t, t, c, c / t**2))
        _emit_table(
            args, "continuous", config, ("s", "t", "value", "scaled"), rows
        )
        return 0
    moment = int(args.moment)
    config = {"moment": moment, "grid": grid}
    if moment == 1:
        init = _path_init(args)
        config["init"] = list(init.values)
        config["tau"] = init.tau
        rows = [
            (t, continuous.mean_continuized(init, t)) for t in grid
        ]
        rows = [(t, v, v / t) for t, v in rows]
    elif moment == 2:
        if args.init != "1" or args.tau:
            raise _CliError("the second-moment system starts from x(0) = 1")
        values = continuous.second_moment_continuized_base(grid)
        rows = [(t, v, v / t**2) for t, v in zip(grid, values)]
    elif moment == 3:
        if args.init != "1" or args.tau:
            raise _CliError("the third-moment system starts from x(0) = 1")
        values = continuous.third_moment_continuized_base(grid)
        rows = [(t, v, v / t**4) for t, v in zip(grid, values)]
    else:
        raise _CliError("moment must be 1, 2, or 3")
    _emit_table(args, "continuous", config, ("t", "value", "scaled"), rows)
    return 0


def _growth_payload(report: continuous.GrowthReport) -> dict:
    payload = {
        "sigma": [
            {"re": root.real, "im": root.imag} for root in report.sigma_roots
        ],
        "oscillatory": report.oscillatory,
        "mean_growth": report.mean_growth,
        "second_moment_exponent": report.second_moment_exponent,
        "region_label": report.region_label,
        "repeated_sigma": report.repeated_sigma,
    }
    if report.repeated_sigma:
        payload["note"] = (
            "sigma roots coincide; growth may carry a logarithmic factor"
        )
    return payload


def _cmd_classify(args) -> int:
    if not (args.alpha > 0 and args.beta > 0):
        raise _CliError("alpha and beta must be positive")
    wa = _weight_arg(args.random_a, args.A)
    wb = _weight_arg(args.random_b, args.B)
    config = {
        "alpha": args.alpha,
        "beta": args.beta,
        "A": args.A,
        "B": args.B,
        "random_a": args.random_a,
        "random_b": args.random_b,
    }
    report = continuous.classify_regions(args.alpha, args.beta, wa, wb)
    _emit_object(args, "classify", config, _growth_payload(report))
    return 0


def _cmd_martingale(args) -> int:
    seed = int(args.seed)
    init_vals = _floats(args.init)
    if args.variant in ("base", "p-adding", "weighted"):
        r = len(init_vals)
        n_max = int(args.n)
        if n_max < r:
            raise _CliError("n must be at least the initial history length")
        grid = _ints(args.grid) if args.grid else _int_grid(r, n_max, 25)
        init = DiscreteInit(init_vals)
        config = {
            "variant": args.variant,
            "init": init_vals,
            "n": n_max,
            "grid": grid,
            "seed": seed,
        }
        if args.variant == "base":
            traj = simulate_discrete(init, 1.0, n_max, seed)
            series = martingales.base_martingale(traj)
            expected = martingales.base_expected_limit(init)
        elif args.variant == "p-adding":
            if not 0.0 < args.p < 1.0:
                raise _CliError("p-adding needs p in (0, 1)")
            config["p"] = args.p
            traj = simulate_discrete(init, args.p, n_max, seed)
            series = martingales.p_martingale(traj, args.p)
            expected = martingales.p_expected_limit(init, args.p)
        else:
            if not args.a + args.b > 1.0:
                raise _CliError("weighted martingale needs a + b > 1")
            config["a"], config["b"] = args.a, args.b
            traj = simulate_discrete_weighted(
                init, 1.0, n_max, seed, args.a, args.b
            )
            series = martingales.generalized_discrete_martingale(
                traj, args.a, args.b
            )
            expected = math.exp(
                math.lgamma(r) - math.lgamma(r + args.a + args.b)
            ) * sum(init_vals)
        lookup = {int(n): v for n, v in zip(series.indices, series.values)}
        try:
            rows = [(n, lookup[n]) for n in grid]
        except KeyError as err:
            raise _CliError(f"grid index {err} outside the series range") from err
        config["expected_limit"] = expected
        _emit_table(args, "martingale", config, ("n", "m"), rows)
        return 0
    if args.variant != "continuized":
        raise _CliError("variant must be base, p-adding, weighted, or continuized")
    init = _path_init(args)
    t_max = float(args.t_max)
    if args.grid:
        grid = _floats(args.grid)
    else:
        lo = max(init.tau, t_max / 100.0)
        grid = list(np.geomspace(max(lo, 1e-3), t_max, 20))
    config = {
        "variant": "continuized",
        "init": list(init.values),
        "tau": init.tau,
        "t_max": t_max,
        "grid": grid,
        "seed": seed,
        "expected_limit": martingales.continuized_expected_limit(init),
    }
    traj = simulate_continuized(init, ContinuizedSpec(), t_max, seed)
    series = martingales.continuized_martingale(traj, np.asarray(grid))
    rows = list(zip(grid, series.values))
    _emit_table(args, "martingale", config, ("t", "m"), rows)
    return 0


def _cmd_fit(args) -> int:
    mus = (args.mu1, args.mu2, args.mu3)
    if any(not m > 0 for m in mus):
        raise _CliError("moments must be positive")
    config = {"mu1": args.mu1, "mu2": args.mu2, "mu3": args.mu3}
    report = stats.loggamma_fit(*mus)
    _emit_object(
        args,
        "fit",
        config,
        {
            "log_scale": report.log_scale,
            "gamma_shape": report.gamma_shape,
            "gamma_scale": report.gamma_scale,
            "fitted_moments": list(report.fitted_moments),
            "residuals": list(report.residuals),
            "fourth_moment": report.fourth_moment,
        },
    )
    return 0


def _cmd_distance(args) -> int:
    n_values = _ints(args.n)
    if any(n < 2 for n in n_values):
        raise _CliError("indices must be at least 2")
    reps = int(args.reps)
    if reps < 100:
        raise _CliError("need at least 100 replicates for the distance")
    target = args.target.strip().lower()
    if target not in ("gamma2", "exp1"):
        raise _CliError("target must be Gamma2 or Exp1")
    variant = args.variant or ("value" if target == "gamma2" else "selection")
    if variant not in ("value", "selection", "pair"):
        raise _CliError("variant must be value, selection, or pair")
    seed = int(args.seed)
    config = {
        "target": target,
        "variant": variant,
        "n": n_values,
        "reps": reps,
        "seed": seed,
    }
    ens = stats.mc_ensemble(
        DiscreteSpec(1.0), DiscreteInit((1.0,)), n_values, reps, seed
    )
    rows = []
    for n in n_values:
        lls = stats.limit_density_samples(ens, n)
        samples = {
            "value": lls.scaled_value,
            "selection": lls.scaled_selection,
            "pair": lls.scaled_pair_sum,
        }[variant]
        rows.append((n, stats.wasserstein2(samples, target)))
    _emit_table(args, "distance", config, ("n", "distance"), rows)
    return 0


def _cmd_figures(args) -> int:
    which = int(args.which)
    seed = int(args.seed)
    if which == 1:
        n = int(args.n)
        reps = int(args.reps)
        config = {"which": 1, "n": n, "reps": reps, "seed": seed}
        ens = stats.mc_ensemble(
            DiscreteSpec(1.0), DiscreteInit((1.0,)), [n], reps, seed
        )
        lls = stats.limit_density_samples(ens, n)
        mids = lls.bin_mid
        reference = mids * np.exp(-mids)
        width = lls.bin_edges[1] - lls.bin_edges[0]
        rows = []
        for name, density in (
            ("scaled_value", lls.value_density),
            ("scaled_pair_sum", lls.pair_sum_density),
        ):
            for i, mid in enumerate(mids):
                rows.append(
                    (
                        name,
                        lls.bin_edges[i],
                        lls.bin_edges[i + 1],
                        int(round(density[i] * reps * width)),
                        density[i],
                        reference[i],
                    )
                )
        _emit_table(
            args,
            "figures",
            config,
            ("variable", "bin_left", "bin_right", "count", "density", "reference_density"),
            rows,
        )
        return 0
    if which == 2:
        p_grid = (
            _floats(args.p_grid)
            if args.p_grid
            else [round(0.05 * k, 2) for k in range(2, 21)]
        )
        if any(not 0.0 < p <= 1.0 for p in p_grid):
            raise _CliError("p values must lie in (0, 1]")
        config = {
            "which": 2,
            "p_grid": p_grid,
            "endpoint_exact": exact.K_closed_form((1.0,)),
            "small_p_limit": continuous.named_constants()["K_continuized_base"],
        }
        rows = [(p, exact.K_operational(p) / p**2) for p in p_grid]
        _emit_table(args, "figures", config, ("p", "k_over_p2"), rows)
        return 0
    if which == 3:
        p = float(args.p)
        n_values = _ints(args.n_list) if args.n_list else [50, 100, 200, 500, 1000]
        config = {"which": 3, "p": p, "n_values": n_values}
        rows = []
        for n in n_values:
            m_values = sorted(
                {max(1, int(round(theta * n))) for theta in np.arange(0.05, 1.0001, 0.05)}
            )
            profile = exact.product_moment_profile((1.0,), p, m_values, n)
            for m, c in zip(m_values, profile):
                rows.append((n, m, m / n, c / n**2))
        _emit_table(
            args, "figures", config, ("n", "m", "m_over_n", "c_over_n2"), rows
        )
        return 0
    if which in (4, 5, 6):
        alpha, beta = {
            4: (1.0, 1.0),
            5: (2.0, 1.0),
            6: (8.0, 0.5),
        }[which]
        if args.alpha is not None:
            alpha = float(args.alpha)
        if args.beta is not None:
            beta = float(args.beta)
        if not (alpha > 0 and beta > 0):
            raise _CliError("alpha and beta must be positive")
        step = float(args.step)
        if not step > 0:
            raise _CliError("step must be positive")
        lo, hi = float(args.weight_min), float(args.weight_max)
        if hi <= lo:
            raise _CliError("weight-max must exceed weight-min")
        config = {
            "which": which,
            "alpha": alpha,
            "beta": beta,
            "weight_min": lo,
            "weight_max": hi,
            "step": step,
        }
        grid = np.arange(lo, hi + step / 2, step)
        rows = []
        for a_val in grid:
            for b_val in grid:
                report = continuous.classify_regions(
                    alpha, beta, float(a_val), float(b_val)
                )
                rows.append(
                    (
                        float(a_val),
                        float(b_val),
                        report.oscillatory,
                        report.mean_growth,
                        report.region_label,
                    )
                )
        _emit_table(
            args,
            "figures",
            config,
            ("a", "b", "oscillatory", "growing", "region_label"),
            rows,
        )
        return 0
    raise _CliError("figure number must be 1..6")


def _cmd_report(args) -> int:
    seed = int(args.seed)
    reps = int(args.reps)
    if reps < 2:
        raise _CliError("need at least 2 replicates")
    n_exact = int(args.n)
    config = {"seed": seed, "reps": reps, "n": n_exact}
    constants = continuous.named_constants()
    k_base = constants["K_discrete_base"]

    q = exact.second_moment_sequence(DiscreteInit((1.0,)), 1.0, n_exact)[-1]
    t3 = exact.third_moment_sequence(n_exact)[-1]
    f4 = exact.fourth_moment_sequence(n_exact)[-1]
    k_op = exact.K_operational(1.0)

    t_q = 200.0
    q_cont = continuous.second_moment_continuized_base([t_q])[0]

    ens = stats.mc_ensemble(
        DiscreteSpec(1.0), DiscreteInit((1.0,)), [1000], reps, seed
    )
    m = ens.m_samples[:, 0]
    fit = stats.loggamma_fit(1.0, 1.225, 1.932)

    data = {
        "constants": constants,
        "second_moment": {
            "n": n_exact,
            "scaled": q / n_exact**2,
            "limit": k_base,
            "rel_err": q / n_exact**2 / k_base - 1.0,
        },
        "third_moment_scaled": t3 / n_exact**3,
        "fourth_moment_scaled": f4 / n_exact**4,
        "p_adding_endpoint": {
            "richardson": k_op,
            "closed_form": k_base,
            "rel_err": k_op / k_base - 1.0,
        },
        "continuized_second_moment": {
            "t": t_q,
            "scaled": q_cont / t_q**2,
            "limit": constants["K_continuized_base"],
        },
        "martingale_ensemble": {
            "n": 1000,
            "mean": float(m.mean()),
            "se": float(m.std(ddof=1) / math.sqrt(reps)),
            "second_moment": float((m * m).mean()),
            "limit_second_moment": constants["EM2_discrete_base"],
        },
        "loggamma_example": {
            "inputs": [1.0, 1.225, 1.932],
            "fourth_moment": fit.fourth_moment,
        },
    }
    _emit_object(args, "report", config, data)
    return 0


# ------------------------------------------------------------ parser


def _add_output_flags(sub, default_format: str = "csv") -> None:
    sub.add_argument(
        "--format", choices=("csv", "json"), default=default_format,
        help="output encoding",
    )
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulamadd",
        description="History-dependent adding processes: simulation, exact "
        "moments, asymptotics, martingale diagnostics, and limit-law checks.",
    )
    parser.add_argument(
        "--version", action="version", version=f"ulamadd {__version__}"
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="simulate one trajectory")
    sim.add_argument("--kind", choices=("discrete", "continuized"), default="discrete")
    sim.add_argument("--init", default="1", help="comma-separated initial values")
    sim.add_argument("--p", type=float, default=1.0)
    sim.add_argument("--a", type=float, default=1.0)
    sim.add_argument("--b", type=float, default=1.0)
    sim.add_argument("--random-a", default=None, help="v1,v2,prob1 two-point weight")
    sim.add_argument("--random-b", default=None, help="v1,v2,prob1 two-point weight")
    sim.add_argument("--n", type=int, default=1000)
    sim.add_argument("--tau", type=float, default=0.0)
    sim.add_argument("--alpha", type=float, default=1.0)
    sim.add_argument("--beta", type=float, default=1.0)
    sim.add_argument("--t-max", dest="t_max", type=float, default=100.0)
    sim.add_argument("--grid", default=None, help="comma-separated output grid")
    sim.add_argument("--seed", type=int, default=0)
    _add_output_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    exa = subs.add_parser("exact", help="exact moment sequences")
    exa.add_argument("--init", default="1")
    exa.add_argument("--p", type=float, default=1.0)
    exa.add_argument("--moment", type=int, choices=(1, 2, 3, 4), default=2)
    exa.add_argument("--n", type=int, default=100000)
    exa.add_argument("--grid", default=None)
    _add_output_flags(exa)
    exa.set_defaults(func=_cmd_exact)

    con = subs.add_parser("continuous", help="continuized moment curves")
    con.add_argument("--moment", type=int, default=2)
    con.add_argument("--product", action="store_true",
                     help="pair moment c(theta*t, t) instead of a power moment")
    con.add_argument("--theta", type=float, default=0.5)
    con.add_argument("--init", default="1")
    con.add_argument("--tau", type=float, default=0.0)
    con.add_argument("--t-max", dest="t_max", type=float, default=1000.0)
    con.add_argument("--grid", default=None)
    _add_output_flags(con)
    con.set_defaults(func=_cmd_continuous)

    cla = subs.add_parser("classify", help="growth/oscillation classification")
    cla.add_argument("--alpha", type=float, required=True)
    cla.add_argument("--beta", type=float, required=True)
    cla.add_argument("--A", type=float, required=True)
    cla.add_argument("--B", type=float, required=True)
    cla.add_argument("--random-a", default=None, help="v1,v2,prob1 two-point weight")
    cla.add_argument("--random-b", default=None, help="v1,v2,prob1 two-point weight")
    _add_output_flags(cla, default_format="json")
    cla.set_defaults(func=_cmd_classify)

    mar = subs.add_parser("martingale", help="martingale series along a path")
    mar.add_argument("--variant", choices=("base", "p-adding", "weighted", "continuized"),
                     default="base")
    mar.add_argument("--init", default="1")
    mar.add_argument("--p", type=float, default=0.5)
    mar.add_argument("--a", type=float, default=1.0)
    mar.add_argument("--b", type=float, default=1.0)
    mar.add_argument("--n", type=int, default=10000)
    mar.add_argument("--tau", type=float, default=0.0)
    mar.add_argument("--t-max", dest="t_max", type=float, default=1000.0)
    mar.add_argument("--grid", default=None)
    mar.add_argument("--seed", type=int, default=0)
    _add_output_flags(mar)
    mar.set_defaults(func=_cmd_martingale)

    fit = subs.add_parser("fit", help="log-gamma moment fit")
    fit.add_argument("--mu1", type=float, required=True)
    fit.add_argument("--mu2", type=float, required=True)
    fit.add_argument("--mu3", type=float, required=True)
    _add_output_flags(fit, default_format="json")
    fit.set_defaults(func=_cmd_fit)

    dis = subs.add_parser("distance", help="Wasserstein-2 distance to a limit law")
    dis.add_argument("--target", default="Gamma2")
    dis.add_argument("--variant", choices=("value", "selection", "pair"), default=None)
    dis.add_argument("--n", default="100,1000,10000", help="comma-separated indices")
    dis.add_argument("--reps", type=int, default=10000)
    dis.add_argument("--seed", type=int, default=0)
    _add_output_flags(dis)
    dis.set_defaults(func=_cmd_distance)

    fig = subs.add_parser(
        "figures", help="plot-ready data series: histograms, limit curves, region maps"
    )
    fig.add_argument("--which", type=int, required=True)
    fig.add_argument("--n", type=int, default=10000)
    fig.add_argument("--reps", type=int, default=20000)
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--p", type=float, default=0.2)
    fig.add_argument("--p-grid", dest="p_grid", default=None)
    fig.add_argument("--n-list", dest="n_list", default=None)
    fig.add_argument("--alpha", type=float, default=None)
    fig.add_argument("--beta", type=float, default=None)
    fig.add_argument("--weight-min", dest="weight_min", type=float, default=-1.0)
    fig.add_argument("--weight-max", dest="weight_max", type=float, default=3.0)
    fig.add_argument("--step", type=float, default=0.1)
    _add_output_flags(fig)
    fig.set_defaults(func=_cmd_figures)

    rep = subs.add_parser("report", help="one-shot summary battery")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--reps", type=int, default=2000)
    rep.add_argument("--n", type=int, default=20000)
    _add_output_flags(rep, default_format="json")
    rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, usage errors exit 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as err:
        print(f"ulamadd: {err}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, ArithmeticError) as err:
        diagnostic = {
            "meta": _meta(args.command, {}),
            "error": {"type": type(err).__name__, "message": str(err)},
        }
        _write_out(args, _json_text(diagnostic))
        return 1


if __name__ == "__main__":
    sys.exit(main())
