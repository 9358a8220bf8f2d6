"""Command-line sweeps, the per-point diagnostics block and oracle tables.

Rates are in nats unless --bits is given. Output is always in nats.
Exit codes: 0 success, 2 invalid input, 3 solver failure on single-point commands.
"""

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from wimpyrg.composition import ck_perr_exact
from wimpyrg.dist import entropy
from wimpyrg.errors import NoConvergence, RGBreakdown, WimpyError
from wimpyrg.noiseless import NoiselessProblem, perr_crude, perr_old
from wimpyrg.noisy import Channel, NoisyProblem, capacity, perr_crude_noisy
from wimpyrg.oracle import MAX_M, noisy_mc_perr
from wimpyrg.rg import RGConfig, solve

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3
RULE = "=" * 20


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    mode: str
    q: tuple
    n: float
    r_min: float
    r_max: float
    steps: int
    cfg: RGConfig
    channel: tuple = None
    t_orders: tuple = (2,)

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise InputError("need r-min < r-max")
        if self.steps < 2:
            raise InputError("need steps >= 2")

    def rates(self):
        return np.linspace(self.r_min, self.r_max, self.steps)


# ---------------------------------------------------------------- parsing


def parse_floats(text):
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc


def parse_channel(args, nx):
    if args.bsc is not None:
        if not 0.0 < args.bsc < 1.0:
            raise InputError("--bsc flip probability must lie in (0, 1)")
        return Channel.bsc(args.bsc).cond
    if args.channel is None:
        raise InputError("noisy mode needs --bsc or --channel")
    vals = np.array(parse_floats(args.channel))
    if vals.size % nx:
        raise InputError(f"--channel has {vals.size} entries, not a multiple of {nx} rows")
    return Channel(vals.reshape(nx, -1)).cond


def read_config(path):
    """key = value lines; keys are long flag names without dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"config line without '=': {line!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _rate(args, x):
    return None if x is None else (x * math.log(2.0) if args.bits else x)


def _cfg(args, s_fin=None):
    return RGConfig(
        s_fin=args.sfin if s_fin is None else s_fin,
        ds=args.ds,
        include_u=args.include_u,
        max_cycles=args.max_cycles,
    )


def _t_orders(text):
    orders = tuple(int(v) for v in parse_floats(text))
    if not orders or any(o not in (2, 3, 4) for o in orders):
        raise InputError("--t-order takes values from {2,3,4}")
    return orders


# ---------------------------------------------------------------- formatting


def fmt(x):
    """Fixed, locale-free formatting; None and non-finite become empty cells."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x) + 0.0:.10g}"


def g6(x):
    return f"{float(x) + 0.0:.6g}"


def write_csv(rows, header, out, footer=()):
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r.get(h)) for h in header])
    for line in footer:
        buf.write(f"# {line}\n")
    _emit(buf.getvalue(), out)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def gnuplot_script(csv_path, header, series, xcol, title, logscale=False):
    idx = {h: i + 1 for i, h in enumerate(header)}
    lines = [
        "set datafile separator ','",
        "set key top right",
        f"set title '{title}'",
        f"set xlabel '{xcol} (nats)'",
        "set ylabel 'p_err'",
        "set yrange [0:1]" if not logscale else "set logscale y",
    ]
    plots = [f"'{csv_path}' skip 1 using {idx[xcol]}:{idx[s]} with linespoints title '{s}'" for s in series]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- rows


def _solve_row(problem, cfg):
    try:
        _, rep = solve(problem, cfg)
    except RGBreakdown as exc:
        return {"status": "BREAKDOWN", "cycles": exc.cycle}
    except NoConvergence as exc:
        return {"status": "NOCONV", "cycles": exc.report.cycles if exc.report else None}
    return {
        "status": "OK",
        "perr_ren": rep.perr,
        "cycles": rep.cycles,
        "phi0_fin": rep.phi0_fin,
        "phi1_fin": rep.phi1_fin,
    }


def noiseless_row(args):
    q, n, R, cfg = args
    p = NoiselessProblem(np.array(q), n, R)
    h = entropy(p.Q)
    row = {"R": R, "dR": p.delta_r, "perr_crude": perr_crude(p)}
    row["perr_old"] = perr_old(p) if h < R < math.log(p.Q.size) else None
    row["perr_unren"] = p.closed_form(p.delta_r, n, cfg.include_u)
    row.update(_solve_row(p, cfg))
    return row


def noisy_row(args):
    q, chan, n, R, cfg, orders, C = args
    p = NoisyProblem(np.array(q), np.array(chan), n, R)
    row = {"R": R, "dR": p.delta_r, "C": C, "C1": p.stats.C1, "perr_crude": perr_crude_noisy(p)}
    row["perr_unren"] = p.closed_form(p.delta_r, n, cfg.include_u)
    for j in orders:
        sub = _solve_row(p, replace(cfg, t_order=j))
        for k, v in sub.items():
            row[f"{k}{j}"] = v
    return row


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))  # map keeps R order


NOISELESS_HEADER = ["R", "dR", "perr_crude", "perr_old", "perr_unren", "perr_ren", "cycles", "phi0_fin", "phi1_fin", "status"]


def noisy_header(orders):
    h = ["R", "dR", "C", "C1", "perr_crude", "perr_unren"]
    for j in orders:
        h += [f"perr_ren{j}", f"cycles{j}", f"phi0_fin{j}", f"phi1_fin{j}", f"status{j}"]
    return h


def breakdown_windows(rows, orders):
    """Per t-order, the dR span of converged rows and whether any row failed."""
    out = []
    for j in orders:
        ok = [r["dR"] for r in rows if r.get(f"status{j}") == "OK"]
        failed = any(r.get(f"status{j}") != "OK" for r in rows)
        if ok:
            out.append((j, min(ok), max(ok), failed))
        else:
            out.append((j, None, None, failed))
    return out


# ---------------------------------------------------------------- commands


def cmd_noiseless_sweep(args):
    q = parse_floats(args.q)
    h = entropy(np.array(q))
    r_min = _rate(args, args.r_min)
    r_max = _rate(args, args.r_max)
    spec = SweepSpec(
        mode="noiseless", q=q, n=args.n,
        r_min=h - 0.3 if r_min is None else r_min,
        r_max=math.log(len(q)) - 1e-4 if r_max is None else r_max,
        steps=args.steps, cfg=_cfg(args),
    )
    NoiselessProblem(np.array(q), spec.n, spec.r_min)  # validate before fan-out
    rows = _map(noiseless_row, [(q, spec.n, float(R), spec.cfg) for R in spec.rates()], args.jobs)
    write_csv(rows, NOISELESS_HEADER, args.out)
    if args.plot:
        _emit(gnuplot_script(args.out, NOISELESS_HEADER, ["perr_old", "perr_unren", "perr_ren"], "dR",
                             f"noiseless, n={g6(spec.n)}"), args.plot)
    return EXIT_OK


def cmd_noisy_sweep(args):
    qx = parse_floats(args.q) if args.q else (0.5, 0.5)
    chan = parse_channel(args, len(qx))
    orders = _t_orders(args.t_order)
    C, _ = capacity(Channel(chan))
    base = NoisyProblem(np.array(qx), chan, args.n, 0.0)
    c1 = base.stats.C1
    r_min = _rate(args, args.r_min)
    r_max = _rate(args, args.r_max)
    spec = SweepSpec(
        mode="noisy", q=qx, n=args.n,
        r_min=max(c1 - 0.3, 1e-6) if r_min is None else r_min,
        r_max=c1 + 0.1 if r_max is None else r_max,
        steps=args.steps, cfg=_cfg(args), channel=tuple(map(tuple, chan)), t_orders=orders,
    )
    items = [(qx, chan, spec.n, float(R), spec.cfg, orders, C) for R in spec.rates()]
    rows = _map(noisy_row, items, args.jobs)
    header = noisy_header(orders)
    footer = []
    for j, a, b, failed in breakdown_windows(rows, orders):
        if a is None:
            footer.append(f"window t_order={j}: none (no row converged)")
        elif failed:
            footer.append(f"window t_order={j}: a={fmt(a)} b={fmt(b)}")
    write_csv(rows, header, args.out, footer)
    if args.plot:
        _emit(gnuplot_script(args.out, header, ["perr_unren"] + [f"perr_ren{j}" for j in orders], "dR",
                             f"noisy, n={g6(spec.n)}"), args.plot)
    return EXIT_OK


def diag_block(rep, max_cycles):
    return "\n".join([
        RULE,
        f"number of cycles (max is {max_cycles}) = {rep.cycles}",
        f"test fraction 0 (initial, final) = {g6(rep.phi0_init)}, {g6(rep.phi0_fin)}",
        f"test fraction 1 (initial, final) = {g6(rep.phi1_init)}, {g6(rep.phi1_fin)}",
        f"n (initial, final) = {g6(rep.n_init)}, {g6(rep.n_fin)}",
        f"Delta R (initial, final) = {g6(rep.dR_init)}, {g6(rep.dR_fin)}",
        f"R, unrenormalized error_prob, error_prob = {g6(rep.R)}, {g6(rep.perr_unren)}, {g6(rep.perr)}",
        RULE,
    ]) + "\n"


def _partial_block(problem, cfg, cycles):
    na = "n/a"
    unren = problem.closed_form(problem.delta_r, problem.n, cfg.include_u)
    return "\n".join([
        RULE,
        f"number of cycles (max is {cfg.max_cycles}) = {cycles if cycles is not None else na}",
        f"test fraction 0 (initial, final) = {na}, {na}",
        f"test fraction 1 (initial, final) = {na}, {na}",
        f"n (initial, final) = {g6(problem.n)}, {g6(problem.n * math.exp(cfg.s_fin))}",
        f"Delta R (initial, final) = {g6(problem.delta_r)}, {na}",
        f"R, unrenormalized error_prob, error_prob = {g6(problem.R)}, {g6(unren)}, {na}",
        RULE,
    ]) + "\n"


def _point_problem(args):
    noisy = args.bsc is not None or args.channel is not None
    if noisy:
        qx = parse_floats(args.q) if args.q else (0.5, 0.5)
        chan = parse_channel(args, len(qx))
        ref = NoisyProblem(np.array(qx), chan, args.n, 0.0).stats.C1
    else:
        if not args.q:
            raise InputError("--q is required")
        qx = parse_floats(args.q)
        ref = entropy(np.array(qx))
    if (args.r is None) == (args.dr is None):
        raise InputError("give exactly one of --r and --dr")
    R = _rate(args, args.r) if args.r is not None else ref + _rate(args, args.dr)
    if noisy:
        return NoisyProblem(np.array(qx), chan, args.n, R)
    return NoiselessProblem(np.array(qx), args.n, R)


def cmd_diag(args):
    problem = _point_problem(args)
    cfg = replace(_cfg(args), t_order=_t_orders(args.t_order)[0])
    try:
        _, rep = solve(problem, cfg)
    except RGBreakdown as exc:
        _emit(_partial_block(problem, cfg, exc.cycle) + f"status = BREAKDOWN at s={g6(exc.s)}\n", args.out)
        return EXIT_SOLVER
    except NoConvergence as exc:
        text = diag_block(exc.report, cfg.max_cycles) if exc.report else _partial_block(problem, cfg, None)
        _emit(text + "status = NO_CONVERGENCE\n", args.out)
        return EXIT_SOLVER
    _emit(diag_block(rep, cfg.max_cycles), args.out)
    return EXIT_OK


def cmd_oracle(args):
    r_min, r_max = _rate(args, args.r_min), _rate(args, args.r_max)
    if r_min is None or r_max is None:
        raise InputError("oracle needs --r-min and --r-max")
    rates = [r_min] if args.steps == 1 or r_min == r_max else list(np.linspace(r_min, r_max, args.steps))
    n = int(args.n)
    if n != args.n:
        raise InputError("oracle needs an integer --n")
    rows = []
    if args.kind == "ck":
        q = np.array(parse_floats(args.q))
        for R in rates:
            rows.append({"R": R, "perr_exact": ck_perr_exact(q, n, R, volume_corrected=args.volume_corrected)})
        header = ["R", "perr_exact"]
    else:
        qx = parse_floats(args.q) if args.q else (0.5, 0.5)
        chan = parse_channel(args, len(qx))
        for R in rates:
            M = int(round(math.exp(n * R)))
            if not 2 <= M <= MAX_M:
                raise InputError(f"R={R} gives M={M} outside [2, {MAX_M}]")
            res = noisy_mc_perr(np.array(qx), chan, n, M, trials=args.trials, seed=args.seed)
            rows.append({"R": R, "M": M, "R_eff": math.log(M) / n, "perr_mc": res.estimate,
                         "std_error": res.std_error, "trials": res.trials})
        header = ["R", "M", "R_eff", "perr_mc", "std_error", "trials"]
    write_csv(rows, header, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p, noisy=False):
    p.add_argument("--config", help="key = value file supplying flag defaults")
    p.add_argument("--q", help="source / input distribution, comma separated")
    p.add_argument("--n", type=float, default=20.0, help="block length")
    p.add_argument("--bits", action="store_true", help="rates given in bits")
    p.add_argument("--out", help="output path (default stdout)")
    if noisy:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--bsc", type=float, help="binary symmetric channel flip probability")
        g.add_argument("--channel", help="Q(y|x), row-major comma list")


def _rg_flags(p):
    p.add_argument("--sfin", type=float, default=7.5)
    p.add_argument("--ds", type=float, default=0.01)
    p.add_argument("--max-cycles", type=int, default=100)
    p.add_argument("--include-u", action="store_true", help="keep the u prefactor in the erfc form")
    p.add_argument("--t-order", default="2", help="order(s) of the t series, e.g. 2,3,4")


def build_parser():
    ap = argparse.ArgumentParser(prog="wimpyrg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("noiseless-sweep", help="p_err versus R for CK universal coding")
    _common(s)
    _rg_flags(s)
    s.add_argument("--r-min", type=float)
    s.add_argument("--r-max", type=float)
    s.add_argument("--steps", type=int, default=40)
    s.add_argument("--plot", help="write a gnuplot script here")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_noiseless_sweep)

    s = sub.add_parser("noisy-sweep", help="p_err versus R for random coding over a channel")
    _common(s, noisy=True)
    _rg_flags(s)
    s.set_defaults(t_order="2,3,4")
    s.add_argument("--r-min", type=float)
    s.add_argument("--r-max", type=float)
    s.add_argument("--steps", type=int, default=40)
    s.add_argument("--plot", help="write a gnuplot script here")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_noisy_sweep)

    s = sub.add_parser("diag", help="diagnostics block for one point")
    _common(s, noisy=True)
    _rg_flags(s)
    s.add_argument("--r", type=float, help="rate")
    s.add_argument("--dr", type=float, help="rate offset from H(Q) or C1")
    s.set_defaults(func=cmd_diag)

    s = sub.add_parser("oracle", help="exact CK or Monte-Carlo random-coding p_err")
    s.add_argument("kind", choices=["ck", "mc"])
    _common(s, noisy=True)
    s.add_argument("--r-min", type=float)
    s.add_argument("--r-max", type=float)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--volume-corrected", action="store_true", help="use R - N ln(n+1)/n")
    s.set_defaults(func=cmd_oracle)
    return ap


def _apply_config(ap, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    args = ap.parse_args(argv)
    if known.config:
        parsed = read_config(known.config)
        defaults = ap.parse_args([args.cmd] + (["ck"] if args.cmd == "oracle" else []))
        for k, v in parsed.items():
            if not hasattr(args, k):
                raise InputError(f"unknown config key {k!r}")
            # command-line flags win over the file
            if getattr(args, k) == getattr(defaults, k):
                cur = getattr(defaults, k)
                if isinstance(cur, bool):
                    v = v.lower() in ("1", "true", "yes")
                elif isinstance(cur, int):
                    v = int(v)
                elif isinstance(cur, float) or k in ("n", "r_min", "r_max", "r", "dr", "bsc"):
                    v = float(v)
                setattr(args, k, v)
    return args


def main(argv=None):
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(ap, argv)
        if args.n <= 0:
            raise InputError("--n must be positive")
        return args.func(args)
    except (InputError, WimpyError, OSError) as exc:
        if isinstance(exc, WimpyError) and not isinstance(exc, ValueError):
            print(f"wimpyrg: solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(f"wimpyrg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
