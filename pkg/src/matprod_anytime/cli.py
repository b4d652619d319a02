"""Command-line front end: ``matprod-anytime <subcommand> --config run.toml``.

Exit codes: 0 success, 1 validation error, 2 runtime numeric error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .boundary import boundary_table
from .config import ConfigError, config_hash, load_config, merge, resolve
from .linalg import ConvergenceError, expected_product
from .montecarlo import (
    THREADS_ENV,
    ExperimentConfig,
    boundary_curve,
    empirical_tail_curve,
    estimate_violation_rate,
)
from .oja import run_oja_demo
from .oracle import (
    EnumerationSizeError,
    enumerate_paths,
    exact_crossing_probability,
    martingale_check,
    submartingale_check,
)
from .streams import FiniteSupport, RankOneSphere

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_FAIL = 0, 1, 2, 3

MARTINGALE_TOL = 1e-10
SANDWICH_RTOL = 1e-9

BOUNDARY_COLUMNS = ["n", "k_n", "M_n", "V_n", "t_fixed", "b_anytime", "f_paper", "f_dominating", "condition2_ok"]
SIMULATE_COLUMNS = ["trajectory", "crossed", "first_crossing_n", "first_crossing_epoch", "max_dev_ratio"]
TAIL_COLUMNS = ["u", "empirical", "bound", "ci_lo", "ci_hi"]
OJA_COLUMNS = ["n", "sin2_error", "dev", "boundary"]


def fmt(x) -> str:
    """Shortest round-trip decimal; booleans as 0/1."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def render_csv(columns: Sequence[str], rows: Iterable[Sequence], digest: str) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# matprod_anytime {__version__} config_sha256={digest}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


class Runner:
    def __init__(self, args: argparse.Namespace):
        overrides = {
            "experiment.master_seed": args.seed,
            "experiment.trajectories": args.trajectories,
            "output.directory": args.out,
        }
        self.cfg = merge(load_config(args.config), overrides)
        self.digest = config_hash(self.cfg)
        self.run = resolve(self.cfg)
        self.quiet = args.quiet
        self.threads = args.threads
        self.out_dir = self.cfg["output"]["directory"]

    def say(self, text: str = "") -> None:
        if not self.quiet:
            print(text, file=sys.stdout if self.out_dir else sys.stderr)

    def warn(self, text: str) -> None:
        if not self.quiet:
            print(f"warning: {text}", file=sys.stderr)

    def emit(self, name: str, columns, rows) -> None:
        text = render_csv(columns, rows, self.digest)
        if self.out_dir:
            os.makedirs(self.out_dir, exist_ok=True)
            path = os.path.join(self.out_dir, f"{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            self.say(f"wrote {path}")
        else:
            sys.stdout.write(text)

    def experiment(self, **kw) -> ExperimentConfig:
        r = self.run
        base = dict(
            dist=r.dist, schedule=r.schedule, params=r.params, n_max=r.n_max,
            trajectories=r.trajectories, master_seed=r.master_seed,
            boundary_variant=r.variant, boundary_scale=r.scale,
        )
        base.update(kw)
        return ExperimentConfig(**base)

    # subcommands -----------------------------------------------------------

    def boundary(self) -> int:
        tab = boundary_table(self.run.n_max, self.run.schedule, self.run.params)
        if not tab["condition2_ok"][-1]:
            self.warn("step-size condition fails at n_max; the boundaries carry no coverage guarantee")
        self.emit("boundary", BOUNDARY_COLUMNS, zip(*(tab[c] for c in BOUNDARY_COLUMNS)))
        return EXIT_OK

    def simulate(self) -> int:
        cfg = self.experiment()
        rep = estimate_violation_rate(cfg, self.threads)
        from .boundary import epoch_indices
        k = epoch_indices(cfg.n_max, cfg.params.eta_epoch)
        rows = (
            (i, fc > 0, fc, k[fc - 1] if fc > 0 else -1, r)
            for i, (fc, r) in enumerate(zip(rep.first_crossing, rep.max_dev_ratio))
        )
        self.emit("simulate", SIMULATE_COLUMNS, rows)
        if not rep.condition2_ok:
            self.warn("step-size condition fails at the last epoch endpoint")
        self.say(f"violations      {rep.violations} / {rep.trajectories}")
        self.say(f"rate            {fmt(rep.rate)}")
        self.say(f"ci95            [{fmt(rep.ci95[0])}, {fmt(rep.ci95[1])}] (Clopper-Pearson)")
        self.say(f"delta           {fmt(rep.delta)}")
        self.say(f"condition2_ok   {rep.condition2_ok} (per-epoch delta/h(k): {rep.condition2_epoch_ok})")
        self.say(f"first-crossing epochs {rep.epoch_histogram}")
        self.say(f"note            {rep.truncation_notice}")
        return EXIT_OK

    def tail(self) -> int:
        pts = empirical_tail_curve(self.experiment(), self.run.u_grid, self.threads)
        self.emit("tail", TAIL_COLUMNS, ((p.u, p.empirical, p.bound, p.ci_lo, p.ci_hi) for p in pts))
        return EXIT_OK

    def oja(self) -> int:
        if not isinstance(self.run.dist, RankOneSphere):
            raise ConfigError("oja needs distribution.kind = \"rank_one_sphere\"")
        p = self.run.params
        s = run_oja_demo(
            self.run.dist, self.run.schedule, self.run.n_max, self.run.master_seed,
            delta=p.delta, eta_epoch=p.eta_epoch, alpha=p.alpha, init=self.run.oja_init,
        )
        self.emit("oja", OJA_COLUMNS, zip(s.n, s.sin2_error, s.dev, s.boundary))
        return EXIT_OK

    def verify(self) -> int:
        r = self.run
        if not isinstance(r.dist, FiniteSupport):
            raise ConfigError("verify needs distribution.kind = \"finite_support\"")
        n = r.n_max
        table = enumerate_paths(r.dist, r.schedule, n, cap=r.cap)
        results = []

        def check(name: str, ok: bool, detail: str) -> None:
            results.append(ok)
            self.say(f"{'PASS' if ok else 'FAIL'}  {name:<24} {detail}")

        E_n = expected_product(r.dist.spectrum, r.schedule.etas(n))
        err = float(np.max(np.abs(table.mean - E_n)))
        check("exact_mean", err <= 1e-10 * (1.0 + np.max(np.abs(E_n))), f"max|sum p Z - E_n| = {err:.3e}")

        res = martingale_check(r.dist, r.schedule, n, cap=r.cap)
        check("martingale", res <= MARTINGALE_TOL, f"max residual = {res:.3e}")

        slack = submartingale_check(r.dist, r.schedule, n, cap=r.cap)
        check("submartingale", slack >= -MARTINGALE_TOL, f"min slack = {slack:.3e}")

        worst = 0.0
        for k in range(1, n + 1):
            dev, ydev = table.dev_levels[k - 1], table.ydev_levels[k - 1]
            En = table.E_norm[k - 1]
            floor = 1e-12 * En  # absorbs rounding noise when both sides vanish
            worst = max(
                worst,
                float(np.max(ydev - dev * (1 + SANDWICH_RTOL) - floor)),
                float(np.max(dev - En * ydev * (1 + SANDWICH_RTOL) - floor)),
            )
        check("sandwich", worst <= 0.0, f"worst excess = {worst:.3e}")

        cfg = self.experiment(n_max=n)
        b = boundary_curve(cfg)
        p_any = exact_crossing_probability(table, b, "anytime")
        p_fix = exact_crossing_probability(table, b, "fixed_time")
        check("crossing_soundness", p_any <= r.params.delta,
              f"exact P(exists k<={n}: dev_k >= b_k) = {fmt(p_any)} vs delta = {fmt(r.params.delta)}")
        check("anytime_ge_fixed", p_any >= p_fix, f"fixed-time probability = {fmt(p_fix)}")

        rep = estimate_violation_rate(cfg, self.threads)
        sigma = math.sqrt(p_any * (1 - p_any) / cfg.trajectories)
        gap = abs(rep.rate - p_any)
        check("mc_vs_oracle", gap <= 3 * sigma + 1e-12,
              f"MC rate = {fmt(rep.rate)} ({rep.trajectories} paths), |gap| = {gap:.3e}, 3 sigma = {3 * sigma:.3e}")

        if r.verify_threshold is not None:
            thr = np.full(n, np.inf)
            thr[-1] = float(r.verify_threshold)
            p = exact_crossing_probability(table, thr, "fixed_time")
            self.say(f"INFO  exact P(dev_{n} >= {fmt(float(r.verify_threshold))}) = {fmt(p)}")
        if not rep.condition2_ok:
            self.warn("step-size condition fails; crossing soundness is not guaranteed here")
        return EXIT_OK if all(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides experiment.master_seed)")
    common.add_argument("--out", help="output directory for CSV files (default: stdout)")
    common.add_argument("--trajectories", type=int, help="number of Monte Carlo trajectories")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--quiet", action="store_true", help="suppress summaries and warnings")

    parser = argparse.ArgumentParser(prog="matprod-anytime", description=__doc__.splitlines()[0],
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("boundary", "tabulate fixed-time, anytime and smooth boundaries"),
        ("simulate", "Monte Carlo violation rate of the boundary"),
        ("verify", "exact oracle checks on a finite-support stream"),
        ("tail", "empirical maximal tail against the moment bound"),
        ("oja", "Oja streaming PCA next to the product deviation"),
    ]:
        sub.add_parser(name, help=helptext, parents=[common])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        runner = Runner(args)
        return getattr(runner, args.command)()
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, EnumerationSizeError, OSError, ValueError) as exc:
        # ValueError covers horizon overruns and out-of-domain arguments
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

if __name__ == "__main__":
    sys.exit(main())
