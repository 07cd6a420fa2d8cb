"""Command line driver: ``lomac run | convergence | advect | verify``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from threadpoolctl import threadpool_limits

from .config import ConfigError, SolverConfig, parse_config
from .io import convergence_table, format_table, write_diagnostics, write_snapshot
from .stepper import NumericalAbort, run

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3
log = logging.getLogger("lomac")


def _apply_thread_cap() -> None:
    """Cap BLAS/OpenMP worker threads at ``LOMAC_THREADS`` when it is set."""
    n = os.environ.get("LOMAC_THREADS")
    if not n:
        return
    try:
        limit = int(n)
    except ValueError:
        raise ConfigError(f"LOMAC_THREADS must be a positive integer, got {n!r}") from None
    if limit < 1:
        raise ConfigError(f"LOMAC_THREADS must be a positive integer, got {n!r}")
    threadpool_limits(limit)


def _outdir(cfg: SolverConfig, arg: str | None) -> Path:
    out = Path(arg or cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = parse_config(args.config, args.override)
    if cfg.mode != "vp1d1v":
        raise ConfigError(f"mode: 'lomac run' drives vp1d1v configs; use 'lomac advect' for {cfg.mode!r}")
    out = _outdir(cfg, args.output)
    res = run(cfg, progress=args.verbose)
    path = write_diagnostics(res.series, out / f"{cfg.benchmark}_diagnostics.csv")
    g = (res.solver.ps.xgrid, res.solver.ps.vgrid)
    for t, f in res.snapshots.items():
        write_snapshot(f, g, out / f"{cfg.benchmark}_t{t:g}.npz", mode=cfg.mode, k=cfg.k, t=t)
    last = res.series[-1]
    print(f"{cfg.benchmark}: t={last.t:.6g} steps={res.state.steps} rank={last.rank} "
          f"dt={res.dt:.4g} cpu={res.seconds:.2f}s -> {path}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = parse_config(args.config, args.override)
    if args.levels < 2:
        raise ConfigError("levels: a convergence study needs at least two levels")
    levels = []
    for i in range(args.levels):
        c = replace(cfg, nx=cfg.nx * 2**i, nv=cfg.nv * 2**i)
        if cfg.mode == "advect2d":
            from .transport import error_norms, run_advection
            from .benchmarks import get_benchmark

            bench = get_benchmark(c.benchmark)
            tic = time.perf_counter()
            r = run_advection(bench.initial_terms(c.params), *c.x_domain, c.nx, c.k, c.t_end, c.eps, c.dt, c.criterion)
            l2, li = error_norms(r.u, lambda a, b: bench.exact(a, b, c.t_end), r.grids)
            sec = time.perf_counter() - tic
            mesh = f"{c.nx}x{c.nx}"
        else:
            res = run(replace(c, output_every=10**9))
            last = res.series[-1]
            if last.l2_error is None:
                raise ConfigError(f"benchmark: {c.benchmark!r} has no exact solution for a convergence study")
            l2, li, sec = last.l2_error, last.linf_error, res.seconds
            mesh = f"{c.nx}x{c.nv}"
        levels.append({"mesh": mesh, "l2": l2, "linf": li, "seconds": sec})
        print(f"level {i}: {mesh} L2={l2:.3e} Linf={li:.3e}", flush=True)
    out = _outdir(cfg, args.output)
    rows = convergence_table(levels, out / f"{cfg.benchmark}_k{cfg.k}_convergence.csv")
    print(format_table(rows))
    return EXIT_OK


def cmd_advect(args) -> int:
    from .benchmarks import get_benchmark
    from .transport import error_norms, run_advection, siac_filter_lowrank

    overrides = ["benchmark=linear_advection_2d", "k=1", "nx=16"] if args.config is None else []
    cfg = parse_config(args.config, overrides + (args.override or []))
    if cfg.mode != "advect2d":
        raise ConfigError(f"mode: 'lomac advect' needs an advect2d benchmark, got {cfg.benchmark!r}")
    bench = get_benchmark(cfg.benchmark)
    tic = time.perf_counter()
    r = run_advection(bench.initial_terms(cfg.params), *cfg.x_domain, cfg.nx, cfg.k, cfg.t_end, cfg.eps, cfg.dt,
                      cfg.criterion)
    sec = time.perf_counter() - tic
    exact = lambda a, b: bench.exact(a, b, cfg.t_end)
    l2, li = error_norms(r.u, exact, r.grids)
    print(f"{cfg.nx}x{cfg.nx} k={cfg.k} t={cfg.t_end:g} dt={r.dt:.4g} ranks={min(r.ranks)}..{max(r.ranks)} "
          f"L2={l2:.4e} Linf={li:.4e} cpu={sec:.2f}s")
    if args.postprocess:
        m = r.grids[0].mesh
        uf = siac_filter_lowrank(r.u, cfg.k, m, r.grids[1].mesh)
        fl2, fli = error_norms(uf, exact, r.grids)
        print(f"after SIAC filtering: L2={fl2:.4e} Linf={fli:.4e}")
    out = _outdir(cfg, args.output)
    write_snapshot(r.u, r.grids, out / f"{cfg.benchmark}_t{cfg.t_end:g}.npz", mode=cfg.mode, k=cfg.k, t=cfg.t_end)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .oracle import verify_equivalence

    diffs = verify_equivalence(nsteps=args.steps)
    ok = True
    for name, d in diffs.items():
        good = d <= 1e-12
        ok &= good
        print(f"{'PASS' if good else 'FAIL'} {name}: max nodal difference {d:.3e}")
    return EXIT_OK if ok else EXIT_ABORT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lomac", description="Conservative low-rank DG solvers for Vlasov-Poisson.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="JSON configuration file")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field (repeatable); params.NAME sets a benchmark parameter")
        sp.add_argument("--output", help="output directory (default: config output_dir or cwd)")

    sp = sub.add_parser("run", help="run a Vlasov-Poisson benchmark")
    common(sp)
    sp.set_defaults(func=cmd_run)
    sp = sub.add_parser("convergence", help="refinement study, doubling both grids per level")
    common(sp)
    sp.add_argument("--levels", type=int, default=3)
    sp.set_defaults(func=cmd_convergence)
    sp = sub.add_parser("advect", help="2D linear advection")
    common(sp, config_required=False)
    sp.add_argument("--postprocess", action="store_true", help="apply the SIAC filter at the final time")
    sp.set_defaults(func=cmd_advect)
    sp = sub.add_parser("verify", help="compare eps=0 low-rank runs with the dense full-grid scheme")
    sp.add_argument("--steps", type=int, default=5)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _apply_thread_cap()
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
