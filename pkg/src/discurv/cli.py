"""Command-line front end: ``discurv <subcommand> ...``.

Subcommands: denoise, inpaint, curvature-map, metrics, noise, bench.
Exit status is 0 on success, 2 on bad flags and 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io, metrics, synthetic
from .curvature import CurvatureSpec, curvature_map
from .imagecore import add_noise
from .solver import SolverConfig, solve

logger = logging.getLogger("discurv")

DEFAULT_ALPHA = {"mean": 0.5, "gaussian": 5.0}
BENCH_COLUMNS = ("image", "noise", "method", "psnr", "ssim", "iterations", "time_s")


def _add_solver_flags(p, fidelity=True):
    p.add_argument("--in", dest="input", required=True, help="degraded image (png/pgm/ppm)")
    p.add_argument("--out", required=True, help="restored image path")
    p.add_argument("--ref", help="clean reference; prints PSNR/SSIM when given")
    if fidelity:
        p.add_argument("--fidelity", choices=("l2", "l1", "kl", "inpaint"), default="l2")
    p.add_argument("--curvature", choices=("mc", "gc"), default="gc")
    p.add_argument("--g", dest="weight", choices=("tac", "tsc", "trv", "tv"), default="tac")
    p.add_argument("--lambda", dest="lam", type=float, default=0.07)
    p.add_argument("--alpha", type=float, default=None, help="default 0.5 for mc, 5 for gc")
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--mu2", type=float, default=None, help="penalty of the fidelity split (l1/kl/inpaint)")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0, help="proximal weight on v")
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=3e-5)
    p.add_argument("--data-scale", type=float, default=1.0,
                   help="intensity unit of the penalties, e.g. 0.00392 for unit-range parameters")
    p.add_argument("--curvature-scale", type=float, default=1.0 / 255.0,
                   help="factor applied to intensities before the curvature stencil")
    p.add_argument("--trace", help="write the iteration trace as CSV (plus a PNG figure next to it)")
    p.add_argument("--no-plot", action="store_true", help="skip the convergence figure")
    p.add_argument("--track-delta", action="store_true", help="record the delta_k diagnostic")
    p.add_argument("--workers", type=int, default=1, help="parallel color channels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discurv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="restore a noisy image")
    _add_solver_flags(p)

    p = sub.add_parser("inpaint", help="fill missing pixels given a mask")
    _add_solver_flags(p, fidelity=False)
    p.add_argument("--mask", required=True, help="grayscale mask, white (>=128) = known")

    p = sub.add_parser("curvature-map", help="export mean or Gaussian curvature")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="rescaled 8-bit visualisation")
    p.add_argument("--raw", help="raw grid as .npy or delimited text")
    p.add_argument("--curvature", choices=("mc", "gc"), default="gc")
    p.add_argument("--curvature-scale", type=float, default=1.0 / 255.0)
    p.add_argument("--plot", help="colormapped figure path")

    p = sub.add_parser("metrics", help="PSNR and SSIM between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)

    p = sub.add_parser("noise", help="synthesise a degraded image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=("gaussian", "salt_pepper", "poisson"), required=True)
    p.add_argument("--sigma", "--sigma-noise", dest="sigma_noise", type=float, default=0.0)
    p.add_argument("--fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--clip", action="store_true", help="clamp Gaussian output to [0, 255]")

    p = sub.add_parser("bench", help="PSNR/SSIM/iterations/time table over images, noise levels and methods")
    p.add_argument("--in", dest="inputs", action="append",
                   help="clean image file or builtin name (shapes, piecewise, cameraman); repeatable")
    p.add_argument("--sigma-noise", type=float, nargs="+", default=[20.0])
    p.add_argument("--methods", nargs="+", default=["tv", "tac-mc", "tac-gc"],
                   help="tv or <tac|tsc|trv>-<mc|gc>")
    p.add_argument("--lambda", dest="lam", type=float, default=0.07)
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=3e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip", action="store_true")
    p.add_argument("--out", required=True, help="CSV table")
    p.add_argument("--plot", help="bar chart path (default: next to --out)")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _curvature_spec(args, kind=None, weight=None, alpha=None):
    kind = {"mc": "mean", "gc": "gaussian"}[kind or args.curvature]
    alpha = alpha if alpha is not None else (args.alpha if getattr(args, "alpha", None) is not None else DEFAULT_ALPHA[kind])
    return CurvatureSpec(kind, weight or args.weight, alpha, intensity_scale=args.curvature_scale)


def _print_metrics(ref, test):
    rep = metrics.report(ref, test)
    print(f"PSNR {rep.psnr:.4f} dB")
    print(f"SSIM {rep.ssim:.4f}")


def _run_solver(args, fidelity, mask=None):
    f = io.load_image(args.input)
    cfg = SolverConfig(
        lam=args.lam, mu=args.mu, mu2=args.mu2, tau=args.tau, sigma=args.sigma,
        max_iter=args.max_iter, tol=args.tol, curvature=_curvature_spec(args),
        fidelity=fidelity, mask=mask, track_delta_k=args.track_delta, data_scale=args.data_scale,
    )
    t0 = time.perf_counter()
    result = solve(f, cfg, workers=args.workers)
    elapsed = time.perf_counter() - t0
    io.save_image(result.restored, args.out)
    print(f"iterations {result.iterations_used} converged {str(result.converged).lower()} time {elapsed:.2f}s")
    if args.trace:
        channel_results = getattr(result, "channels", None) or [result]
        trace_path = Path(args.trace)
        if len(channel_results) == 1:
            channel_results[0].trace.write_csv(trace_path)
            paths = [trace_path]
        else:
            paths = [trace_path.with_name(f"{trace_path.stem}_{c}{trace_path.suffix}") for c in "rgb"]
            for r, p in zip(channel_results, paths):
                r.trace.write_csv(p)
        if not args.no_plot:
            from .plotting import plot_trace

            labels = ["r", "g", "b"] if len(paths) == 3 else None
            plot_trace([r.trace for r in channel_results], trace_path.with_suffix(".png"), labels)
    if args.ref:
        _print_metrics(io.load_image(args.ref), result.restored)


def cmd_denoise(args):
    if args.fidelity == "inpaint":
        raise SystemExit("use the inpaint subcommand for --fidelity inpaint")
    _run_solver(args, args.fidelity)


def cmd_inpaint(args):
    mask = io.load_mask(args.mask)
    if args.mu2 is None:
        args.mu2 = 0.1
    _run_solver(args, "inpaint", mask=mask)


def cmd_curvature_map(args):
    u = io.load_image(args.input)
    if u.ndim == 3:
        u = u.mean(axis=2)
    spec = CurvatureSpec("mean" if args.curvature == "mc" else "gaussian", "tac", 0.0,
                         intensity_scale=args.curvature_scale)
    kmap = curvature_map(u, spec)
    lo, hi = float(kmap.min()), float(kmap.max())
    vis = np.zeros_like(kmap) if hi == lo else 255.0 * (kmap - lo) / (hi - lo)
    io.save_image(vis, args.out)
    if args.raw:
        io.save_raw(kmap, args.raw)
    if args.plot:
        from .plotting import plot_curvature

        plot_curvature(kmap, args.plot, title="mean curvature" if args.curvature == "mc" else "Gaussian curvature")
    print(f"curvature range [{lo:.6g}, {hi:.6g}]")


def cmd_metrics(args):
    _print_metrics(io.load_image(args.ref), io.load_image(args.test))


def cmd_noise(args):
    u = io.load_image(args.input)
    noisy = add_noise(u, args.model, seed=args.seed, sigma=args.sigma_noise, fraction=args.fraction, clip=args.clip)
    io.save_image(noisy, args.out)


def _parse_method(name):
    name = name.lower()
    if name == "tv":
        return "tv", "mc"
    try:
        weight, kind = name.split("-")
    except ValueError:
        raise ValueError(f"bad method {name!r}; expected tv or <tac|tsc|trv>-<mc|gc>") from None
    if weight not in ("tac", "tsc", "trv") or kind not in ("mc", "gc"):
        raise ValueError(f"bad method {name!r}; expected tv or <tac|tsc|trv>-<mc|gc>")
    return weight, kind


def _load_clean(name):
    if name in synthetic.BUILTIN:
        return synthetic.BUILTIN[name]()
    return io.load_image(name)


def cmd_bench(args):
    inputs = args.inputs or ["shapes"]
    methods = [(m, *_parse_method(m)) for m in args.methods]
    cases = []
    for image in inputs:
        clean = _load_clean(image)
        for s in args.sigma_noise:
            noisy = add_noise(clean, "gaussian", sigma=s, seed=args.seed, clip=args.clip)
            for method, weight, kind in methods:
                cases.append((Path(image).stem, s, method, weight, kind, clean, noisy))

    def run(case):
        image, s, method, weight, kind, clean, noisy = case
        spec = CurvatureSpec("mean" if kind == "mc" else "gaussian", weight,
                             args.alpha if args.alpha is not None else DEFAULT_ALPHA["mean" if kind == "mc" else "gaussian"])
        cfg = SolverConfig(lam=args.lam, mu=args.mu, max_iter=args.max_iter, tol=args.tol, curvature=spec)
        t0 = time.perf_counter()
        res = solve(noisy, cfg)
        dt = time.perf_counter() - t0
        return {
            "image": image, "noise": f"sigma={s:g}", "method": method,
            "psnr": metrics.psnr(clean, res.restored), "ssim": metrics.ssim(clean, res.restored),
            "iterations": res.iterations_used, "time_s": dt,
        }

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run, cases))
    else:
        rows = [run(c) for c in cases]
    order = {m: i for i, (m, _, _) in enumerate(methods)}
    rows.sort(key=lambda r: (r["image"], r["noise"], order[r["method"]]))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for r in rows:
            writer.writerow([r["image"], r["noise"], r["method"], f"{r['psnr']:.4f}", f"{r['ssim']:.4f}",
                             r["iterations"], f"{r['time_s']:.3f}"])
    from .plotting import plot_bench

    plot_bench(rows, args.plot or str(Path(args.out).with_suffix(".png")))
    for r in rows:
        print(f"{r['image']:>12} {r['noise']:>10} {r['method']:>8}  PSNR {r['psnr']:.2f}  SSIM {r['ssim']:.4f}  "
              f"iters {r['iterations']:>3}  {r['time_s']:.2f}s")


COMMANDS = {
    "denoise": cmd_denoise,
    "inpaint": cmd_inpaint,
    "curvature-map": cmd_curvature_map,
    "metrics": cmd_metrics,
    "noise": cmd_noise,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"error: {exc.code}", file=sys.stderr)
            return 2
        raise
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
