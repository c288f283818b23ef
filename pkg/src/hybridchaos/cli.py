"""Command-line workbench.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 image format
error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from . import crypto, dynamics, reports
from .errors import ConfigError, DegenerateOrbit, ImageFormatError
from .imageio import read_image, write_image
from .maps import PHI1_CHOICES, PHI2_CHOICES, MapParams, iterate
from .runconfig import (AnalysisSettings, CryptoSettings, RunConfig,
                        build_config, read_config_file)
from .testimage import synthetic_photo

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_FORMAT = 0, 2, 3, 4

_MAP = MapParams()
_AN = AnalysisSettings()
_CR = CryptoSettings()


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return lo, hi


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's copy of these flags from resetting a
    # value given before the subcommand name
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global")
    g.add_argument("--config", type=Path, metavar="PATH",
                   help="JSON run configuration (default: none)")
    g.add_argument("--out", type=Path, metavar="DIR",
                   help="output directory (default: .)")
    g.add_argument("--seed-nonce", type=int, metavar="INT",
                   help=f"nonce mixed into the cipher x0 (default: {_CR.nonce})")
    m = p.add_argument_group("map")
    m.add_argument("--r1", type=float, help=f"HCM1 control parameter (default: {_MAP.r1})")
    m.add_argument("--r2", type=float, help=f"HCM2 control parameter (default: {_MAP.r2})")
    m.add_argument("--x0", type=float, help=f"initial state (default: {_MAP.x0})")
    m.add_argument("--gamma", type=float, help=f"composition gain (default: {_MAP.gamma:g})")
    m.add_argument("--phi1", choices=sorted(PHI1_CHOICES),
                   help=f"outer composition map (default: {_MAP.phi1})")
    m.add_argument("--phi2", choices=sorted(PHI2_CHOICES),
                   help=f"inner composition map (default: {_MAP.phi2})")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="hybridchaos", parents=[common],
        description="Hybrid two-parameter chaotic map workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common], help="write an orbit as step,x CSV")
    gen.add_argument("-n", type=int, dest="n", help=f"samples (default: {_AN.n})")
    gen.add_argument("--burn-in", type=int, help=f"discarded steps (default: {_AN.burn_in})")

    ana = sub.add_parser("analyze", help="chaos diagnostics")
    kinds = ana.add_subparsers(dest="kind", required=True)

    lya = kinds.add_parser("lyapunov", parents=[common], help="largest Lyapunov exponent sweep")
    lya.add_argument("--sweep", choices=("r1", "r2", "both"), dest="lyap_sweep",
                     help=f"swept parameter (default: {_AN.lyap_sweep})")
    lya.add_argument("--range", type=_range, help="sweep interval LO,HI (default: 0,1)")
    lya.add_argument("--points", type=int, dest="lyap_points",
                     help=f"grid points per axis (default: {_AN.lyap_points})")
    lya.add_argument("--iters", type=int, help=f"iterations per estimate (default: {_AN.iters})")
    lya.add_argument("--d0", type=float, help=f"companion separation (default: {_AN.d0:g})")
    lya.add_argument("--method", choices=("stage", "step"),
                     help=f"renormalisation granularity (default: {_AN.method})")
    lya.add_argument("--workers", type=int, help=f"threads (default: {_AN.workers})")

    bif = kinds.add_parser("bifurcation", parents=[common], help="bifurcation scan")
    bif.add_argument("--sweep", choices=("r1", "r2"), help=f"swept parameter (default: {_AN.sweep})")
    bif.add_argument("--range", type=_range, help="sweep interval LO,HI (default: 0,1)")
    bif.add_argument("--points", type=int, help=f"parameter values (default: {_AN.points})")
    bif.add_argument("--burn-in", type=int, dest="bif_burn_in",
                     help=f"transient steps (default: {_AN.bif_burn_in})")
    bif.add_argument("--keep", type=int, help=f"states kept per value (default: {_AN.keep})")
    bif.add_argument("--workers", type=int, help=f"threads (default: {_AN.workers})")

    his = kinds.add_parser("histogram", parents=[common], help="histogram and chi-square")
    his.add_argument("-n", type=int, dest="n", help=f"samples (default: {_AN.n})")
    his.add_argument("--bins", type=int, help=f"bins (default: {_AN.bins})")
    his.add_argument("--burn-in", type=int, help=f"discarded steps (default: {_AN.burn_in})")

    sen = kinds.add_parser("sensitivity", parents=[common], help="perturbation probe")
    sen.add_argument("--target", choices=("x0", "r1", "r2"),
                     help=f"perturbed scalar (default: {_AN.target})")
    sen.add_argument("--delta", type=float, help=f"perturbation (default: {_AN.delta:g})")
    sen.add_argument("--horizon", type=int, help=f"steps compared (default: {_AN.horizon})")
    sen.add_argument("--threshold", type=float,
                     help=f"divergence threshold (default: {_AN.threshold})")

    cob = kinds.add_parser("cobweb", parents=[common], help="cobweb segments")
    cob.add_argument("--steps", type=int, help=f"iterations traced (default: {_AN.steps})")

    for name, verb in (("encrypt", "encrypt"), ("decrypt", "decrypt")):
        p = sub.add_parser(name, parents=[common], help=f"{verb} a PGM/PPM/PNG image")
        p.add_argument("in_path", type=Path, help="input image")
        p.add_argument("out_path", type=Path, help="output image")
        p.add_argument("--rounds", type=int, help=f"cipher rounds (default: {_CR.rounds})")

    met = sub.add_parser("metrics", parents=[common], help="NPCR/UACI differential test")
    met.add_argument("img_path", type=Path, nargs="?",
                     help="plaintext image (default: built-in synthetic photo)")
    met.add_argument("--trials", type=int, help=f"single-pixel trials (default: {_CR.trials})")
    met.add_argument("--rounds", type=int, help=f"cipher rounds (default: {_CR.rounds})")
    met.add_argument("--seed", type=int, help=f"trial RNG seed (default: {_CR.seed})")

    rep = sub.add_parser("repro", parents=[common],
                         help="write every pinned reference run as CSV")
    rep.add_argument("--lena", type=Path,
                     help="user-supplied Lena image (default: none, synthetic only)")
    rep.add_argument("--workers", type=int, help=f"threads (default: {_AN.workers})")
    return parser


def _resolve(args) -> RunConfig:
    v = vars(args)
    file_data = read_config_file(v["config"]) if v.get("config") else None
    an_keys = {f for f in asdict(_AN)}
    overrides = {
        "map": {k: v.get(k) for k in ("r1", "r2", "x0", "gamma", "phi1", "phi2")},
        "analysis": {k: v[k] for k in an_keys if k in v},
        "crypto": {"rounds": v.get("rounds"), "nonce": v.get("seed_nonce"),
                   "trials": v.get("trials"), "seed": v.get("seed")},
        "out": v.get("out"),
    }
    try:
        return build_config(file_data, overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _key(cfg: RunConfig) -> crypto.CipherKey:
    return crypto.CipherKey(cfg.params, cfg.hcm2, cfg.crypto.nonce)


def _lyapunov_rows(cfg: RunConfig, axes, points, workers):
    a = cfg.analysis
    grid = dynamics.sweep_grid(a.range[0], a.range[1], points)
    rows = []
    for axis in axes:
        rows += dynamics.lyapunov_sweep(cfg.params, cfg.hcm2, axis, grid,
                                        a.iters, a.d0, workers, a.method)
    return rows


def cmd_generate(cfg: RunConfig) -> Path:
    a = cfg.analysis
    traj = iterate(cfg.params, cfg.hcm2, a.n, a.burn_in)
    return reports.write_trajectory(cfg.out / "trajectory.csv", traj, a.burn_in + 1)


def cmd_analyze(cfg: RunConfig, kind: str) -> Path:
    a = cfg.analysis
    out = cfg.out / f"{kind}.csv"
    if kind == "lyapunov":
        axes = ("r1", "r2") if a.lyap_sweep == "both" else (a.lyap_sweep,)
        return reports.write_lyapunov(
            out, _lyapunov_rows(cfg, axes, a.lyap_points, a.workers))
    if kind == "bifurcation":
        other = cfg.params.r2 if a.sweep == "r1" else cfg.params.r1
        pts = dynamics.bifurcation_scan(cfg.hcm2, a.sweep, other, a.range,
                                        a.points, cfg.params.x0, a.bif_burn_in,
                                        a.keep, cfg.params, a.workers)
        return reports.write_bifurcation(out, pts)
    if kind == "histogram":
        traj = iterate(cfg.params, cfg.hcm2, a.n, a.burn_in)
        rep = dynamics.histogram_uniformity(traj, a.bins)
        print(f"chi2={rep.chi2:.4f} p={rep.p_value:.6g} n={rep.n_samples}")
        return reports.write_histogram(out, rep)
    if kind == "sensitivity":
        rep = dynamics.sensitivity_probe(cfg.params, cfg.hcm2, a.target,
                                         a.delta, a.horizon, a.threshold)
        print(f"divergence_step={rep.divergence_step} max_gap={rep.max_gap:.6g}")
        return reports.write_sensitivity(out, rep)
    if kind == "cobweb":
        segs = dynamics.cobweb_trace(cfg.params, cfg.hcm2, a.steps)
        return reports.write_cobweb(out, segs)
    raise ConfigError(f"unknown analysis {kind!r}")


def cmd_encrypt(cfg: RunConfig, in_path: Path, out_path: Path,
                decrypt: bool = False) -> Path:
    img = read_image(in_path)
    fn = crypto.decrypt if decrypt else crypto.encrypt
    write_image(fn(img, _key(cfg), cfg.crypto.rounds), out_path)
    return out_path


def cmd_metrics(cfg: RunConfig, img_path: Path | None) -> Path:
    img = read_image(img_path) if img_path else synthetic_photo()
    c = cfg.crypto
    m = crypto.differential_test(img, _key(cfg), c.trials, c.rounds, c.seed)
    for name, n, u in m.rows():
        print(f"{name:>8}  NPCR={n:.4f}  UACI={u:.4f}")
    return reports.write_metrics(cfg.out / "metrics.csv", m)


def cmd_repro(cfg: RunConfig, lena: Path | None = None) -> list[Path]:
    """Pinned reference runs: orbit and histogram, cobwebs, sensitivity,
    bifurcation and Lyapunov sweeps, and the differential metrics."""
    out = cfg.out
    hc, w = cfg.hcm2, cfg.analysis.workers
    written = []
    flat = MapParams(r1=0.01, r2=0.3, x0=0.03)
    traj = iterate(flat, hc, 140_000)
    written.append(reports.write_trajectory(out / "orbit.csv", traj))
    written.append(reports.write_histogram(
        out / "orbit_histogram.csv", dynamics.histogram_uniformity(traj, 100)))
    for r1, r2 in ((0.01, 0.3), (0.3, 0.01)):
        for x0 in (0.2, 0.6):
            segs = dynamics.cobweb_trace(MapParams(r1=r1, r2=r2, x0=x0), hc, 500)
            written.append(reports.write_cobweb(
                out / f"cobweb_r1-{r1}_r2-{r2}_x0-{x0}.csv", segs))
    probe = MapParams(r1=0.1, r2=0.3, x0=0.6)
    for target in ("x0", "r1"):
        rep = dynamics.sensitivity_probe(probe, hc, target, 1e-16, 100, 0.1)
        written.append(reports.write_sensitivity(
            out / f"sensitivity_{target}.csv", rep))
    for x0 in (0.5, 0.2):
        pts = dynamics.bifurcation_scan(hc, "r1", 0.3, (0.0, 1.0), 500, x0,
                                        500, 200, workers=w)
        written.append(reports.write_bifurcation(
            out / f"bifurcation_x0-{x0}.csv", pts))
    lyap = RunConfig(MapParams(r1=0.01, r2=0.3, x0=0.5), hc, cfg.analysis,
                     cfg.crypto, out)
    written.append(reports.write_lyapunov(
        out / "lyapunov_x0-0.5.csv", _lyapunov_rows(lyap, ("r1", "r2"), 50, w)))
    key = crypto.CipherKey(MapParams(), hc, cfg.crypto.nonce)
    images = [("synthetic", synthetic_photo())]
    if lena:
        images.append(("lena", read_image(lena)))
    for name, img in images:
        m = crypto.differential_test(img, key, 20, 2)
        written.append(reports.write_metrics(out / f"metrics_{name}.csv", m))
    return written


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        if args.command == "generate":
            path = cmd_generate(cfg)
        elif args.command == "analyze":
            path = cmd_analyze(cfg, args.kind)
        elif args.command in ("encrypt", "decrypt"):
            path = cmd_encrypt(cfg, args.in_path, args.out_path,
                               decrypt=args.command == "decrypt")
        elif args.command == "metrics":
            path = cmd_metrics(cfg, args.img_path)
        else:
            paths = cmd_repro(cfg, args.lena)
            path = cfg.out
            print(f"wrote {len(paths)} files")
        print(f"wrote {path}")
    except ImageFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (ConfigError, DegenerateOrbit, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
