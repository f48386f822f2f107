"""Command-line front end: simulate, beamform, compare, metrics, lut-build.

Configuration precedence is CLI flag > COBALT_* environment variable >
config-file value > built-in default; the effective configuration is echoed
into every output header. Errors exit nonzero with a JSON record on stderr.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as cio
from .cfcoba import SolverConfig
from .geometry import ArrayGeometry, make_fractal, make_ula
from .imaging import MetricsReport, assemble_image, nrmse, reduction_factor
from .params import ImagingSetup
from .pipelines import METHODS, band_for_setup, beamform_line
from .fourier import get_or_build_lut
from .simulator import simulate_channels

ENV_PREFIX = "COBALT_"


def _env_default(name, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _add_common(p):
    p.add_argument("--threads", type=int,
                   default=int(_env_default("threads", 1)),
                   help="worker threads for per-angle processing")
    p.add_argument("--seed", type=int,
                   default=_maybe_int(_env_default("seed")), help="RNG seed")


def _maybe_int(v):
    return None if v is None else int(v)


def _load_setup(args):
    cfg = {}
    if getattr(args, "setup", None):
        with open(args.setup) as f:
            cfg = json.load(f)
    for key, flag in [("band_start", "band_start"), ("band_size", "band_size"),
                      ("sub_band_size", "sub_band_size")]:
        val = getattr(args, flag, None)
        if val is None:
            env = _env_default(flag)
            val = int(env) if env is not None else None
        if val is not None:
            cfg[key] = val
    return ImagingSetup.from_dict(cfg)


def _load_geometry(args, setup):
    if getattr(args, "geometry", None):
        with open(args.geometry) as f:
            return ArrayGeometry.from_dict(json.load(f))
    pitch = args.pitch_m
    if pitch is None:
        pitch = setup.speed_of_sound / setup.carrier_hz / 2.0
    if getattr(args, "fractal_order", None) is not None:
        generator = make_ula(2, pitch) if args.generator is None else \
            ArrayGeometry(tuple(int(v) for v in args.generator.split(",")), pitch)
        return make_fractal(generator, args.fractal_order)
    if getattr(args, "num_elements", None):
        return make_ula(args.num_elements, pitch)
    raise ValueError("provide --geometry, --num-elements or --fractal-order")


def cmd_simulate(args):
    setup = _load_setup(args)
    geom = _load_geometry(args, setup)
    scene = cio.load_scene(args.scene)
    pulse = setup.pulse()
    tx_sigma = math.radians(args.tx_beam_sigma_deg) \
        if args.tx_beam_sigma_deg else None

    def one(theta):
        return simulate_channels(scene, pulse, setup, geom, theta,
                                 tx_beam_sigma_rad=tx_sigma,
                                 snr_db=args.snr_db, rng=args.seed)

    frames = _map(one, setup.angles_rad, args.threads)
    cio.write_acquisition(args.out, setup, geom, frames, scene=scene,
                          extra={"pulse": pulse.to_dict(), "seed": args.seed})
    print(json.dumps({"written": args.out, "angles": len(frames),
                      "channels": len(geom),
                      "samples": setup.num_time_samples}))


def cmd_beamform(args):
    header = cio.read_acquisition_header(args.input)
    setup = ImagingSetup.from_dict(header["setup"])
    if args.band_start is not None or args.band_size is not None \
            or args.sub_band_size is not None:
        d = setup.to_dict()
        for k, v in [("band_start", args.band_start),
                     ("band_size", args.band_size),
                     ("sub_band_size", args.sub_band_size)]:
            if v is not None:
                d[k] = v
        setup = ImagingSetup.from_dict(d)
    pulse = setup.pulse()
    solver = SolverConfig(epsilon=args.epsilon or 0.0,
                          strict=not args.best_effort,
                          complex_amplitudes=args.complex_amplitudes)

    def one(i):
        frame, _ = cio.read_acquisition_frame(args.input, i)
        return beamform_line(frame, args.method, setup, pulse=pulse,
                             lut_cache=args.lut_cache, solver_cfg=solver,
                             epsilon_q=args.epsilon_q, n_cap=args.n_cap)

    lines = _map(one, range(header["num_angles"]), args.threads)
    img = assemble_image(lines, setup.angles_rad, setup.speed_of_sound,
                         setup.sample_rate_hz,
                         dynamic_range_db=args.dynamic_range_db,
                         method_tag=args.method.upper())
    out = args.out
    cio.write_pgm(out + ".pgm", img.intensity_db, args.dynamic_range_db)
    cio.write_csv_matrix(out + ".csv", img.intensity_db)
    record = {
        "method": args.method,
        "dynamic_range_db": args.dynamic_range_db,
        "config": setup.to_dict(),
        "geometry": header["geometry"],
        "angles_rad": list(setup.angles_rad),
        "depths_m": img.depths_m.tolist(),
        "source": os.path.abspath(args.input),
    }
    with open(out + ".json", "w") as f:
        json.dump(record, f, indent=2)
    print(json.dumps({"written": [out + ext for ext in (".pgm", ".csv", ".json")]}))


def cmd_compare(args):
    images = []
    for path in args.images:
        with open(path + ".json") as f:
            meta = json.load(f)
        data = np.loadtxt(path + ".csv", delimiter=",", ndmin=2)
        images.append((path, meta, data))
    ref = images[0]
    for _, meta, data in images[1:]:
        if data.shape != ref[2].shape or meta["angles_rad"] != ref[1]["angles_rad"]:
            raise ValueError("images must share grids for comparison")
    report = MetricsReport()
    for path, meta, data in images:
        report.nrmse[meta["method"]] = nrmse(ref[2], data)
    if args.full_elements and args.thinned_elements and args.n_used:
        n_st = ImagingSetup.from_dict(ref[1]["config"]).num_time_samples
        report.reduction_factor = reduction_factor(
            args.full_elements, args.thinned_elements, n_st, args.n_used)
    print(json.dumps(report.to_dict(), indent=2))


def cmd_metrics(args):
    n_st = args.n_traditional
    rf = reduction_factor(args.full_elements, args.thinned_elements,
                          n_st, args.n_used)
    print(json.dumps({
        "reduction_factor": float(rf),
        "reduction_factor_exact": [rf.numerator, rf.denominator],
        "reduction_factor_rounded": round(float(rf), 1),
    }, indent=2))


def cmd_lut_build(args):
    setup = _load_setup(args)
    geom = _load_geometry(args, setup)
    band = band_for_setup(setup)
    built = []
    for theta in setup.angles_rad:
        lut = get_or_build_lut(theta, band, geom, setup,
                               epsilon_q=args.epsilon_q, n_cap=args.n_cap,
                               cache_dir=args.lut_cache)
        built.append({"theta": theta, "n_lo": lut.n_lo, "n_hi": lut.n_hi,
                      "key": lut.key})
    print(json.dumps({"cache_dir": args.lut_cache, "luts": built}, indent=2))


def _map(fn, items, threads):
    items = list(items)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def build_parser():
    p = argparse.ArgumentParser(prog="cobalt",
                                description="Sparse-array sub-Nyquist "
                                            "ultrasound beamforming toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize channel data")
    sim.add_argument("--scene", required=True)
    sim.add_argument("--setup", default=_env_default("setup"))
    sim.add_argument("--out", required=True)
    sim.add_argument("--geometry")
    sim.add_argument("--num-elements", type=int)
    sim.add_argument("--fractal-order", type=int,
                     default=_maybe_int(_env_default("fractal_order")))
    sim.add_argument("--generator", default=_env_default("generator"))
    sim.add_argument("--pitch-m", type=float)
    sim.add_argument("--band-start", type=int)
    sim.add_argument("--band-size", type=int)
    sim.add_argument("--sub-band-size", type=int)
    sim.add_argument("--tx-beam-sigma-deg", type=float)
    sim.add_argument("--snr-db", type=float)
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    bf = sub.add_parser("beamform", help="beamform an acquisition file")
    bf.add_argument("--in", dest="input", required=True)
    bf.add_argument("--method", choices=METHODS, required=True)
    bf.add_argument("--out", required=True)
    bf.add_argument("--band-start", type=int)
    bf.add_argument("--band-size", type=int)
    bf.add_argument("--sub-band-size", type=int)
    bf.add_argument("--epsilon", type=float,
                    help="noise ball radius for cfcoba recovery")
    bf.add_argument("--epsilon-q", type=float,
                    default=float(_env_default("epsilon_q", 1e-3)),
                    help="distortion-kernel truncation energy fraction")
    bf.add_argument("--n-cap", type=int,
                    default=int(_env_default("n_cap", 600)),
                    help="largest distortion-kernel offset considered")
    bf.add_argument("--best-effort", action="store_true",
                    help="keep the best cfcoba solution when the feasibility "
                         "target is out of reach")
    bf.add_argument("--complex-amplitudes", action="store_true",
                    help="allow complex spike amplitudes in cfcoba recovery")
    bf.add_argument("--dynamic-range-db", type=float,
                    default=float(_env_default("dynamic_range_db", 60.0)))
    bf.add_argument("--lut-cache", default=_env_default("lut_cache"))
    _add_common(bf)
    bf.set_defaults(func=cmd_beamform)

    cmp_ = sub.add_parser("compare", help="tabulate metrics across images")
    cmp_.add_argument("images", nargs="+",
                      help="output prefixes from `beamform`")
    cmp_.add_argument("--full-elements", type=int)
    cmp_.add_argument("--thinned-elements", type=int)
    cmp_.add_argument("--n-used", type=int)
    _add_common(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    met = sub.add_parser("metrics", help="data-reduction arithmetic")
    met.add_argument("--full-elements", type=int, required=True)
    met.add_argument("--thinned-elements", type=int, required=True)
    met.add_argument("--n-traditional", type=int, required=True)
    met.add_argument("--n-used", type=int, required=True)
    met.set_defaults(func=cmd_metrics)

    lut = sub.add_parser("lut-build", help="precompute distortion LUTs")
    lut.add_argument("--setup", required=True)
    lut.add_argument("--geometry")
    lut.add_argument("--num-elements", type=int)
    lut.add_argument("--fractal-order", type=int)
    lut.add_argument("--generator")
    lut.add_argument("--pitch-m", type=float)
    lut.add_argument("--band-start", type=int)
    lut.add_argument("--band-size", type=int)
    lut.add_argument("--sub-band-size", type=int)
    lut.add_argument("--epsilon-q", type=float, default=1e-3)
    lut.add_argument("--n-cap", type=int,
                     default=int(_env_default("n_cap", 600)))
    lut.add_argument("--lut-cache", required=True)
    _add_common(lut)
    lut.set_defaults(func=cmd_lut_build)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - the CLI boundary
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
