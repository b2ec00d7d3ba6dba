"""Command-line entry point: ``rollsim {train,simulate,beam,compare,radius-study}``.

Exit codes: 0 success, 1 validation/configuration error, 2 solver or
training error.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import material, pipeline
from .errors import RollsimError, ValidationError

log = logging.getLogger("rollsim")


def _config(args):
    config = pipeline.load_config(args.config) if args.config else pipeline.Config()
    if getattr(args, "seed", None) is not None:
        config = replace(config, material=replace(config.material, seed=args.seed))
    if getattr(args, "outdir", None):
        config = replace(config, run=replace(config.run, outdir=args.outdir))
    return config


def _model(args, config):
    if args.model and os.path.exists(args.model):
        return material.load_model(args.model)
    if args.model:
        raise ValidationError(f"model file not found: {args.model}")
    log.info("no --model given; training a flow-stress model first")
    model, _ = pipeline.train_command(config)
    return model


def cmd_train(args):
    config = _config(args)
    out = args.model or os.path.join(config.run.outdir, "model.fsm")
    _, metrics = pipeline.train_command(config, out, dataset_path=args.dataset)
    print(f"model written to {out}")
    for split in ("train", "val", "test"):
        print(f"{split:>5} MSE = {metrics[split + '_mse']:.6g} MPa^2 (n={metrics['n_' + split]})")


def cmd_simulate(args):
    config = _config(args)
    reports = pipeline.run_schedule(config, _model(args, config))
    print("pass  alpha[deg]  neutral[deg]  q_n[MPa]  mean[MPa]  w[N/m]  W_max[m]")
    for r in reports:
        print(f"{r.pass_index:4d}  {r.alpha_deg:10.4f}  {r.neutral_deg:12.4f}  "
              f"{r.neutral_pressure_mpa:8.1f}  {r.mean_pressure_mpa:9.1f}  "
              f"{r.line_load_n_per_m:.4g}  {r.max_deflection_m:.4e}")
    print(f"friction = {config.geometry.friction}, strain rate = "
          f"{config.material.strain_rate_per_s} 1/s, outputs in {config.run.outdir}")


def cmd_beam(args):
    config = _config(args)
    profiles = pipeline.beam_command(config, line_load_n_per_m=args.line_load)
    print(f"solved {len(profiles)} load case(s) into {config.run.outdir}")


def cmd_compare(args):
    config = _config(args)
    rows = pipeline.compare_command(config)
    print("true_strain  analytical[m]  numerical[m]")
    for strain, ana, num in rows:
        print(f"{strain:11.4f}  {ana:13.4e}  {num:12.4e}")


def cmd_radius_study(args):
    config = _config(args)
    diameters = [float(d) for d in args.diameters.split(",") if d.strip()] if args.diameters else []
    for d, x, w in pipeline.radius_study_command(config, diameters):
        print(f"diameter {d:.4g} m: max deflection {w:.4e} m at x = {x:.4g} m")


def build_parser():
    parser = argparse.ArgumentParser(prog="rollsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        p.add_argument("--config", metavar="PATH", help="INI configuration file")
        p.add_argument("--outdir", metavar="PATH", help="output directory")
        if model:
            p.add_argument("--model", metavar="PATH", help="flow-stress model file")
        p.add_argument("--seed", type=int, metavar="N", help="training seed override")

    p = sub.add_parser("train", help="train the flow-stress model")
    common(p)
    p.add_argument("--dataset", metavar="PATH", help="tensile dataset CSV (raw or converted)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run the multi-pass schedule")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("beam", help="re-solve roll deflection from summary.csv or a given load")
    common(p, model=False)
    p.add_argument("--line-load", type=float, metavar="N_PER_M")
    p.set_defaults(func=cmd_beam)

    p = sub.add_parser("compare", help="analytical vs numerical maximum deflection")
    common(p, model=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("radius-study", help="pass-1 deflection for several roll diameters")
    common(p, model=False)
    p.add_argument("--diameters", default="0.15,0.19", metavar="D1,D2,...",
                   help="roll diameters in m (default: 0.15,0.19)")
    p.set_defaults(func=cmd_radius_study)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RollsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
