"""Multi-pass workflow: flow-stress model -> slab solver -> roll beam.

Configuration is an INI file with ``[material]``, ``[geometry]``,
``[beam]`` and ``[run]`` sections; every key has a default matching the
laboratory mill (R = 75 mm, E = 211 GPa, 4 mm annealed strip, 0.20 m roll
barrel, 100 elements, mu = 0.1, 0.01 deg steps, 22.5% loaded length).
"""

import configparser
import csv
import json
import logging
import math
import os
import warnings
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Tuple

from . import analytical, beam, material, slab, surrogate
from ._io import atomic_write_text, write_csv
from .errors import ConfigError, DependencyError, RollsimError, ValidationError

log = logging.getLogger(__name__)

__all__ = [
    "MaterialSettings",
    "GeometrySettings",
    "BeamSettings",
    "RunSettings",
    "Config",
    "PassSchedule",
    "PassReport",
    "DEFAULT_SCHEDULE",
    "load_config",
    "dumps_config",
    "line_load",
    "train_command",
    "run_schedule",
    "beam_command",
    "compare_command",
    "radius_study_command",
    "read_summary",
]

DEFAULT_SCHEDULE = (3.24, 2.8, 2.48, 2.23, 1.99, 1.74, 1.44)

SUMMARY_HEADER = (
    "pass_index", "entry_thickness_mm", "exit_thickness_mm", "true_strain",
    "alpha_deg", "neutral_deg", "neutral_mpa", "mean_mpa", "contact_length_mm",
    "line_load_n_per_m", "max_deflection_m", "max_x_m", "friction",
    "strain_rate_per_s", "extrapolated",
)


@dataclass(frozen=True)
class MaterialSettings:
    dataset: str = ""  # empty: packaged surrogate dataset
    gauge_length_mm: float = material.GAUGE_LENGTH_MM
    cross_section_mm2: float = material.CROSS_SECTION_MM2
    hidden_width: int = 10
    epochs: int = 900
    seed: int = 0
    split: Tuple[float, float, float] = (0.70, 0.15, 0.15)
    initial_damping: float = 1e-3
    damping_increase: float = 10.0
    damping_decrease: float = 0.1
    strain_rate_per_s: float = slab.DEFAULT_STRAIN_RATE
    strain_mode: str = "cumulative"  # or "per-pass"

    def training_config(self):
        return material.TrainingConfig(
            epochs=self.epochs,
            split_fractions=self.split,
            seed=self.seed,
            hidden_width=self.hidden_width,
            initial_damping=self.initial_damping,
            damping_increase_factor=self.damping_increase,
            damping_decrease_factor=self.damping_decrease,
        )


@dataclass(frozen=True)
class GeometrySettings:
    roll_radius_mm: float = 75.0
    friction: float = 0.1
    step_deg: float = 0.01
    initial_thickness_mm: float = 4.0
    exit_thicknesses_mm: Tuple[float, ...] = DEFAULT_SCHEDULE
    angular_speed_rpm: float = 30.0  # recorded only; no equation uses it


@dataclass(frozen=True)
class BeamSettings:
    length_m: float = 0.20
    diameter_m: float = 0.15
    elastic_modulus_pa: float = 211e9
    element_count: int = 100
    boundary: str = "clamped-clamped"
    load_coverage: float = 0.225
    # "first-pass": w = mean pressure * contact length of pass 1 (w tracks the
    # mean pressure); "per-pass": w = mean pressure * own contact length
    load_length: str = "first-pass"
    poisson: float = 0.3
    plate_thickness_m: float = 1.0
    plate_radius_m: Optional[float] = None  # default: half the loaded length
    rigidity_form: str = "as-printed"

    def spec(self, diameter=None):
        return beam.BeamSpec(
            length=self.length_m,
            diameter=self.diameter_m if diameter is None else diameter,
            elastic_modulus=self.elastic_modulus_pa,
            element_count=self.element_count,
            boundary=self.boundary,
        )

    def plate(self):
        radius = self.plate_radius_m
        if radius is None:
            radius = 0.5 * self.load_coverage * self.length_m
        return analytical.PlateSpec(
            radius=radius,
            elastic_modulus=self.elastic_modulus_pa,
            thickness=self.plate_thickness_m,
            poisson=self.poisson,
            rigidity_form=self.rigidity_form,
        )


@dataclass(frozen=True)
class RunSettings:
    outdir: str = "results"


@dataclass(frozen=True)
class Config:
    material: MaterialSettings = field(default_factory=MaterialSettings)
    geometry: GeometrySettings = field(default_factory=GeometrySettings)
    beam: BeamSettings = field(default_factory=BeamSettings)
    run: RunSettings = field(default_factory=RunSettings)

    def __post_init__(self):
        if self.material.strain_mode not in ("cumulative", "per-pass"):
            raise ConfigError("strain_mode must be 'cumulative' or 'per-pass'")
        if self.beam.load_length not in ("first-pass", "per-pass"):
            raise ConfigError("load_length must be 'first-pass' or 'per-pass'")
        if not 0 < self.beam.load_coverage <= 1:
            raise ConfigError("load_coverage must lie in (0, 1]")
        PassSchedule(self.geometry.initial_thickness_mm, self.geometry.exit_thicknesses_mm)
        # fail at load time rather than mid-run
        self.material.training_config()
        self.beam.spec()
        self.beam.plate()
        g = self.geometry
        slab.RollPassGeometry(
            *self.schedule.passes()[0], roll_radius=g.roll_radius_mm, friction=g.friction,
            step_deg=g.step_deg, strain_rate=self.material.strain_rate_per_s,
        )

    @property
    def schedule(self):
        return PassSchedule(self.geometry.initial_thickness_mm, self.geometry.exit_thicknesses_mm)


_SECTIONS = {
    "material": MaterialSettings,
    "geometry": GeometrySettings,
    "beam": BeamSettings,
    "run": RunSettings,
}


def _parse_value(template, raw, key):
    raw = raw.strip()
    try:
        if isinstance(template, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(template, int):
            return int(raw)
        if isinstance(template, float):
            return float(raw)
        if isinstance(template, tuple):
            return tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
        if template is None:
            return None if raw == "" else float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def load_config(path=None, text=None):
    """Read a config file (or INI text); missing keys take their defaults."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        parser.read_string(text or "")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown = set(parser.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {}
    for name, cls in _SECTIONS.items():
        defaults = cls()
        kwargs = {}
        known = {f.name for f in fields(cls)}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in [{name}]")
                kwargs[key] = _parse_value(getattr(defaults, key), raw, f"{name}.{key}")
        parts[name] = cls(**kwargs)
    try:
        return Config(**parts)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def dumps_config(config):
    """INI text for ``config`` (round-trips through :func:`load_config`)."""
    lines = []
    for name in _SECTIONS:
        lines.append(f"[{name}]")
        for key, value in asdict(getattr(config, name)).items():
            if isinstance(value, (tuple, list)):
                value = ", ".join(format(v, "g") for v in value)
            elif value is None:
                value = ""
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class PassSchedule:
    """Annealed thickness and the exit thickness after each pass [mm]."""

    initial_thickness: float
    exit_thicknesses: Tuple[float, ...]

    def __post_init__(self):
        seq = (self.initial_thickness,) + tuple(self.exit_thicknesses)
        if len(seq) < 2:
            raise ValidationError("schedule needs at least one pass")
        if any(not b < a for a, b in zip(seq, seq[1:])) or seq[-1] <= 0:
            raise ValidationError(f"thicknesses must decrease strictly and stay > 0: {seq}")

    def passes(self):
        seq = (self.initial_thickness,) + tuple(self.exit_thicknesses)
        return list(zip(seq[:-1], seq[1:]))


@dataclass(eq=False)
class PassReport:
    pass_index: int
    entry_thickness_mm: float
    exit_thickness_mm: float
    true_strain: float
    alpha_deg: float
    neutral_deg: float
    neutral_pressure_mpa: float
    mean_pressure_mpa: float
    contact_length_mm: float
    line_load_n_per_m: float
    max_deflection_m: float
    max_x_m: float
    extrapolated: bool
    profile_path: str = ""
    deflection_path: str = ""
    pressure: slab.PressureProfile = field(default=None, repr=False)
    deflection: beam.DeflectionProfile = field(default=None, repr=False)


def line_load(mean_pressure_mpa, contact_length_mm):
    """Line load on the roll axis [N/m] from arc pressure [MPa] x contact length [mm]."""
    return mean_pressure_mpa * 1e6 * contact_length_mm * 1e-3


# -- CSV writers -------------------------------------------------------------

def write_pressure_profile(profile, mean, path_rows, path_summary):
    rows = []
    for branch in (profile.entry, profile.exit):
        angles, q = branch.ascending()
        rows += [(math.degrees(a), p, branch.side) for a, p in zip(angles, q)]
    write_csv(path_rows, ("phi_deg", "q_mpa", "branch"), rows)
    write_csv(
        path_summary,
        ("alpha_deg", "neutral_deg", "neutral_mpa", "mean_mpa"),
        [(math.degrees(profile.alpha), math.degrees(profile.neutral_angle),
          profile.neutral_pressure, mean)],
    )


def write_deflection(profile, path_rows, path_summary):
    write_csv(
        path_rows,
        ("x_m", "deflection_m", "slope_rad"),
        zip(profile.node_positions, profile.deflections, profile.slopes),
    )
    x, w = beam.max_deflection(profile)
    write_csv(path_summary, ("max_deflection_m", "max_x_m"), [(w, x)])


def _stem(outdir, index, kind):
    return os.path.join(outdir, f"pass{index:02d}_{kind}")


# -- commands ------------------------------------------------------------------

def load_samples(config, dataset_path=None):
    path = dataset_path or config.material.dataset
    if path:
        return material.load_dataset(
            path, config.material.gauge_length_mm, config.material.cross_section_mm2
        )
    log.info("using the packaged surrogate Stress316L dataset")
    return surrogate.load_shipped()


def train_command(config, model_out=None, dataset_path=None):
    """Split, train and optionally save a model.

    Returns ``(model, metrics)`` with MSE [MPa^2] per split.
    """
    samples = load_samples(config, dataset_path)
    tcfg = config.material.training_config()
    train_set, val, test = material.split_dataset(samples, tcfg)
    model = material.train(train_set, val, tcfg)
    metrics = {
        "train_mse": material.mse(model, train_set),
        "val_mse": material.mse(model, val),
        "test_mse": material.mse(model, test),
        "n_train": len(train_set),
        "n_val": len(val),
        "n_test": len(test),
    }
    if model_out:
        material.save_model(model, model_out)
    return model, metrics


def simulate_pass(config, model, h_in, h_out, load_length_mm=None):
    """Slab solution, line load and deflection for one pass (no file output)."""
    g, b = config.geometry, config.beam
    ref = config.schedule.initial_thickness if config.material.strain_mode == "cumulative" else h_in
    geom = slab.RollPassGeometry(
        entry_thickness=h_in,
        exit_thickness=h_out,
        roll_radius=g.roll_radius_mm,
        friction=g.friction,
        step_deg=g.step_deg,
        reference_thickness=ref,
        strain_rate=config.material.strain_rate_per_s,
    )
    profile = slab.solve_pass(geom, model)
    mean = slab.mean_pressure(profile)
    lc = slab.contact_length(geom)
    w = line_load(mean, lc if load_length_mm is None else load_length_mm)
    spec = b.spec()
    deflection = beam.solve(spec, beam.centered_load(spec, w, b.load_coverage))
    return geom, profile, mean, lc, w, deflection


def run_schedule(config, model, outdir=None):
    """Simulate every pass of the configured schedule and write reports.

    Returns a list of :class:`PassReport`. Any module error is re-raised
    with the pass index attached.
    """
    outdir = outdir or config.run.outdir
    os.makedirs(outdir, exist_ok=True)
    schedule = config.schedule
    reports = []
    load_length_mm = None
    for index, (h_in, h_out) in enumerate(schedule.passes(), start=1):
        try:
            geom, profile, mean, lc, w, deflection = simulate_pass(
                config, model, h_in, h_out, load_length_mm
            )
        except RollsimError as exc:
            exc.args = (f"pass {index}: {exc}",) + exc.args[1:]
            raise
        if index == 1 and config.beam.load_length == "first-pass":
            load_length_mm = lc
        if profile.extrapolated:
            log.warning("pass %d: flow-stress model extrapolates beyond its training data", index)
        stem_p = _stem(outdir, index, "pressure")
        stem_d = _stem(outdir, index, "deflection")
        write_pressure_profile(profile, mean, stem_p + ".csv", stem_p + "_summary.csv")
        write_deflection(deflection, stem_d + ".csv", stem_d + "_summary.csv")
        x_max, w_max = beam.max_deflection(deflection)
        reports.append(PassReport(
            pass_index=index,
            entry_thickness_mm=h_in,
            exit_thickness_mm=h_out,
            true_strain=math.log(schedule.initial_thickness / h_out),
            alpha_deg=math.degrees(profile.alpha),
            neutral_deg=math.degrees(profile.neutral_angle),
            neutral_pressure_mpa=profile.neutral_pressure,
            mean_pressure_mpa=mean,
            contact_length_mm=lc,
            line_load_n_per_m=w,
            max_deflection_m=w_max,
            max_x_m=x_max,
            extrapolated=profile.extrapolated,
            profile_path=stem_p + ".csv",
            deflection_path=stem_d + ".csv",
            pressure=profile,
            deflection=deflection,
        ))
    _write_summary(config, reports, outdir)
    return reports


def _write_summary(config, reports, outdir):
    rows = [
        (r.pass_index, r.entry_thickness_mm, r.exit_thickness_mm, r.true_strain,
         r.alpha_deg, r.neutral_deg, r.neutral_pressure_mpa, r.mean_pressure_mpa,
         r.contact_length_mm, r.line_load_n_per_m, r.max_deflection_m, r.max_x_m,
         config.geometry.friction, config.material.strain_rate_per_s,
         "true" if r.extrapolated else "false")
        for r in reports
    ]
    # full precision: beam, compare and radius-study re-read these values
    write_csv(os.path.join(outdir, "summary.csv"), SUMMARY_HEADER, rows, precision=17)
    meta = {
        "config": asdict(config),
        "dataset": config.material.dataset or "packaged surrogate (rollsim.surrogate)",
        "friction": config.geometry.friction,
        "strain_rate_per_s": config.material.strain_rate_per_s,
        "strain_mode": config.material.strain_mode,
        "load_length": config.beam.load_length,
        "passes": len(reports),
    }
    atomic_write_text(
        os.path.join(outdir, "run_metadata.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )


def read_summary(outdir):
    """Rows of ``summary.csv`` as dicts of floats (``extrapolated`` as bool)."""
    path = os.path.join(outdir, "summary.csv")
    if not os.path.exists(path):
        raise DependencyError(f"{path} not found; run 'simulate' first")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = {k: float(v) for k, v in row.items() if k != "extrapolated"}
        parsed["pass_index"] = int(parsed["pass_index"])
        parsed["extrapolated"] = row.get("extrapolated") == "true"
        out.append(parsed)
    if not out:
        raise DependencyError(f"{path} has no passes")
    return out


def beam_command(config, outdir=None, line_load_n_per_m=None):
    """Re-solve the roll beam with the current ``[beam]`` settings.

    With ``line_load_n_per_m`` a single load case is solved into
    ``beam_deflection.csv``; otherwise every pass in ``summary.csv`` is
    re-solved into ``beam_passNN_deflection.csv``. Returns the profiles.
    """
    outdir = outdir or config.run.outdir
    spec = config.beam.spec()
    if line_load_n_per_m is not None:
        loads = [("beam", line_load_n_per_m)]
    else:
        loads = [(f"beam_pass{r['pass_index']:02d}", r["line_load_n_per_m"])
                 for r in read_summary(outdir)]
    profiles = []
    for stem, w in loads:
        prof = beam.solve(spec, beam.centered_load(spec, w, config.beam.load_coverage))
        base = os.path.join(outdir, f"{stem}_deflection")
        write_deflection(prof, base + ".csv", base + "_summary.csv")
        profiles.append(prof)
    return profiles


def compare_command(config, outdir=None):
    """Analytical plate versus FEM maximum deflection per pass.

    Writes ``comparison.csv`` and returns its rows as
    ``(true_strain, analytical_m, numerical_m)`` tuples.
    """
    outdir = outdir or config.run.outdir
    plate = config.beam.plate()
    rows = []
    for r in read_summary(outdir):
        ana = analytical.plate_max_deflection(r["mean_mpa"] * 1e6, plate)
        rows.append((r["true_strain"], ana, abs(r["max_deflection_m"])))
    write_csv(
        os.path.join(outdir, "comparison.csv"),
        ("true_strain", "analytical_deflection_m", "numerical_deflection_m"),
        rows,
    )
    return rows


def radius_study_command(config, diameters, outdir=None):
    """Re-solve the pass-1 load case for several roll diameters [m].

    Returns ``[(diameter, x_max, w_max), ...]`` and writes one deflection CSV
    per diameter plus ``radius_study.csv``.
    """
    outdir = outdir or config.run.outdir
    diameters = list(diameters)
    if not diameters:
        warnings.warn("radius study called with no diameters; nothing to do", stacklevel=2)
        return []
    first = read_summary(outdir)[0]
    w = first["line_load_n_per_m"]
    results = []
    for d in diameters:
        spec = config.beam.spec(diameter=d)
        prof = beam.solve(spec, beam.centered_load(spec, w, config.beam.load_coverage))
        base = os.path.join(outdir, f"radius_d{d * 1000:.1f}mm_deflection")
        write_deflection(prof, base + ".csv", base + "_summary.csv")
        x, wm = beam.max_deflection(prof)
        results.append((d, x, wm))
    write_csv(
        os.path.join(outdir, "radius_study.csv"),
        ("diameter_m", "max_deflection_m", "max_x_m"),
        [(d, wm, x) for d, x, wm in results],
    )
    return results
