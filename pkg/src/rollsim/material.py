"""Flow-stress model of the strip material.

Tensile-test ingestion (extension/force to true strain/true stress), a
single-hidden-layer sigmoid regression network trained by full-batch
Levenberg-Marquardt on the mean squared error, and the plane-strain
mapping from flow stress to shear yield stress ``k = sigma / sqrt(3)``.

All stresses are in MPa, strains are dimensionless true strains and strain
rates are in 1/s.
"""

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DomainError, ParseError, TrainingError, ValidationError

__all__ = [
    "RawTensileRecord",
    "StressStrainSample",
    "TrainingConfig",
    "FlowStressModel",
    "ConstantFlowStress",
    "GAUGE_LENGTH_MM",
    "CROSS_SECTION_MM2",
    "convert_raw",
    "to_engineering",
    "load_dataset",
    "samples_to_arrays",
    "split_dataset",
    "train",
    "train_with_history",
    "predict",
    "mse",
    "shear_yield",
    "flow_stress_at_thickness",
    "save_model",
    "load_model",
    "dumps_model",
    "loads_model",
]

# ASTM E8 sub-size specimen used for the Stress316L tensile tests.
GAUGE_LENGTH_MM = 32.0
CROSS_SECTION_MM2 = 24.0

MODEL_MAGIC = "ROLLSIM-FSM v1"
RAW_HEADER = ("strain_rate_per_s", "extension_mm", "force_n")
CONVERTED_HEADER = ("strain_rate_per_s", "true_strain", "true_stress_mpa")

# A normalized input further than one full range width outside [0, 1]
# is flagged as extrapolation.
_EXTRAPOLATION_LOW = -1.0
_EXTRAPOLATION_HIGH = 2.0


def _check_value(name, value, allow_zero=True):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}")


@dataclass(frozen=True)
class RawTensileRecord:
    """One machine reading: strain rate [1/s], extension [mm], force [N]."""

    strain_rate: float
    extension: float
    force: float

    def __post_init__(self):
        _check_value("strain_rate", self.strain_rate, allow_zero=False)
        _check_value("extension", self.extension)
        _check_value("force", self.force)


@dataclass(frozen=True)
class StressStrainSample:
    """One (true strain, strain rate, true stress [MPa]) observation."""

    true_strain: float
    strain_rate: float
    true_stress: float

    def __post_init__(self):
        _check_value("true_strain", self.true_strain)
        _check_value("strain_rate", self.strain_rate, allow_zero=False)
        _check_value("true_stress", self.true_stress)


def convert_raw(record, gauge_length=GAUGE_LENGTH_MM, cross_section=CROSS_SECTION_MM2):
    """Convert a raw tensile reading to true strain and true stress.

    Parameters
    ----------
    record : RawTensileRecord
    gauge_length : float
        Initial gauge length [mm].
    cross_section : float
        Initial cross-section [mm^2].

    Returns
    -------
    StressStrainSample
    """
    _check_value("gauge_length", gauge_length, allow_zero=False)
    _check_value("cross_section", cross_section, allow_zero=False)
    _check_value("extension", record.extension)
    _check_value("force", record.force)
    e = record.extension / gauge_length
    s = record.force / cross_section
    return StressStrainSample(
        true_strain=math.log1p(e),
        strain_rate=record.strain_rate,
        true_stress=s * (1.0 + e),
    )


def to_engineering(sample, gauge_length=GAUGE_LENGTH_MM, cross_section=CROSS_SECTION_MM2):
    """Inverse of :func:`convert_raw`."""
    e = math.expm1(sample.true_strain)
    return RawTensileRecord(
        strain_rate=sample.strain_rate,
        extension=e * gauge_length,
        force=sample.true_stress / (1.0 + e) * cross_section,
    )


def load_dataset(source, gauge_length=GAUGE_LENGTH_MM, cross_section=CROSS_SECTION_MM2):
    """Read a raw or converted tensile dataset CSV.

    The variant is detected from the header row. Raw rows are converted
    with the given specimen dimensions.

    Parameters
    ----------
    source : str, os.PathLike or file-like
        Path to the CSV file, or an open text stream.

    Returns
    -------
    list of StressStrainSample
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _read_dataset(fh, gauge_length, cross_section)
    return _read_dataset(source, gauge_length, cross_section)


def _read_dataset(fh, gauge_length, cross_section):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty dataset: missing header", line=1) from None
    header = tuple(h.strip() for h in header)
    if header == RAW_HEADER:
        raw = True
    elif header == CONVERTED_HEADER:
        raw = False
    else:
        raise ParseError(
            f"unrecognized header {','.join(header)!r}; expected "
            f"{','.join(RAW_HEADER)!r} or {','.join(CONVERTED_HEADER)!r}",
            line=1,
        )

    samples = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=line)
        try:
            a, b, c = (float(v) for v in row)
        except ValueError as exc:
            raise ParseError(str(exc), line=line) from None
        try:
            if raw:
                samples.append(
                    convert_raw(RawTensileRecord(a, b, c), gauge_length, cross_section)
                )
            else:
                samples.append(StressStrainSample(true_strain=b, strain_rate=a, true_stress=c))
        except ValidationError as exc:
            raise ParseError(str(exc), line=line) from None
    if not samples:
        raise ParseError("dataset contains no data rows", line=reader.line_num)
    return samples


def samples_to_arrays(samples):
    """Return ``(strain, rate, stress)`` float arrays for a list of samples."""
    strain = np.fromiter((s.true_strain for s in samples), float, len(samples))
    rate = np.fromiter((s.strain_rate for s in samples), float, len(samples))
    stress = np.fromiter((s.true_stress for s in samples), float, len(samples))
    return strain, rate, stress


@dataclass(frozen=True)
class TrainingConfig:
    """Levenberg-Marquardt training settings.

    One epoch is one accepted full-batch LM step. Training also stops early
    when the damping exceeds ``max_damping`` without finding a descent step.
    """

    epochs: int = 900
    split_fractions: Tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0
    hidden_width: int = 10
    initial_damping: float = 1e-3
    damping_increase_factor: float = 10.0
    damping_decrease_factor: float = 0.1
    max_damping: float = 1e10

    def __post_init__(self):
        fr = tuple(float(f) for f in self.split_fractions)
        object.__setattr__(self, "split_fractions", fr)
        if len(fr) != 3 or any(f < 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
            raise ConfigError(
                f"split_fractions must be three non-negative values summing to 1, got {fr}"
            )
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.hidden_width < 1:
            raise ValidationError(f"hidden_width must be >= 1, got {self.hidden_width}")
        if not self.initial_damping > 0:
            raise ValidationError("initial_damping must be > 0")
        if not self.damping_increase_factor > 1:
            raise ValidationError("damping_increase_factor must be > 1")
        if not 0 < self.damping_decrease_factor < 1:
            raise ValidationError("damping_decrease_factor must lie in (0, 1)")
        if not self.max_damping > self.initial_damping:
            raise ValidationError("max_damping must exceed initial_damping")


def split_dataset(samples, config):
    """Shuffle and partition samples into (train, validation, test).

    Validation and test sizes are ``floor(n * fraction)``; the remainder goes
    to the training set. The permutation depends only on ``config.seed``.
    """
    n = len(samples)
    if n < 10:
        raise ValidationError(f"need at least 10 samples to split, got {n}")
    _, f_val, f_test = config.split_fractions
    n_val = int(math.floor(n * f_val + 1e-9))
    n_test = int(math.floor(n * f_test + 1e-9))
    order = np.random.default_rng(config.seed).permutation(n)
    val = [samples[i] for i in order[:n_val]]
    test = [samples[i] for i in order[n_val:n_val + n_test]]
    train_set = [samples[i] for i in order[n_val + n_test:]]
    return train_set, val, test


def _features(strain, rate):
    # log10 keeps the four decades-apart strain rates evenly spread
    return np.column_stack([np.asarray(strain, float), np.log10(np.asarray(rate, float))])


def _range(values):
    lo, hi = float(np.min(values)), float(np.max(values))
    if not hi > lo:
        hi = lo + 1.0
    return lo, hi


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FlowStressModel:
    """Trained 2-input, one-hidden-layer sigmoid regression network.

    Inputs are true strain and log10 strain rate, each min-max scaled to
    [0, 1] with the stored ranges; the linear output is scaled back to
    stress with ``output_normalization``.
    """

    input_weights: np.ndarray
    input_biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float
    input_normalization: Tuple[Tuple[float, float], Tuple[float, float]]
    output_normalization: Tuple[float, float]
    training_seed: int = 0
    history: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        W = _freeze(self.input_weights)
        b = _freeze(self.input_biases).ravel()
        v = _freeze(self.output_weights).ravel()
        if W.ndim != 2 or W.shape[1] != 2 or W.shape[0] < 1:
            raise ValidationError(f"input_weights must be (hidden_width, 2), got {W.shape}")
        h = W.shape[0]
        if b.shape != (h,) or v.shape != (h,):
            raise ValidationError("bias/output weight length must equal hidden_width")
        norm_in = tuple((float(lo), float(hi)) for lo, hi in self.input_normalization)
        norm_out = (float(self.output_normalization[0]), float(self.output_normalization[1]))
        if len(norm_in) != 2 or any(not hi > lo for lo, hi in norm_in + (norm_out,)):
            raise ValidationError("normalization ranges need max > min for every feature")
        object.__setattr__(self, "input_weights", W)
        object.__setattr__(self, "input_biases", b)
        object.__setattr__(self, "output_weights", v)
        object.__setattr__(self, "output_bias", float(self.output_bias))
        object.__setattr__(self, "input_normalization", norm_in)
        object.__setattr__(self, "output_normalization", norm_out)
        object.__setattr__(self, "training_seed", int(self.training_seed))

    @property
    def hidden_width(self):
        return self.input_weights.shape[0]

    def _normalize(self, strain, rate):
        x = _features(strain, rate)
        lo = np.array([r[0] for r in self.input_normalization])
        hi = np.array([r[1] for r in self.input_normalization])
        return (x - lo) / (hi - lo)

    def predict(self, true_strain, strain_rate, return_flag=False):
        """Predicted true stress [MPa].

        Scalars give a float, arrays give an array. With ``return_flag`` a
        second value tells whether any input lies more than one range width
        outside the training data (extrapolation).
        """
        scalar = np.ndim(true_strain) == 0 and np.ndim(strain_rate) == 0
        strain, rate = np.broadcast_arrays(
            np.atleast_1d(np.asarray(true_strain, float)),
            np.atleast_1d(np.asarray(strain_rate, float)),
        )
        if np.any(rate <= 0):
            raise DomainError("strain_rate must be > 0")
        u = self._normalize(strain.ravel(), rate.ravel())
        y = _forward(self.input_weights, self.input_biases, self.output_weights,
                     self.output_bias, u)
        lo, hi = self.output_normalization
        stress = (lo + y * (hi - lo)).reshape(strain.shape)
        out = float(stress[0]) if scalar else stress
        if return_flag:
            flag = bool(np.any((u < _EXTRAPOLATION_LOW) | (u > _EXTRAPOLATION_HIGH)))
            return out, flag
        return out


@dataclass(frozen=True)
class ConstantFlowStress:
    """Strain- and rate-independent flow stress, for closed-form checks."""

    stress: float

    def predict(self, true_strain, strain_rate, return_flag=False):
        if np.ndim(true_strain) == 0 and np.ndim(strain_rate) == 0:
            out = float(self.stress)
        else:
            out = np.full(np.broadcast(true_strain, strain_rate).shape, float(self.stress))
        return (out, False) if return_flag else out


def predict(model, true_strain, strain_rate, return_flag=False):
    """Predicted true stress [MPa] of ``model`` at the given strain and rate."""
    return model.predict(true_strain, strain_rate, return_flag=return_flag)


def mse(model, samples):
    """Mean squared error [MPa^2] of ``model`` on ``samples``."""
    strain, rate, stress = samples_to_arrays(samples)
    return float(np.mean((model.predict(strain, rate) - stress) ** 2))


# -- Levenberg-Marquardt -------------------------------------------------------

def _unpack(theta, h):
    # theta = [W[:, 0], W[:, 1], b, v, c]
    W = np.column_stack([theta[:h], theta[h:2 * h]])
    b = theta[2 * h:3 * h]
    v = theta[3 * h:4 * h]
    c = theta[4 * h]
    return W, b, v, c


def _forward(W, b, v, c, u):
    return expit(u @ W.T + b) @ v + c


def _evaluate(theta, h, uT, y):
    """Hidden activations (h, n) and normalized MSE; ``uT`` is (2, n)."""
    z = np.outer(theta[:h], uT[0])
    z += np.outer(theta[h:2 * h], uT[1])
    z += theta[2 * h:3 * h, None]
    a = expit(z)
    r = theta[3 * h:4 * h] @ a + theta[4 * h] - y
    return a, r, float(np.mean(r * r))


def _normal_equations(theta, h, uT, a, r):
    """``J^T J`` and ``J^T r`` from cached activations."""
    da = a * (1.0 - a) * theta[3 * h:4 * h, None]
    JT = np.empty((4 * h + 1, uT.shape[1]))
    np.multiply(da, uT[0], out=JT[:h])
    np.multiply(da, uT[1], out=JT[h:2 * h])
    JT[2 * h:3 * h] = da
    JT[3 * h:4 * h] = a
    JT[4 * h] = 1.0
    return JT @ JT.T, JT @ r


def train_with_history(train_set, validation, config):
    """Train a flow-stress network and return ``(model, history)``.

    ``history`` holds per-epoch normalized train and validation MSE, the
    best epoch and the stop reason.
    """
    if not train_set or not validation:
        raise ValidationError("train and validation sets must be non-empty")
    h = config.hidden_width
    s_tr, r_tr, y_tr = samples_to_arrays(train_set)
    s_va, r_va, y_va = samples_to_arrays(validation)

    x_tr = _features(s_tr, r_tr)
    norm_in = (_range(x_tr[:, 0]), _range(x_tr[:, 1]))
    norm_out = _range(y_tr)
    lo = np.array([norm_in[0][0], norm_in[1][0]])
    span = np.array([norm_in[0][1], norm_in[1][1]]) - lo
    out_lo, out_span = norm_out[0], norm_out[1] - norm_out[0]

    u_tr = ((x_tr - lo) / span).T.copy()
    u_va = ((_features(s_va, r_va) - lo) / span).T.copy()
    t_tr = (y_tr - out_lo) / out_span
    t_va = (y_va - out_lo) / out_span

    rng = np.random.default_rng(config.seed)
    theta = rng.uniform(-0.5, 0.5, size=4 * h + 1)

    a, r, loss = _evaluate(theta, h, u_tr, t_tr)
    val = _evaluate(theta, h, u_va, t_va)[2]
    if not (math.isfinite(loss) and math.isfinite(val)):
        raise TrainingError("non-finite initial loss", epoch=0)
    best_theta, best_val, best_epoch = theta.copy(), val, 0
    history = {"train_mse": [loss], "val_mse": [val]}
    lam = config.initial_damping
    eye = np.eye(theta.size)
    stop = "max_epochs"

    for epoch in range(1, config.epochs + 1):
        if loss == 0.0:
            stop = "zero_loss"
            break
        A, g = _normal_equations(theta, h, u_tr, a, r)
        accepted = False
        singular = True
        while lam <= config.max_damping:
            try:
                step = np.linalg.solve(A + lam * eye, -g)
            except np.linalg.LinAlgError:
                lam *= config.damping_increase_factor
                continue
            singular = False
            candidate = theta + step
            new_a, new_r, new_loss = _evaluate(candidate, h, u_tr, t_tr)
            if math.isnan(new_loss):
                raise TrainingError("NaN training loss", epoch=epoch)
            if new_loss < loss:
                theta, a, r, loss = candidate, new_a, new_r, new_loss
                lam *= config.damping_decrease_factor
                accepted = True
                break
            lam *= config.damping_increase_factor
        if not accepted:
            if singular:
                raise TrainingError("singular normal equations at maximum damping",
                                    epoch=epoch)
            stop = "max_damping"
            break
        val = _evaluate(theta, h, u_va, t_va)[2]
        if math.isnan(val):
            raise TrainingError("NaN validation loss", epoch=epoch)
        history["train_mse"].append(loss)
        history["val_mse"].append(val)
        if val < best_val:
            best_theta, best_val, best_epoch = theta.copy(), val, epoch

    history["best_epoch"] = best_epoch
    history["stop_reason"] = stop
    W, b, v, c = _unpack(best_theta, h)
    model = FlowStressModel(
        input_weights=W,
        input_biases=b,
        output_weights=v,
        output_bias=c,
        input_normalization=norm_in,
        output_normalization=norm_out,
        training_seed=config.seed,
        history=history,
    )
    return model, history


def train(train_set, validation, config):
    """Train a flow-stress network; see :func:`train_with_history`."""
    return train_with_history(train_set, validation, config)[0]


# -- plane-strain yield ----------------------------------------------------

def shear_yield(true_stress):
    """Shear yield stress ``k = sigma / sqrt(3)`` [MPa]."""
    if np.any(np.asarray(true_stress) < 0):
        raise DomainError("true_stress must be >= 0")
    return true_stress / math.sqrt(3.0)


def flow_stress_at_thickness(model, reference_thickness, local_thickness, strain_rate,
                             return_flag=False):
    """Plane-strain flow stress ``2k`` [MPa] at a strip thickness.

    The strain is ``ln(reference_thickness / local_thickness)``; arrays of
    ``local_thickness`` are evaluated in one call.
    """
    local = np.asarray(local_thickness, float)
    if np.any(local <= 0):
        raise DomainError("local_thickness must be > 0")
    # round-off at the entry plane can put local a hair above reference
    if np.any(local > reference_thickness * (1.0 + 1e-9)):
        raise DomainError(
            f"local_thickness {np.max(local)!r} exceeds reference_thickness "
            f"{reference_thickness!r} (negative strain)"
        )
    strain = np.maximum(np.log(reference_thickness / local), 0.0)
    if strain.ndim == 0:
        strain = float(strain)
    sigma, flag = predict(model, strain, strain_rate, return_flag=True)
    two_k = 2.0 * shear_yield(np.maximum(sigma, 0.0))
    return (two_k, flag) if return_flag else two_k


# -- model file ------------------------------------------------------------

def _g(x):
    return format(float(x), ".17g")


def dumps_model(model):
    """Serialize a model to the versioned plain-text format."""
    lines = [
        MODEL_MAGIC,
        f"hidden_width {model.hidden_width}",
        f"training_seed {model.training_seed}",
        "features true_strain log10_strain_rate",
        "input_normalization " + " ".join(_g(x) for r in model.input_normalization for x in r),
        "output_normalization " + " ".join(_g(x) for x in model.output_normalization),
        "input_weights",
    ]
    lines += [" ".join(_g(x) for x in row) for row in model.input_weights]
    lines.append("input_biases")
    lines += [_g(x) for x in model.input_biases]
    lines.append("output_weights")
    lines += [_g(x) for x in model.output_weights]
    lines.append("output_bias")
    lines.append(_g(model.output_bias))
    return "\n".join(lines) + "\n"


def loads_model(text):
    """Parse the text produced by :func:`dumps_model`."""
    lines = text.splitlines()
    pos = 0

    def take(expected_key=None, n_values=None):
        nonlocal pos
        if pos >= len(lines):
            raise ParseError("unexpected end of model file", line=pos + 1)
        parts = lines[pos].split()
        pos += 1
        if expected_key is not None:
            if not parts or parts[0] != expected_key:
                raise ParseError(f"expected {expected_key!r}", line=pos)
            parts = parts[1:]
        if n_values is not None and len(parts) != n_values:
            raise ParseError(f"expected {n_values} values, got {len(parts)}", line=pos)
        return parts

    def floats(parts):
        try:
            return [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=pos) from None

    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise ParseError(f"missing magic line {MODEL_MAGIC!r}", line=1)
    pos = 1
    try:
        h = int(take("hidden_width", 1)[0])
        seed = int(take("training_seed", 1)[0])
    except ValueError as exc:
        raise ParseError(str(exc), line=pos) from None
    if h < 1:
        raise ParseError("hidden_width must be >= 1", line=2)
    take("features", 2)
    nin = floats(take("input_normalization", 4))
    nout = floats(take("output_normalization", 2))
    take("input_weights", 0)
    W = [floats(take(None, 2)) for _ in range(h)]
    take("input_biases", 0)
    b = [floats(take(None, 1))[0] for _ in range(h)]
    take("output_weights", 0)
    v = [floats(take(None, 1))[0] for _ in range(h)]
    take("output_bias", 0)
    c = floats(take(None, 1))[0]
    try:
        return FlowStressModel(
            input_weights=W,
            input_biases=b,
            output_weights=v,
            output_bias=c,
            input_normalization=((nin[0], nin[1]), (nin[2], nin[3])),
            output_normalization=(nout[0], nout[1]),
            training_seed=seed,
        )
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def save_model(model, path):
    """Write ``model`` to ``path`` atomically."""
    from ._io import atomic_write_text

    atomic_write_text(path, dumps_model(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
