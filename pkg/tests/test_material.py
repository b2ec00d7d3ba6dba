import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollsim import material as m
from rollsim.errors import ConfigError, DomainError, ParseError, ValidationError


class IdentityModel:
    """Returns the strain as the stress, to observe what strain is requested."""

    def predict(self, true_strain, strain_rate, return_flag=False):
        out = true_strain
        return (out, False) if return_flag else out


# -- conversion -----------------------------------------------------------------

def test_convert_zero_extension():
    s = m.convert_raw(m.RawTensileRecord(0.001, 0.0, 240.0), 32.0, 24.0)
    assert s.true_strain == 0.0
    assert s.true_stress == pytest.approx(10.0, rel=1e-15)


def test_convert_forced_by_formulas():
    s = m.convert_raw(m.RawTensileRecord(0.001, 0.32, 2400.0), 32.0, 24.0)
    assert s.true_strain == pytest.approx(math.log(1.01), rel=1e-14)
    assert s.true_stress == pytest.approx(101.0, rel=1e-14)


@pytest.mark.parametrize(
    "field, record",
    [
        ("extension", dict(strain_rate=0.001, extension=-1.0, force=1.0)),
        ("force", dict(strain_rate=0.001, extension=1.0, force=float("nan"))),
        ("strain_rate", dict(strain_rate=0.0, extension=1.0, force=1.0)),
    ],
)
def test_invalid_raw_record_names_field(field, record):
    with pytest.raises(ValidationError, match=field):
        m.RawTensileRecord(**record)


def test_invalid_specimen_dimensions():
    rec = m.RawTensileRecord(0.001, 0.1, 10.0)
    with pytest.raises(ValidationError, match="gauge_length"):
        m.convert_raw(rec, 0.0, 24.0)
    with pytest.raises(ValidationError, match="cross_section"):
        m.convert_raw(rec, 32.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(
    ext=st.floats(0, 40, allow_nan=False),
    force=st.floats(0, 1e5, allow_nan=False),
    rate=st.sampled_from([0.00052, 0.001, 0.0052, 0.052]),
)
def test_conversion_round_trip(ext, force, rate):
    rec = m.RawTensileRecord(rate, ext, force)
    back = m.to_engineering(m.convert_raw(rec))
    assert back.extension == pytest.approx(ext, rel=1e-12, abs=1e-300)
    assert back.force == pytest.approx(force, rel=1e-12, abs=1e-300)


# -- dataset ingestion -----------------------------------------------------------

def test_load_converted_and_raw_variants():
    raw = io.StringIO("strain_rate_per_s,extension_mm,force_n\n0.001,0.32,2400\n")
    conv = io.StringIO("strain_rate_per_s,true_strain,true_stress_mpa\n0.001,0.1,300\n")
    (a,) = m.load_dataset(raw)
    (b,) = m.load_dataset(conv)
    assert a.true_stress == pytest.approx(101.0)
    assert (b.true_strain, b.strain_rate, b.true_stress) == (0.1, 0.001, 300.0)


def test_parse_error_reports_line_number():
    text = "strain_rate_per_s,true_strain,true_stress_mpa\n0.001,0.1,300\n0.001,abc,300\n"
    with pytest.raises(ParseError, match="line 3"):
        m.load_dataset(io.StringIO(text))


@pytest.mark.parametrize(
    "text",
    ["", "strain_rate_per_s,true_strain,true_stress_mpa\n", "a,b,c\n1,2,3\n"],
)
def test_empty_or_unknown_dataset(text):
    with pytest.raises(ParseError):
        m.load_dataset(io.StringIO(text))


def test_shipped_dataset_size(shipped_samples):
    assert len(shipped_samples) == 15858
    rates = sorted({s.strain_rate for s in shipped_samples})
    assert rates == [0.00052, 0.001, 0.0052, 0.052]


# -- splitting -------------------------------------------------------------------

def _toy(n):
    return [m.StressStrainSample(0.01 * i, 0.001, 300.0 + i) for i in range(n)]


def test_split_sizes_shipped(shipped_split):
    # floor(15858 * 0.15) = 2378 for validation and test; remainder trains
    assert [len(p) for p in shipped_split] == [11102, 2378, 2378]


def test_split_is_disjoint_partition(shipped_samples, shipped_split):
    ids = [id(s) for part in shipped_split for s in part]
    assert len(ids) == len(set(ids)) == len(shipped_samples)


def test_split_deterministic():
    data = _toy(10)
    cfg = m.TrainingConfig(seed=7)
    assert m.split_dataset(data, cfg) == m.split_dataset(data, cfg)


def test_split_bad_fractions():
    with pytest.raises(ConfigError):
        m.TrainingConfig(split_fractions=(0.5, 0.5, 0.5))


def test_split_needs_ten_samples():
    with pytest.raises(ValidationError):
        m.split_dataset(_toy(9), m.TrainingConfig())


# -- training and prediction ---------------------------------------------------------

def _grid(stress_fn, rates=(0.001, 0.01), n=60):
    out = []
    for r in rates:
        for e in np.linspace(0.0, 0.5, n):
            out.append(m.StressStrainSample(float(e), r, float(stress_fn(e, r))))
    return out


def test_constant_output_fit():
    data = _grid(lambda e, r: 500.0)
    cfg = m.TrainingConfig(seed=3, epochs=200)
    tr, va, _ = m.split_dataset(data, cfg)
    model, hist = m.train_with_history(tr, va, cfg)
    assert hist["val_mse"][hist["best_epoch"]] < 1e-12
    pred = model.predict(np.linspace(0, 0.5, 11), 0.005)
    assert np.max(np.abs(pred / 500.0 - 1)) < 1e-6


def test_identity_fit_single_rate():
    data = _grid(lambda e, r: 1000.0 * e, rates=(0.001,), n=200)
    cfg = m.TrainingConfig(seed=1, epochs=300)
    tr, va, _ = m.split_dataset(data, cfg)
    model = m.train(tr, va, cfg)
    assert model.predict(0.2, 0.001) == pytest.approx(200.0, rel=0.02)


def test_training_is_bitwise_deterministic():
    data = _grid(lambda e, r: 300 + 800 * e ** 0.5 + 1e3 * r)
    cfg = m.TrainingConfig(seed=11, epochs=40)
    tr, va, _ = m.split_dataset(data, cfg)
    a, b = m.train(tr, va, cfg), m.train(tr, va, cfg)
    assert m.dumps_model(a) == m.dumps_model(b)
    assert np.array_equal(a.input_weights, b.input_weights)


def test_best_validation_not_worse_than_initial(shipped_model):
    hist = shipped_model.history
    assert min(hist["val_mse"]) <= hist["val_mse"][0]
    assert hist["val_mse"][hist["best_epoch"]] == min(hist["val_mse"])


def test_interpolation_consistency(shipped_model, shipped_split):
    train_set, _, _ = shipped_split
    strain, rate, stress = m.samples_to_arrays(train_set)
    resid = np.sqrt(np.mean((shipped_model.predict(strain, rate) - stress) ** 2))
    s = train_set[123]
    assert abs(shipped_model.predict(s.true_strain, s.strain_rate) - s.true_stress) < 4 * resid


def test_prediction_near_dataset_sample(shipped_model, shipped_samples):
    # oracle: nearest measured sample at the same rate
    pts = [s for s in shipped_samples if s.strain_rate == 0.00052]
    nearest = min(pts, key=lambda s: abs(s.true_strain - 0.21))
    pred = shipped_model.predict(nearest.true_strain, 0.00052)
    assert pred == pytest.approx(nearest.true_stress, rel=0.05)


def test_prediction_is_pure(shipped_model):
    assert shipped_model.predict(0.3, 0.01) == shipped_model.predict(0.3, 0.01)


def test_extrapolation_flag(shipped_model):
    _, inside = shipped_model.predict(0.3, 0.01, return_flag=True)
    _, outside = shipped_model.predict(1.5, 0.01, return_flag=True)
    assert not inside and outside


def test_normalization_spans_training_data(shipped_model, shipped_split):
    train_set, _, _ = shipped_split
    strain, rate, _ = m.samples_to_arrays(train_set)
    u = shipped_model._normalize(strain, rate)
    assert u.min(axis=0) == pytest.approx([0.0, 0.0], abs=0)
    assert u.max(axis=0) == pytest.approx([1.0, 1.0], abs=1e-15)


def test_model_is_immutable(shipped_model):
    with pytest.raises(ValueError):
        shipped_model.input_weights[0, 0] = 1.0


def test_predict_rejects_nonpositive_rate(shipped_model):
    with pytest.raises(DomainError):
        shipped_model.predict(0.1, 0.0)


# -- model file -----------------------------------------------------------------

def test_model_file_round_trip(shipped_model, tmp_path):
    path = tmp_path / "m.fsm"
    m.save_model(shipped_model, path)
    text = path.read_text()
    assert text.splitlines()[0] == "ROLLSIM-FSM v1"
    back = m.load_model(path)
    assert m.dumps_model(back) == text
    x = np.linspace(0, 0.5, 7)
    assert np.array_equal(back.predict(x, 0.001), shipped_model.predict(x, 0.001))


def test_model_file_bad_magic():
    with pytest.raises(ParseError, match="line 1"):
        m.loads_model("NOT A MODEL\n")


def test_model_file_truncated(shipped_model):
    text = m.dumps_model(shipped_model)
    with pytest.raises(ParseError):
        m.loads_model("\n".join(text.splitlines()[:10]))


# -- shear yield ----------------------------------------------------------------------

@pytest.mark.parametrize("sigma, k", [(math.sqrt(3), 1.0), (0.0, 0.0), (600.0, 346.41016151377545)])
def test_shear_yield(sigma, k):
    assert m.shear_yield(sigma) == pytest.approx(k, rel=1e-14)


@given(st.floats(0, 1e4), st.floats(0, 1e3))
def test_shear_yield_linear(sigma, a):
    assert m.shear_yield(a * sigma) == pytest.approx(a * m.shear_yield(sigma), rel=1e-12, abs=1e-300)


def test_shear_yield_negative():
    with pytest.raises(DomainError):
        m.shear_yield(-1.0)


def test_flow_stress_at_reference_thickness():
    model = m.ConstantFlowStress(600.0)
    assert m.flow_stress_at_thickness(model, 4.0, 4.0, 0.052) == pytest.approx(
        2 * 600 / math.sqrt(3)
    )


def test_flow_stress_strain_argument():
    two_k = m.flow_stress_at_thickness(IdentityModel(), 4.0, 3.24, 0.052)
    assert two_k * math.sqrt(3) / 2 == pytest.approx(math.log(4 / 3.24), rel=1e-14)
    assert math.log(4 / 3.24) == pytest.approx(0.2107, abs=5e-5)


def test_flow_stress_negative_strain():
    with pytest.raises(DomainError):
        m.flow_stress_at_thickness(IdentityModel(), 4.0, 4.5, 0.052)
