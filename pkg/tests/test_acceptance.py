"""Acceptance criteria 1-9; each prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines
inline; the terminal summary repeats them in any run.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from rollsim import analytical, beam, material, pipeline, slab, surrogate
from rollsim.material import ConstantFlowStress

PASS1 = dict(entry_thickness=4.0, exit_thickness=3.24, roll_radius=75.0, friction=0.1)
# reference mean pressures [MPa], pass 1 then passes 2-7
REFERENCE_MEAN = [121, 236, 335, 418, 498, 575, 658]


@pytest.fixture(scope="module")
def timed_training():
    """One full training run from raw CSV, timed."""
    t0 = time.perf_counter()
    samples = surrogate.load_shipped()
    cfg = material.TrainingConfig(seed=0)
    train_set, val, test = material.split_dataset(samples, cfg)
    model = material.train(train_set, val, cfg)
    return model, test, time.perf_counter() - t0


@pytest.fixture(scope="module")
def schedule(timed_training, tmp_path_factory):
    model, _, _ = timed_training
    outdir = tmp_path_factory.mktemp("acceptance")
    t0 = time.perf_counter()
    reports = pipeline.run_schedule(pipeline.Config(), model, str(outdir))
    return outdir, reports, time.perf_counter() - t0


def _check(record, number, name, checks, elapsed, budget):
    checks = dict(checks)
    checks[f"runtime {elapsed * 1e3:.1f} ms < {budget * 1e3:.0f} ms"] = elapsed < budget
    passed = all(checks.values())
    failed = [k for k, ok in checks.items() if not ok]
    detail = "; ".join(checks) if passed else "failed: " + "; ".join(failed)
    record(number, name, passed, detail)
    assert passed, detail


def test_ac1_contact_angle(record_acceptance):
    t0 = time.perf_counter()
    alpha = math.degrees(slab.contact_angle(slab.RollPassGeometry(**PASS1)))
    dt = time.perf_counter() - t0
    _check(record_acceptance, 1, "contact angle",
           {f"alpha = {alpha:.4f} deg within 5.77 +- 0.01": abs(alpha - 5.77) <= 0.01}, dt, 1e-3)


def test_ac2_analytical_neutral(record_acceptance):
    t0 = time.perf_counter()
    alpha = slab.contact_angle(slab.RollPassGeometry(**PASS1))
    g = math.degrees(analytical.analytical_neutral_angle(alpha, 0.1))
    dt = time.perf_counter() - t0
    _check(record_acceptance, 2, "analytical neutral point",
           {f"gamma_n = {g:.4f} deg within 1.42 +- 0.02": abs(g - 1.42) <= 0.02}, dt, 1e-3)


def test_ac3_numerical_neutral(record_acceptance, timed_training):
    model, _, train_time = timed_training
    t0 = time.perf_counter()
    prof = slab.solve_pass(slab.RollPassGeometry(**PASS1, reference_thickness=4.0), model)
    dt = train_time + time.perf_counter() - t0
    phi, q = math.degrees(prof.neutral_angle), prof.neutral_pressure
    _check(record_acceptance, 3, "numerical neutral point", {
        f"phi_n = {phi:.4f} deg within 1.31 +- 0.15": abs(phi - 1.31) <= 0.15,
        f"q_n = {q:.1f} MPa within 896 +- 10%": abs(q - 896) <= 89.6,
    }, dt, 10.0)


def test_ac4_multipass_trend(record_acceptance, timed_training, schedule):
    _, _, train_time = timed_training
    _, reports, run_time = schedule
    means = [r.mean_pressure_mpa for r in reports]
    defl = [abs(r.max_deflection_m) for r in reports]
    rho7 = spearmanr(means, REFERENCE_MEAN)[0]
    rho6 = spearmanr(means[1:], REFERENCE_MEAN[1:])[0]
    _check(record_acceptance, 4, "multi-pass trend", {
        "mean pressure strictly increasing " + "/".join(f"{m:.0f}" for m in means):
            bool(np.all(np.diff(means) > 0)),
        "max deflection strictly increasing": bool(np.all(np.diff(defl) > 0)),
        f"Spearman rho = {rho7:g} (7 passes), {rho6:g} (passes 2-7)": rho7 == 1.0 and rho6 == 1.0,
    }, train_time + run_time, 30.0)


def test_ac5_fem_exactness(record_acceptance):
    t0 = time.perf_counter()
    spec = beam.BeamSpec()
    w = 1000.0
    load = beam.LoadCase(w, 0.0, spec.length)
    prof = beam.solve(spec, load)
    mid = int(np.argmin(np.abs(prof.node_positions - spec.length / 2)))
    exact = w * spec.length ** 4 / (384 * spec.flexural_stiffness)
    err = abs(prof.deflections[mid] - exact) / exact
    eq = abs(prof.reactions.sum() - load.total()) / load.total()
    dt = time.perf_counter() - t0
    _check(record_acceptance, 5, "FEM nodal exactness", {
        f"midspan error {err:.2e} <= 1e-9": err <= 1e-9,
        f"equilibrium error {eq:.2e} <= 1e-9": eq <= 1e-9,
        f"node at x = {prof.node_positions[mid]:g}": prof.node_positions[mid] == spec.length / 2,
    }, dt, 0.1)


def test_ac6_radius_study(record_acceptance, schedule):
    _, reports, _ = schedule
    w = reports[0].line_load_n_per_m
    t0 = time.perf_counter()
    out = {}
    for d in (0.15, 0.19):
        spec = beam.BeamSpec(diameter=d)
        out[d] = abs(beam.max_deflection(beam.solve(spec, beam.centered_load(spec, w)))[1])
    dt = time.perf_counter() - t0
    _check(record_acceptance, 6, "radius study", {
        f"W(0.19) = {out[0.19]:.3e} m < W(0.15) = {out[0.15]:.3e} m": out[0.19] < out[0.15],
    }, dt, 0.1)


def _random_geometries(n, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        h2 = rng.uniform(0.5, 5.0)
        h1 = h2 / (1 - rng.uniform(0.05, 0.4))
        R = rng.uniform(40.0, 300.0)
        alpha = math.sqrt((h1 - h2) / R)
        mu = rng.uniform(alpha, 0.6)
        yield slab.RollPassGeometry(h1, h2, roll_radius=R, friction=mu), rng.uniform(200, 1500)


def test_ac7_friction_hill_invariants(record_acceptance):
    t0 = time.perf_counter()
    peak_ok = mean_ok = mirror_ok = 0
    worst_mirror = 0.0
    cases = list(_random_geometries(50))
    for geom, sigma in cases:
        model = ConstantFlowStress(sigma)
        prof = slab.solve_pass(geom, model)
        _, q = slab.composite(prof)
        mean = slab.mean_pressure(prof)
        peak_ok += prof.neutral_pressure >= q.max() * (1 - 1e-12)
        mean_ok += q.min() <= mean <= q.max()

        # mu = 0: both marches add the same derivative 4kR phi/h, evaluated at
        # opposite step ends, so the branches are translates up to dphi*max(f)
        free = slab.RollPassGeometry(geom.entry_thickness, geom.exit_thickness,
                                     roll_radius=geom.roll_radius, friction=0.0)
        ex = slab.march_exit(free, model)
        _, en = slab.march_entry(free, model).ascending()
        phi = ex.angles
        f = 2 * sigma / math.sqrt(3) * 2 * free.roll_radius * phi / slab.thickness_at(free, phi)
        dphi = phi[1] - phi[0]
        defect = np.max(np.abs((ex.pressures - ex.pressures[0]) - (en - en[0])))
        bound = dphi * f.max()
        worst_mirror = max(worst_mirror, defect / bound)
        mirror_ok += defect <= bound * (1 + 1e-9)
    dt = time.perf_counter() - t0
    n = len(cases)
    _check(record_acceptance, 7, "friction-hill invariants", {
        f"composite peak at neutral point {peak_ok}/{n}": peak_ok == n,
        f"mean within profile range {mean_ok}/{n}": mean_ok == n,
        f"mu=0 branches mirror {mirror_ok}/{n} (defect <= {worst_mirror:.3f} x dphi*max f)":
            mirror_ok == n,
    }, dt, 5.0)


def test_ac8_material_model(record_acceptance, timed_training, shipped_model):
    model, test_set, train_time = timed_training
    t0 = time.perf_counter()
    # the session fixture is an independent training run with the same seed
    reproducible = material.dumps_model(model) == material.dumps_model(shipped_model)
    strain, rate, stress = material.samples_to_arrays(test_set)
    rmse = math.sqrt(np.mean((model.predict(strain, rate) - stress) ** 2))
    nrmse = rmse / (stress.max() - stress.min())

    grid = [material.StressStrainSample(float(e), r, 500.0)
            for r in (0.001, 0.01) for e in np.linspace(0, 0.5, 60)]
    cfg = material.TrainingConfig(seed=3, epochs=200)
    tr, va, _ = material.split_dataset(grid, cfg)
    const = material.train(tr, va, cfg)
    const_err = float(np.max(np.abs(const.predict(np.linspace(0, 0.5, 11), 0.005) / 500.0 - 1)))
    dt = train_time + time.perf_counter() - t0
    _check(record_acceptance, 8, "material model", {
        "byte-reproducible model file": reproducible,
        f"test NRMSE {nrmse:.4f} < 0.05": nrmse < 0.05,
        f"constant fit error {const_err:.1e} <= 1e-6": const_err <= 1e-6,
    }, dt, 10.0)


def test_ac9_analytical_vs_numerical(record_acceptance, timed_training, schedule):
    _, _, train_time = timed_training
    outdir, _, run_time = schedule
    t0 = time.perf_counter()
    rows = pipeline.compare_command(pipeline.Config(), str(outdir))
    dt = train_time + run_time + time.perf_counter() - t0
    strain, ana, num = (np.array(c) for c in zip(*rows))
    gap = np.abs(num - ana)
    _check(record_acceptance, 9, "analytical vs numerical", {
        "strain increasing": bool(np.all(np.diff(strain) > 0)),
        "analytical increasing": bool(np.all(np.diff(ana) > 0)),
        "numerical increasing": bool(np.all(np.diff(num) > 0)),
        f"gap increasing {gap[0]:.2e} -> {gap[-1]:.2e} m": bool(np.all(np.diff(gap) > 0)),
    }, dt, 30.0)
