"""Synthetic stand-in for the Stress316L tensile dataset.

The measured dataset is not redistributed with this package. This module
generates raw tensile records (extension [mm], force [N]) with the same
layout and size: four strain rates, 15,858 rows, ASTM E8 sub-size
specimens (32 mm gauge, 24 mm^2 section).

The flow curve is a Swift law with a power-law rate factor,

    sigma = K * (eps0 + eps)**n * (rate / REF_RATE)**m

using typical annealed 316L properties: 0.2% proof stress about 290 MPa,
ultimate tensile strength about 580 MPa at a uniform elongation of about
55%, for which Considere's condition gives n ~ 0.44 and K ~ 1290 MPa.
Only the uniform-elongation part of each test is emitted. A 1% Gaussian
multiplicative scatter stands in for measurement error.
"""

import io
from importlib import resources

import numpy as np

from .material import CROSS_SECTION_MM2, GAUGE_LENGTH_MM, RAW_HEADER, load_dataset

SWIFT_K = 1290.0  # MPa
SWIFT_N = 0.44
PROOF_STRESS = 290.0  # MPa, flow stress at zero plastic strain
SWIFT_EPS0 = (PROOF_STRESS / SWIFT_K) ** (1.0 / SWIFT_N)
RATE_EXPONENT = 0.012
REF_RATE = 0.001  # 1/s
SCATTER = 0.01
SEED = 316

# rows per test; sums to the 15,858 samples of Stress316L
ROWS_PER_RATE = {0.00052: 4410, 0.001: 4020, 0.0052: 3828, 0.052: 3600}

SHIPPED_RAW = "stress316l_surrogate_raw.csv"


def swift_stress(true_strain, strain_rate):
    """Noise-free surrogate flow stress [MPa]."""
    return (
        SWIFT_K
        * (SWIFT_EPS0 + np.asarray(true_strain, float)) ** SWIFT_N
        * (np.asarray(strain_rate, float) / REF_RATE) ** RATE_EXPONENT
    )


def generate_raw(seed=SEED, rows_per_rate=None):
    """Return ``(rate, extension_mm, force_n)`` arrays of surrogate raw data."""
    rows_per_rate = ROWS_PER_RATE if rows_per_rate is None else rows_per_rate
    rng = np.random.default_rng(seed)
    e_max = np.expm1(SWIFT_N)  # Considere: uniform true strain equals n
    rates, ext, force = [], [], []
    for rate, n in rows_per_rate.items():
        e = np.linspace(0.0, e_max, n)
        sigma = swift_stress(np.log1p(e), rate) * (1.0 + SCATTER * rng.standard_normal(n))
        rates.append(np.full(n, rate))
        ext.append(np.round(e * GAUGE_LENGTH_MM, 5))
        force.append(np.round(sigma / (1.0 + e) * CROSS_SECTION_MM2, 2))
    return np.concatenate(rates), np.concatenate(ext), np.concatenate(force)


def raw_csv_text(seed=SEED, rows_per_rate=None):
    """Surrogate dataset in the raw CSV layout accepted by ``load_dataset``."""
    rate, ext, force = generate_raw(seed, rows_per_rate)
    out = io.StringIO()
    out.write(",".join(RAW_HEADER) + "\n")
    for r, x, f in zip(rate, ext, force):
        out.write(f"{r:g},{x:.5f},{f:.2f}\n")
    return out.getvalue()


def shipped_dataset_path():
    """Filesystem path of the packaged surrogate raw CSV."""
    return resources.files("rollsim").joinpath("data", SHIPPED_RAW)


def load_shipped():
    """Load the packaged surrogate dataset as true stress/strain samples."""
    with resources.as_file(shipped_dataset_path()) as path:
        return load_dataset(path)
