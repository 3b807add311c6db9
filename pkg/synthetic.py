# synthetic.py
"""
Seeded synthetic aquifer used as an end-to-end fixture.

The aggregated level is a seasonal drawdown (low in the warm irrigation
season), a recharge term driven by standardized precipitation and AR(1)
noise. Three wells sit at different bases around that signal; climate
may run past the last well month so forecasts have future inputs.
"""

import logging
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from utils.data import format_months
from utils.numerics import rng_from_seed

logger = logging.getLogger(__name__)

MONTHS = 175
START_MONTH = "2005-01"
SEASONAL_AMPLITUDE = 2.0
RECHARGE_GAIN = 0.3
NOISE_PHI = 0.5
NOISE_SIGMA = 0.17
WELL_NOISE_SIGMA = 0.02

# (well_id, base level m a.s.l., impact weight)
WELLS = [
    ("W01", 1640.0, 2.0),
    ("W02", 1650.0, 1.0),
    ("W03", 1660.0, 1.0),
]


def generate(months: int = MONTHS, seed: int = 42, extra_climate_months: int = 0) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Wells and climate frames in the ingestion CSV schemas"""
    gen = rng_from_seed(seed).generator
    total = months + extra_climate_months
    phase = 2.0 * np.pi * np.arange(total) / 12.0

    temperature = 15.0 + 10.0 * np.sin(phase) + gen.normal(0.0, 0.5, total)
    precipitation = np.maximum(0.0, 20.0 + 18.0 * np.cos(phase) + gen.normal(0.0, 6.0, total))
    observed = precipitation[:months]
    recharge = RECHARGE_GAIN * (observed - observed.mean()) / observed.std()

    noise = np.empty(months)
    noise[0] = gen.normal(0.0, NOISE_SIGMA / np.sqrt(1.0 - NOISE_PHI ** 2))
    for t in range(1, months):
        noise[t] = NOISE_PHI * noise[t - 1] + gen.normal(0.0, NOISE_SIGMA)
    level = -SEASONAL_AMPLITUDE * np.sin(phase[:months]) + recharge + noise

    start = np.datetime64(START_MONTH, "M")
    dates = format_months(np.arange(start, start + total))

    climate = pd.DataFrame({
        "date": dates,
        "temp_c": temperature,
        "precip_mm": precipitation,
    })
    frames = []
    for well_id, base, weight in WELLS:
        frames.append(pd.DataFrame({
            "well_id": well_id,
            "date": dates[:months],
            "level_masl": base + level + gen.normal(0.0, WELL_NOISE_SIGMA, months),
            "weight": weight,
        }))
    return pd.concat(frames, ignore_index=True), climate


def write_fixture(wells_path, climate_path, months: int = MONTHS, seed: int = 42, extra_climate_months: int = 0):
    wells, climate = generate(months, seed, extra_climate_months)
    for frame, path in ((wells, Path(wells_path)), (climate, Path(climate_path))):
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    logger.info(f"Wrote {months} months for {len(WELLS)} wells to {wells_path} and {len(climate)} climate months to {climate_path}")
