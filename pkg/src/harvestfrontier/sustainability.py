"""Sustainable-yield indices and excess takeoff.

Two standard families:

* Robinson & Redford: production ``P = c * K * area * (lambda_max - 1)``,
  sustainable harvest ``H = F * P`` (``c`` defaults to 0.6).
* Potential biological removal (US NMFS):
  ``PBR = c * (lambda_max - 1) * n_min * Fr`` (``c`` defaults to 0.5).

Excess takeoff is reported as ``(actual / sustainable - 1) * 100``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

from .errors import HarvestError, HeaderError, RecordError

RR_PRODUCTION_COEFFICIENT = 0.6
PBR_COEFFICIENT = 0.5
EXCESS_DEFINITION = "(actual / sustainable - 1) * 100"

INPUT_HEADER = ("species", "actual_takeoff", "area_km2", "density_lower", "density_upper",
                "lambda_max", "harvest_fraction", "n_min_lower", "n_min_upper", "recovery_factor")
OUTPUT_HEADER = ("species", "varied", "msy_rr_lower", "msy_rr_upper", "msy_pbr_lower",
                 "msy_pbr_upper", "excess_rr_lower_pct", "excess_rr_upper_pct",
                 "excess_pbr_lower_pct", "excess_pbr_upper_pct")


@dataclass(frozen=True)
class SustainabilityInputs:
    species: str
    actual_takeoff: float
    area_km2: float
    density_per_km2: float
    lambda_max: float
    harvest_fraction: float
    n_min: float
    recovery_factor: float

    def __post_init__(self):
        if self.lambda_max < 1:
            raise HarvestError(f"{self.species}: lambda_max must be >= 1")
        if self.actual_takeoff < 0:
            raise HarvestError(f"{self.species}: actual_takeoff must be nonnegative")
        for name in ("area_km2", "density_per_km2", "n_min"):
            if not getattr(self, name) > 0:
                raise HarvestError(f"{self.species}: {name} must be positive")
        for name in ("harvest_fraction", "recovery_factor"):
            if not 0 < getattr(self, name) <= 1:
                raise HarvestError(f"{self.species}: {name} must lie in (0, 1]")


@dataclass(frozen=True)
class SustainabilityAssessment:
    species: str
    msy_rr: float
    msy_pbr: float
    excess_rr_pct: float
    excess_pbr_pct: float


def rr_sustainable_harvest(inputs: SustainabilityInputs,
                           production_coefficient: float = RR_PRODUCTION_COEFFICIENT) -> float:
    production = (production_coefficient * inputs.density_per_km2 * inputs.area_km2
                  * (inputs.lambda_max - 1))
    return inputs.harvest_fraction * production


def nmfs_pbr(inputs: SustainabilityInputs, coefficient: float = PBR_COEFFICIENT) -> float:
    return coefficient * (inputs.lambda_max - 1) * inputs.n_min * inputs.recovery_factor


def excess_percent(actual: float, sustainable: float) -> float:
    """Percent by which ``actual`` exceeds ``sustainable``.

    A zero sustainable level gives ``inf`` for any positive takeoff and 0 for
    none.
    """
    if sustainable < 0:
        raise HarvestError("sustainable level must be nonnegative")
    if sustainable == 0:
        return math.inf if actual > 0 else 0.0
    return 100.0 * (actual - sustainable) / sustainable


def assess(inputs: SustainabilityInputs, rr_coefficient: float = RR_PRODUCTION_COEFFICIENT,
           pbr_coefficient: float = PBR_COEFFICIENT) -> SustainabilityAssessment:
    msy_rr = rr_sustainable_harvest(inputs, rr_coefficient)
    msy_pbr = nmfs_pbr(inputs, pbr_coefficient)
    return SustainabilityAssessment(
        species=inputs.species, msy_rr=msy_rr, msy_pbr=msy_pbr,
        excess_rr_pct=excess_percent(inputs.actual_takeoff, msy_rr),
        excess_pbr_pct=excess_percent(inputs.actual_takeoff, msy_pbr),
    )


@dataclass(frozen=True)
class BoundedAssessment:
    """Lower/upper pair, labelled by which input was varied."""

    species: str
    varied: str
    lower: SustainabilityAssessment
    upper: SustainabilityAssessment


def assess_bounds(base: SustainabilityInputs, varied: str, lower: dict, upper: dict,
                  rr_coefficient: float = RR_PRODUCTION_COEFFICIENT,
                  pbr_coefficient: float = PBR_COEFFICIENT) -> BoundedAssessment:
    """Assess ``base`` twice, with the ``lower`` and ``upper`` field overrides.

    ``varied`` names the bounded quantity ("population", "harvest_fraction", ...).
    """
    return BoundedAssessment(
        species=base.species, varied=varied,
        lower=assess(replace(base, **lower), rr_coefficient, pbr_coefficient),
        upper=assess(replace(base, **upper), rr_coefficient, pbr_coefficient),
    )


def parse_inputs(stream: TextIO) -> list[tuple[SustainabilityInputs, dict, dict]]:
    """Read the bounded-inputs CSV into (base, lower overrides, upper overrides) triples."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != INPUT_HEADER:
        raise HeaderError(f"sustainability inputs: expected header {','.join(INPUT_HEADER)}")
    rows = []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != len(INPUT_HEADER):
            raise RecordError(line, f"expected {len(INPUT_HEADER)} fields, got {len(row)}")
        species, *numbers = (c.strip() for c in row)
        try:
            (actual, area, d_lo, d_hi, lam, frac, n_lo, n_hi, fr) = (float(x) for x in numbers)
        except ValueError:
            raise RecordError(line, "non-numeric sustainability input") from None
        try:
            base = SustainabilityInputs(species, actual, area, d_lo, lam, frac, n_lo, fr)
            replace(base, density_per_km2=d_hi, n_min=n_hi)  # validates the upper bounds
        except HarvestError as exc:
            raise RecordError(line, str(exc)) from None
        rows.append((base, {"density_per_km2": d_lo, "n_min": n_lo},
                     {"density_per_km2": d_hi, "n_min": n_hi}))
    return rows


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def write_assessments(results: Iterable[BoundedAssessment], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(OUTPUT_HEADER)
    for r in results:
        writer.writerow([r.species, r.varied,
                         _fmt(r.lower.msy_rr), _fmt(r.upper.msy_rr),
                         _fmt(r.lower.msy_pbr), _fmt(r.upper.msy_pbr),
                         _fmt(r.lower.excess_rr_pct), _fmt(r.upper.excess_rr_pct),
                         _fmt(r.lower.excess_pbr_pct), _fmt(r.upper.excess_pbr_pct)])
