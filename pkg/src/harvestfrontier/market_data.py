"""Market records: parsing, daily aggregation and descriptive statistics.

Mass and money are carried as :class:`decimal.Decimal` with three fractional
places so that daily totals add up exactly to the record totals.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, localcontext
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import HarvestError, HeaderError, RecordError, UndefinedRatioError, UnknownSpeciesError

RECORD_HEADER = ("date", "species", "count", "mass_kg", "price", "method",
                 "origin", "condition", "age", "sex")
SPECIES_HEADER = ("species", "guild", "mean_mass_kg", "lambda_max",
                  "density_per_km2", "longevity_class")
DAILY_HEADER = ("region", "date", "arboreal_kg", "ground_kg", "arboreal_revenue",
                "ground_revenue", "carcass_count")

METHODS = frozenset({"shotgun", "snare", "unknown"})
CONDITIONS = frozenset({"alive", "fresh", "smoked", "unknown"})
AGES = frozenset({"adult", "immature", "unknown"})
SEXES = frozenset({"male", "female", "unknown"})
GUILDS = frozenset({"arboreal", "ground"})
LONGEVITY = frozenset({"short", "medium", "long"})

QUANTUM = Decimal("0.001")
ZERO = Decimal(0)


def to_decimal(value) -> Decimal:
    """Coerce ints, strings, floats (via their repr) and Decimals to Decimal."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


def to_fixed(value) -> Decimal:
    return to_decimal(value).quantize(QUANTUM)


@dataclass(frozen=True)
class HarvestRecord:
    date: dt.date
    species: str
    count: int
    mass_kg: Decimal
    price: Decimal
    method: str = "unknown"
    origin: str = ""
    condition: str = "unknown"
    age: str = "unknown"
    sex: str = "unknown"
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SpeciesProfile:
    species: str
    guild: str
    mean_mass_kg: Decimal
    lambda_max: Decimal
    density_per_km2: Decimal
    longevity_class: str

    def __post_init__(self):
        if self.guild not in GUILDS:
            raise HarvestError(f"species {self.species!r}: guild must be one of {sorted(GUILDS)}")
        if self.lambda_max < 1:
            raise HarvestError(f"species {self.species!r}: lambda_max must be >= 1")
        if self.density_per_km2 < 0:
            raise HarvestError(f"species {self.species!r}: density_per_km2 must be >= 0")
        if self.longevity_class not in LONGEVITY:
            raise HarvestError(f"species {self.species!r}: unknown longevity_class {self.longevity_class!r}")


@dataclass(frozen=True)
class DailyTakeoff:
    date: dt.date
    region: str
    arboreal_kg: Decimal = ZERO
    ground_kg: Decimal = ZERO
    arboreal_revenue: Decimal = ZERO
    ground_revenue: Decimal = ZERO
    carcass_count: int = 0

    @property
    def total_kg(self) -> Decimal:
        return self.arboreal_kg + self.ground_kg

    @property
    def year(self) -> int:
        return self.date.year


@dataclass(frozen=True)
class PriceSystem:
    """Unit prices of ground and arboreal output (currency per kg)."""

    p_ground: float
    p_arboreal: float

    def __post_init__(self):
        for name in ("p_ground", "p_arboreal"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise HarvestError(f"{name} must be a positive finite number, got {value}")
            object.__setattr__(self, name, value)

    @property
    def ratio(self) -> float:
        """P_G / P_A."""
        return self.p_ground / self.p_arboreal


def _check_header(header, expected, what):
    if header is None:
        raise HeaderError(f"{what}: empty input, expected header {','.join(expected)}")
    header = tuple(h.strip() for h in header)
    if header == expected:
        return
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    if missing:
        raise HeaderError(f"{what}: missing column(s) {', '.join(missing)}")
    if extra:
        raise HeaderError(f"{what}: unexpected column(s) {', '.join(extra)}")
    raise HeaderError(f"{what}: columns out of order, expected {','.join(expected)}")


def _fixed_field(text, name, line):
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise RecordError(line, f"{name} {text!r} is not a number") from None
    if not value.is_finite():
        raise RecordError(line, f"{name} must be finite")
    if value != value.quantize(QUANTUM):
        raise RecordError(line, f"{name} {text!r} has more than 3 decimal places")
    return value.quantize(QUANTUM)


def _enum_field(text, allowed, name, line):
    text = text.strip() or "unknown"
    if text not in allowed:
        raise RecordError(line, f"{name} {text!r} not in {sorted(allowed)}")
    return text


def _parse_record(row, line) -> HarvestRecord:
    if len(row) != len(RECORD_HEADER):
        raise RecordError(line, f"expected {len(RECORD_HEADER)} fields, got {len(row)}")
    date_s, species, count_s, mass_s, price_s, method, origin, condition, age, sex = row
    try:
        date = dt.date.fromisoformat(date_s.strip())
    except ValueError:
        raise RecordError(line, f"date {date_s!r} is not ISO-8601 (YYYY-MM-DD)") from None
    species = species.strip()
    if not species:
        raise RecordError(line, "species is empty")
    try:
        count = int(count_s.strip())
    except ValueError:
        raise RecordError(line, f"count {count_s!r} is not an integer") from None
    if count < 1:
        raise RecordError(line, "count ≥ 1 violated")
    mass = _fixed_field(mass_s, "mass_kg", line)
    if mass <= 0:
        raise RecordError(line, "mass_kg > 0 violated")
    price = _fixed_field(price_s, "price", line)
    if price < 0:
        raise RecordError(line, "price ≥ 0 violated")
    origin = origin.strip()
    if not origin:
        raise RecordError(line, "origin is empty")
    return HarvestRecord(
        date=date, species=species, count=count, mass_kg=mass, price=price,
        method=_enum_field(method, METHODS, "method", line),
        origin=origin,
        condition=_enum_field(condition, CONDITIONS, "condition", line),
        age=_enum_field(age, AGES, "age", line),
        sex=_enum_field(sex, SEXES, "sex", line),
        line=line,
    )


def parse_records(stream: TextIO) -> tuple[list[HarvestRecord], list[RecordError]]:
    """Read market records from CSV.

    Malformed rows do not stop the parse: they come back as
    :class:`RecordError` values (with their line numbers) alongside the good
    records, which keep input order. A missing or wrong header raises
    :class:`HeaderError`.
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    _check_header(header, RECORD_HEADER, "records")
    records, errors = [], []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            records.append(_parse_record(row, reader.line_num))
        except RecordError as exc:
            errors.append(exc)
    return records, errors


def parse_species(stream: TextIO) -> dict[str, SpeciesProfile]:
    reader = csv.reader(stream)
    _check_header(next(reader, None), SPECIES_HEADER, "species")
    table = {}
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        line = reader.line_num
        if len(row) != len(SPECIES_HEADER):
            raise RecordError(line, f"expected {len(SPECIES_HEADER)} fields, got {len(row)}")
        name, guild, mass, lam, density, longevity = (c.strip() for c in row)
        try:
            profile = SpeciesProfile(name, guild, Decimal(mass), Decimal(lam), Decimal(density), longevity)
        except InvalidOperation:
            raise RecordError(line, "non-numeric species parameter") from None
        except HarvestError as exc:
            raise RecordError(line, str(exc)) from None
        if name in table:
            raise RecordError(line, f"duplicate species {name!r}")
        table[name] = profile
    return table


def _guild_of(record, species):
    try:
        return species[record.species].guild
    except KeyError:
        where = f" (line {record.line})" if record.line is not None else ""
        raise UnknownSpeciesError(f"unknown species {record.species!r}{where}") from None


def aggregate_daily(records: Iterable[HarvestRecord],
                    species: Mapping[str, SpeciesProfile]) -> list[DailyTakeoff]:
    """Sum records into one :class:`DailyTakeoff` per (date, region), sorted by (region, date)."""
    acc = defaultdict(lambda: [ZERO, ZERO, ZERO, ZERO, 0])
    for rec in records:
        guild = _guild_of(rec, species)
        slot = acc[(rec.origin, rec.date)]
        if guild == "arboreal":
            slot[0] += rec.mass_kg
            slot[2] += rec.price
        else:
            slot[1] += rec.mass_kg
            slot[3] += rec.price
        slot[4] += rec.count
    return [
        DailyTakeoff(date=date, region=region, arboreal_kg=v[0], ground_kg=v[1],
                     arboreal_revenue=v[2], ground_revenue=v[3], carcass_count=v[4])
        for (region, date), v in sorted(acc.items())
    ]


def _guild_totals(records, species):
    kg = {"arboreal": ZERO, "ground": ZERO}
    revenue = {"arboreal": ZERO, "ground": ZERO}
    for rec in records:
        guild = _guild_of(rec, species)
        kg[guild] += rec.mass_kg
        revenue[guild] += rec.price
    return kg, revenue


def _unit_price_ratio(kg, revenue):
    for guild in ("ground", "arboreal"):
        if kg[guild] <= 0:
            raise UndefinedRatioError(f"ratio undefined: no {guild} biomass")
    if revenue["arboreal"] <= 0:
        raise UndefinedRatioError("ratio undefined: arboreal unit price is zero")
    with localcontext() as ctx:
        ctx.prec = 34
        return (revenue["ground"] / kg["ground"]) / (revenue["arboreal"] / kg["arboreal"])


def weighted_price_ratio(records: Sequence[HarvestRecord],
                         species: Mapping[str, SpeciesProfile]) -> Decimal:
    """Biomass-weighted unit price of ground output over arboreal output."""
    kg, revenue = _guild_totals(records, species)
    return _unit_price_ratio(kg, revenue)


def carcass_weighted_price_ratio(records: Sequence[HarvestRecord],
                                 species: Mapping[str, SpeciesProfile]) -> Decimal:
    """Alternative weighting: every carcass's unit price counts once."""
    with localcontext() as ctx:
        ctx.prec = 34
        sums = {"arboreal": ZERO, "ground": ZERO}
        counts = {"arboreal": 0, "ground": 0}
        for rec in records:
            guild = _guild_of(rec, species)
            sums[guild] += rec.count * (rec.price / rec.mass_kg)
            counts[guild] += rec.count
        for guild in ("ground", "arboreal"):
            if counts[guild] == 0:
                raise UndefinedRatioError(f"ratio undefined: no {guild} carcasses")
        if sums["arboreal"] == 0:
            raise UndefinedRatioError("ratio undefined: arboreal unit price is zero")
        return (sums["ground"] / counts["ground"]) / (sums["arboreal"] / counts["arboreal"])


def unit_prices(daily: Iterable[DailyTakeoff]) -> PriceSystem:
    """Biomass-weighted per-kg prices over a set of days."""
    kg = {"arboreal": ZERO, "ground": ZERO}
    revenue = {"arboreal": ZERO, "ground": ZERO}
    for day in daily:
        kg["arboreal"] += day.arboreal_kg
        kg["ground"] += day.ground_kg
        revenue["arboreal"] += day.arboreal_revenue
        revenue["ground"] += day.ground_revenue
    for guild in ("ground", "arboreal"):
        if kg[guild] <= 0 or revenue[guild] <= 0:
            raise UndefinedRatioError(f"price undefined: no {guild} sales")
    with localcontext() as ctx:
        ctx.prec = 34
        return PriceSystem(p_ground=float(revenue["ground"] / kg["ground"]),
                           p_arboreal=float(revenue["arboreal"] / kg["arboreal"]))


def deflate_revenue(nominal, years_elapsed: int, annual_rate) -> Decimal:
    """Real value of ``nominal`` after ``years_elapsed`` years of compound inflation.

    The result is not rounded; quantize with :func:`to_fixed` for output.
    """
    if isinstance(years_elapsed, bool) or int(years_elapsed) != years_elapsed or years_elapsed < 0:
        raise HarvestError(f"years_elapsed must be a nonnegative integer, got {years_elapsed!r}")
    rate = to_decimal(annual_rate)
    if rate <= -1:
        raise HarvestError("annual_rate must exceed -1")
    with localcontext() as ctx:
        ctx.prec = 34
        return to_decimal(nominal) / (1 + rate) ** int(years_elapsed)


def inflate_revenue(real, years_elapsed: int, annual_rate) -> Decimal:
    """Inverse of :func:`deflate_revenue`."""
    rate = to_decimal(annual_rate)
    if rate <= -1:
        raise HarvestError("annual_rate must exceed -1")
    with localcontext() as ctx:
        ctx.prec = 34
        return to_decimal(real) * (1 + rate) ** int(years_elapsed)


def _days_in(daily, period):
    days = [d for d in daily if d.date.year == period]
    if not days:
        raise HarvestError(f"no daily takeoff in {period}")
    return days


def regional_share(daily: Iterable[DailyTakeoff], region_set: Iterable[str], period: int) -> Decimal:
    """Fraction of the period's total biomass that came from ``region_set``."""
    regions = set(region_set)
    days = _days_in(daily, period)
    total = sum((d.total_kg for d in days), ZERO)
    if total == 0:
        raise UndefinedRatioError(f"share undefined: zero biomass in {period}")
    part = sum((d.total_kg for d in days if d.region in regions), ZERO)
    with localcontext() as ctx:
        ctx.prec = 34
        return part / total


def mean_daily_biomass(daily: Iterable[DailyTakeoff], period: int) -> tuple[Decimal, Decimal]:
    """Mean (arboreal, ground) kg per market day in a year, all regions pooled.

    A market day is any date with at least one recorded carcass.
    """
    days = _days_in(daily, period)
    n = len({d.date for d in days})
    with localcontext() as ctx:
        ctx.prec = 34
        return (sum((d.arboreal_kg for d in days), ZERO) / n,
                sum((d.ground_kg for d in days), ZERO) / n)


def write_daily_csv(daily: Iterable[DailyTakeoff], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(DAILY_HEADER)
    for d in daily:
        writer.writerow([d.region, d.date.isoformat(), f"{d.arboreal_kg:.3f}", f"{d.ground_kg:.3f}",
                         f"{d.arboreal_revenue:.3f}", f"{d.ground_revenue:.3f}", d.carcass_count])


def read_daily_csv(stream: TextIO) -> list[DailyTakeoff]:
    reader = csv.reader(stream)
    _check_header(next(reader, None), DAILY_HEADER, "daily")
    out = []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != len(DAILY_HEADER):
            raise RecordError(line, f"expected {len(DAILY_HEADER)} fields, got {len(row)}")
        region, date_s, *amounts, count_s = (c.strip() for c in row)
        try:
            date = dt.date.fromisoformat(date_s)
            values = [Decimal(v) for v in amounts]
            count = int(count_s)
        except (ValueError, InvalidOperation):
            raise RecordError(line, "malformed daily row") from None
        if any(not v.is_finite() or v < 0 for v in values) or count < 0:
            raise RecordError(line, "daily quantities must be nonnegative")
        out.append(DailyTakeoff(date, region, *values, carcass_count=count))
    return out
