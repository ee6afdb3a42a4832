"""Command-line entry point.

Verbs: ``ingest``, ``efficiency``, ``simulate``, ``sustainability`` and
``report``. Exit status is 0 on success, 1 on a data or model error and 2 on
a usage error. Every verb accepts ``--config FILE`` (TOML); values given as
flags override the file, which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import efficiency as eff
from . import market_data as md
from . import production_model as pm
from . import sustainability as sus
from .errors import HarvestError
from .svg import emit_svg, frontier_scatter_spec, population_path_spec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

VERBS = ("ingest", "efficiency", "simulate", "sustainability", "report")

# Baseline parameter set used when nothing else is given.
MODEL_DEFAULTS = {"alpha": 0.02, "gamma": 0.04, "a": 0.019, "g": 0.02, "s": 0.5,
                  "labor": 1.0, "exp_a": 2.0, "exp_g": 1.9, "t_max": 100.0, "steps": 100}
DEFAULTS = {**MODEL_DEFAULTS, "pooling": "region-year", "strict": False,
            "rr_coefficient": sus.RR_PRODUCTION_COEFFICIENT,
            "pbr_coefficient": sus.PBR_COEFFICIENT}
# Keys a config file may set; anything else is rejected.
CONFIG_TYPES = {**{k: float for k in MODEL_DEFAULTS}, "steps": int, "p_ground": float,
                "p_arboreal": float, "pooling": str, "strict": bool,
                "rr_coefficient": float, "pbr_coefficient": float}

SUMMARY_HEADER = ("region", "year", "n_days", "mean_technical", "sd_technical", "t_technical",
                  "mean_allocative", "sd_allocative", "t_allocative")
PATH_HEADER = ("t", "arboreal_index", "ground_index")


class UsageError(Exception):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


@dataclass
class Command:
    verb: str
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="harvestfrontier", description="Bioeconomic harvest efficiency toolkit.")
    sub = parser.add_subparsers(dest="verb", metavar="{" + ",".join(VERBS) + "}", parser_class=_Parser)
    S = argparse.SUPPRESS

    def verb(name, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=S)
        p.add_argument("--config", help="TOML file with parameter values")
        return p

    def model_flags(p):
        for flag, dest in (("--alpha", "alpha"), ("--gamma", "gamma"), ("--a", "a"), ("--g", "g"),
                           ("--s", "s"), ("--labor", "labor"), ("--exp-a", "exp_a"),
                           ("--exp-g", "exp_g"), ("--t-max", "t_max")):
            p.add_argument(flag, dest=dest, type=float)
        p.add_argument("--steps", type=int)

    def price_flags(p):
        p.add_argument("--p-ground", dest="p_ground", type=float)
        p.add_argument("--p-arboreal", dest="p_arboreal", type=float)
        p.add_argument("--pooling", choices=eff.POOLINGS)

    def coefficient_flags(p):
        p.add_argument("--rr-coefficient", dest="rr_coefficient", type=float)
        p.add_argument("--pbr-coefficient", dest="pbr_coefficient", type=float)

    p = verb("ingest", "aggregate market records into daily takeoff")
    p.add_argument("--records", required=True)
    p.add_argument("--species", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")

    p = verb("efficiency", "frontier, radial projection and inefficiency decomposition")
    p.add_argument("--daily", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.add_argument("--svg")
    p.add_argument("--region", action="append")
    p.add_argument("--year", action="append", type=int)
    price_flags(p)

    p = verb("simulate", "population paths under harvest pressure")
    model_flags(p)
    p.add_argument("--out")
    p.add_argument("--svg")

    p = verb("sustainability", "excess takeoff relative to sustainable yield")
    p.add_argument("--inputs", required=True)
    p.add_argument("--out", required=True)
    coefficient_flags(p)

    p = verb("report", "run the full pipeline and write a manifest")
    p.add_argument("--records", required=True)
    p.add_argument("--species", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--sustainability")
    model_flags(p)
    price_flags(p)
    coefficient_flags(p)
    return parser


def parse_cli(args: Sequence[str]) -> Command:
    """Parse ``args`` into a :class:`Command` holding only the flags given.

    Raises :class:`UsageError` (exit status 2) on any problem.
    """
    parser = _build_parser()
    args = list(args)
    if not args:
        raise UsageError(parser.format_help())
    ns = parser.parse_args(args)
    if ns.verb is None:
        raise UsageError(parser.format_help())
    options = {k: v for k, v in vars(ns).items() if k != "verb"}
    for key, value in options.items():
        if isinstance(value, str) and not value:
            raise UsageError(f"--{key.replace('_', '-')} must not be empty")
    return Command(ns.verb, options)


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config {path}: {exc}") from None
    flat = {}
    for key, value in data.items():
        items = value.items() if isinstance(value, dict) else [(key, value)]
        for k, v in items:
            if k not in CONFIG_TYPES:
                raise UsageError(f"config {path}: unknown key {k!r}")
            want = CONFIG_TYPES[k]
            if want is float and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            if not isinstance(v, want) or (want is int and isinstance(v, bool)):
                raise UsageError(f"config {path}: {k} must be {want.__name__}")
            flat[k] = v
    return flat


def resolve_options(cmd: Command) -> dict:
    """Flags over config file over defaults."""
    merged = dict(DEFAULTS)
    if "config" in cmd.options:
        merged.update(_load_config(cmd.options["config"]))
    merged.update(cmd.options)
    return merged


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _commit(files: dict[Path, str]) -> None:
    """Write every file via temp + rename; on failure leave none of the temps behind."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _num(x) -> str:
    return "" if x is None else repr(float(x))


# --- verb bodies: build artifact texts in memory ---------------------------------

def _ingest(records_text: str, species_text: str, strict: bool):
    records, errors = md.parse_records(io.StringIO(records_text))
    species = md.parse_species(io.StringIO(species_text))
    if errors and strict:
        raise HarvestError(f"{len(errors)} malformed record row(s); first: {errors[0]}")
    daily = md.aggregate_daily(records, species)
    buf = io.StringIO()
    md.write_daily_csv(daily, buf)
    return records, errors, daily, buf.getvalue()


def _group_prices(daily, points, opts):
    given = [k for k in ("p_ground", "p_arboreal") if opts.get(k) is not None]
    if len(given) == 2:
        return md.PriceSystem(opts["p_ground"], opts["p_arboreal"]), ["flags"]
    if len(given) == 1:
        raise UsageError("--p-ground and --p-arboreal must be given together")
    by_key = {}
    for day, point in zip(daily, points):
        by_key.setdefault(eff.group_key(point, opts["pooling"]), []).append(day)
    prices = {}
    for key, days in by_key.items():
        try:
            prices[key] = md.unit_prices(days)
        except HarvestError as exc:
            raise HarvestError(f"group {key}: {exc}") from None
    return prices, ["daily unit prices"]


def _efficiency(daily, opts, title=""):
    if opts.get("region"):
        daily = [d for d in daily if d.region in set(opts["region"])]
    if opts.get("year"):
        daily = [d for d in daily if d.year in set(opts["year"])]
    if not daily:
        raise HarvestError("no daily takeoff matches the region/year filters")
    points = [eff.TakeoffPoint.from_daily(d) for d in daily]
    prices, _ = _group_prices(daily, points, opts)
    result = eff.analyze(points, prices, opts["pooling"])
    if not result.summaries:
        raise HarvestError("no day with positive biomass")

    rows = []
    for key, decomps in result.decompositions.items():
        for d in decomps:
            rows.append({
                "region": d.observed.region, "year": key[1],
                "date": d.observed.date.isoformat() if d.observed.date else None,
                "a_qty": d.observed.a_qty, "g_qty": d.observed.g_qty, "theta": d.scale,
                "technical_loss": d.technical_loss, "allocative_loss": d.allocative_loss,
                "technical_loss_kg": d.technical_loss_kg, "allocative_loss_kg": d.allocative_loss_kg,
            })
    summary = [vars(s).copy() for s in result.summaries]
    group_prices = []
    for key in result.frontiers:
        p = prices if isinstance(prices, md.PriceSystem) else prices[key]
        group_prices.append({"region": key[0], "year": key[1],
                             "p_ground": p.p_ground, "p_arboreal": p.p_arboreal})
    doc = {"pooling": opts["pooling"], "results": rows, "summary": summary, "prices": group_prices,
           "excluded_zero_days": [{"region": k[0], "year": k[1], "count": n}
                                  for k, n in result.excluded.items()]}
    results_json = json.dumps(doc, indent=2, allow_nan=False) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for s in result.summaries:
        writer.writerow(["" if s.region is None else s.region, "" if s.year is None else s.year,
                         s.n_days, _num(s.mean_technical), _num(s.sd_technical), _num(s.t_technical),
                         _num(s.mean_allocative), _num(s.sd_allocative), _num(s.t_allocative)])

    first = next(iter(result.frontiers))
    decomps = result.decompositions[first]
    worst = max(range(len(decomps)), key=lambda i: (decomps[i].technical_loss, -i))
    group_p = prices if isinstance(prices, md.PriceSystem) else prices[first]
    label = " ".join(str(k) for k in first if k is not None)
    spec = frontier_scatter_spec([d.observed.xy for d in decomps], result.frontiers[first], group_p,
                                 highlight=decomps[worst], title=title or f"Frontier {label}".strip())
    return result, results_json, buf.getvalue(), emit_svg(spec)


def _model(opts):
    params = pm.ProductionParams(alpha=opts["alpha"], gamma=opts["gamma"], s=opts["s"],
                                 labor=opts["labor"], exp_a=opts["exp_a"], exp_g=opts["exp_g"])
    rates = pm.HarvestRates(opts["a"], opts["g"])
    return params, rates


def _simulate(opts):
    params, rates = _model(opts)
    t_max, steps = opts["t_max"], opts["steps"]
    if not t_max > 0 or steps < 1:
        raise HarvestError("t-max must be positive and steps at least 1")
    times = [t_max * i / steps for i in range(steps + 1)]
    path = pm.population_path(params, rates, times)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PATH_HEADER)
    for row in zip(path.times, path.arboreal_index, path.ground_index):
        writer.writerow([repr(v) for v in row])
    return params, rates, path, buf.getvalue(), emit_svg(population_path_spec(path, "Population paths"))


def _sustainability(inputs_text, opts):
    rows = sus.parse_inputs(io.StringIO(inputs_text))
    results = [sus.assess_bounds(base, "population", lo, hi, opts["rr_coefficient"],
                                 opts["pbr_coefficient"]) for base, lo, hi in rows]
    buf = io.StringIO()
    sus.write_assessments(results, buf)
    return results, buf.getvalue()


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def execute(cmd: Command, stdout=None, stderr=None) -> int:
    """Run ``cmd``; return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        opts = resolve_options(cmd)
        files, warnings = _run(cmd.verb, opts, stdout)
        _commit(files)
    except UsageError as exc:
        print(exc.message.rstrip("\n"), file=stderr)
        return 2
    except (HarvestError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=stderr)
        return 1
    for w in warnings:
        print(f"warning: {w}", file=stderr)
    return 0


def _run(verb, opts, stdout):
    files: dict[Path, str] = {}
    warnings: list[str] = []
    if verb == "ingest":
        _, errors, _, daily_csv = _ingest(_read_text(opts["records"]), _read_text(opts["species"]),
                                          opts["strict"])
        warnings.extend(str(e) for e in errors)
        files[Path(opts["out"])] = daily_csv
    elif verb == "efficiency":
        daily = md.read_daily_csv(io.StringIO(_read_text(opts["daily"])))
        _, results_json, summary_csv, svg = _efficiency(daily, opts)
        out = Path(opts["out"])
        files[out] = results_json
        files[Path(opts.get("summary") or out.with_suffix(".summary.csv"))] = summary_csv
        if opts.get("svg"):
            files[Path(opts["svg"])] = svg
    elif verb == "simulate":
        *_, path_csv, svg = _simulate(opts)
        if opts.get("out"):
            files[Path(opts["out"])] = path_csv
        else:
            stdout.write(path_csv)
        if opts.get("svg"):
            files[Path(opts["svg"])] = svg
    elif verb == "sustainability":
        _, text = _sustainability(_read_text(opts["inputs"]), opts)
        files[Path(opts["out"])] = text
    elif verb == "report":
        files, warnings = _report(opts)
    else:
        raise UsageError(f"unknown verb {verb!r}")
    return files, warnings


def _report(opts):
    out_dir = Path(opts["out_dir"])
    records_text = _read_text(opts["records"])
    species_text = _read_text(opts["species"])
    records, errors, daily, daily_csv = _ingest(records_text, species_text, opts["strict"])
    artifacts = {"daily.csv": daily_csv}
    result, results_json, summary_csv, frontier_svg = _efficiency(daily, opts)
    artifacts.update({"efficiency.json": results_json, "efficiency_summary.csv": summary_csv,
                      "frontier.svg": frontier_svg})
    params, rates, path, path_csv, path_svg = _simulate(opts)
    artifacts.update({"population.csv": path_csv, "population.svg": path_svg})
    inputs = {"records": _sha256(records_text), "species": _sha256(species_text)}
    if opts.get("sustainability"):
        sus_text = _read_text(opts["sustainability"])
        _, artifacts["sustainability.csv"] = _sustainability(sus_text, opts)
        inputs["sustainability"] = _sha256(sus_text)
    arboreal_ok, ground_ok = pm.is_sustainable(params, rates)
    manifest = {
        "inputs_sha256": inputs,
        "counts": {"records": len(records), "row_errors": len(errors), "daily_rows": len(daily),
                   "groups": len(result.summaries)},
        "parameters": {k: opts[k] for k in sorted(DEFAULTS) if k != "strict"}
                      | {k: opts.get(k) for k in ("p_ground", "p_arboreal")},
        "model": {"arboreal_sustainable": arboreal_ok, "ground_sustainable": ground_ok,
                  "final_arboreal_index": path.arboreal_index[-1],
                  "final_ground_index": path.ground_index[-1]},
        "excess_definition": sus.EXCESS_DEFINITION,
        "artifacts": {name: {"sha256": _sha256(text), "bytes": len(text.encode("utf-8"))}
                      for name, text in sorted(artifacts.items())},
    }
    artifacts["manifest.json"] = json.dumps(manifest, indent=2, allow_nan=False) + "\n"
    return {out_dir / name: text for name, text in artifacts.items()}, [str(e) for e in errors]


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_cli(argv)
    except UsageError as exc:
        print(exc.message.rstrip("\n"), file=sys.stderr)
        return 2
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
