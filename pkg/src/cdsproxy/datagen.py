"""Seeded synthetic market panels with a controllable correlation regime.

Every (counterparty, day, feature) cell starts from a latent Gaussian

    latent = rho * ( risk_scale * risk[c] * alignment[f]
                     + code[c, t, f]
                     + response[f] * common[t] )
             + idiosyncratic[c, t, f]

rho scales every shared component at once — the risk-level ridge, the
pair codes and the daily factor — so at rho = 0 only the idiosyncratic
noise remains and the pooled feature correlations collapse.

Counterparties sit at spaced risk levels that move every column the same
way (a riskier name has a higher spread AND higher default probabilities
AND higher volatilities), and one common factor drives all 16 columns day
to day; together these produce the highly correlated feature columns of
real spread panels, and rho dials both effects at once. Risk levels come
in matched pairs — two names of identical overall riskiness — so levels
identify a counterparty's pair but nothing within it. What does is the
pair code, carried by two factor-quiet columns: both swing between two
modes with a daily state, each name leans toward its usual mode and pair
partners lean opposite ways, and the second code column reads the state
straight for even names and inverted for odd ones. A partner therefore
differs, marginally, only in the mode weights of the first code column —
a weak one-column signal — while the decisive information is
conditional: given the state, the second column separates the partners
cleanly. Methods that read one column at a time (class means, per-column
marginals) recover only the weak lean; methods that chain or combine
columns — axis-aligned split sequences, class covariances, interaction
terms — recover the identity. The remaining columns carry no code at
all, tracking the risk level and the daily factor only, so proximity in
them says nothing about identity within a pair. The
idiosyncratic noise is a two-scale Gaussian mixture (occasional wide
days), giving heavier tails than a single Gaussian, and the columns that
react hard to the factor are idiosyncratically noisier as well. Latents map into
valid market ranges: spreads and volatilities through exponentials,
default probabilities through cumulative hazards (which makes them
increase with horizon on every row by construction).
"""
from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baselines import CdsContractRecord
from .core import (
    HV_COLUMNS,
    IV_COLUMNS,
    PANEL_COLUMNS,
    PD_COLUMNS,
    S_COLUMN,
    MarketPanel,
)
from .errors import BadConfig, MissingFiveYearRate, RangeViolation, SchemaViolation

REGIONS = ("Asia", "Europe", "LatinAmerica", "NorthAmerica")
SECTORS = ("Energy", "Financials", "Industrials", "Technology", "Utilities")
RATINGS = ("AA", "AAA", "BB", "BBB", "CC", "CCC")
SENIORITIES = ("Senior", "Subordinated")

_FIRST_DATE = datetime.date(2023, 1, 2)

# latent -> market maps
_S_BASE = 150.0            # basis points around which spreads move
_S_SCALE = 0.15
_HAZARD_BASE = 0.02        # annualised default intensity at latent = 0
_HAZARD_SCALE = 0.25
_TENOR_YEARS = (0.5, 0.5, 1.0, 1.0, 1.0, 1.0)   # segment lengths to 6m..5y
_IV_BASE = 0.30
_HV_BASE = 0.28
_VOL_SCALE = 0.12

# latent model shape
_RISK_SCALE = 2.2          # spread of the per-counterparty risk levels
_ALIGN_LOW, _ALIGN_HIGH = 0.8, 1.2     # per-feature risk sensitivity
# every other column reacts hard to the daily factor, the rest are stable
_RESPONSE_LIVELY = (2.0, 2.2)
_RESPONSE_STABLE = (0.5, 0.7)
_LIVELY_NOISE = 4.0        # idiosyncratic-scale multiplier on lively columns
_TAIL_PROBABILITY = 0.15   # chance of a wide-noise cell on a lively column
_TAIL_WIDTH = 3.0          # scale multiplier on wide-noise cells
# the two stable columns carrying the pair code; every other column tracks
# the risk level and the daily factor only
_CODE_COLUMNS = (8, 14)    # iv_6m, hv_4m
_CODE_AMPLITUDE = 1.5      # code mode offset per unit of base_spacing
_RESPONSE_CODE = 0.08      # code columns barely react to the daily factor
_STATE_BIAS = 0.60         # how strongly a name leans toward its usual state
_QUIET_PROBABILITY = 0.15  # chance a day's code swing is muted market-wide
_QUIET_FACTOR = 0.25       # code amplitude multiplier on quiet days


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic panel.

    base_spacing scales the pair-code amplitude and is the difficulty
    dial: wide spacing separates the code modes cleanly, narrow spacing
    drowns them in noise. factor_loading (rho) scales every shared
    component — risk levels, pair codes and the daily common factor — and
    is the correlation dial.
    """

    n_counterparties: int = 5
    n_days: int = 100
    factor_loading: float = 0.96
    idiosyncratic_scale: float = 0.15
    base_spacing: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_counterparties < 2:
            raise BadConfig("need at least two counterparties")
        if self.n_days < 1:
            raise BadConfig("need at least one day")
        if not 0.0 <= self.factor_loading < 1.0:
            raise BadConfig("factor_loading must lie in [0, 1)")
        if self.idiosyncratic_scale <= 0.0:
            raise BadConfig("idiosyncratic_scale must be positive")
        if self.base_spacing <= 0.0:
            raise BadConfig("base_spacing must be positive")

    def settings(self) -> dict:
        return {"n_counterparties": self.n_counterparties,
                "n_days": self.n_days,
                "factor_loading": self.factor_loading,
                "idiosyncratic_scale": self.idiosyncratic_scale,
                "base_spacing": self.base_spacing,
                "seed": self.seed}


def counterparty_names(n: int) -> tuple[str, ...]:
    width = max(3, len(str(n - 1)))
    return tuple(f"CP{i:0{width}d}" for i in range(n))


def _paired_risk_levels(n: int) -> np.ndarray:
    """Risk levels in matched pairs spread over [-1, 1].

    Counterparties 2p and 2p+1 share risk level p exactly, so overall
    riskiness identifies the pair but nothing within it.
    """
    n_pairs = (n + 1) // 2
    if n_pairs == 1:
        centers = np.zeros(1)
    else:
        centers = np.linspace(-1.0, 1.0, n_pairs)
    return centers[np.arange(n) // 2]


def generate_panel(config: GeneratorConfig) -> MarketPanel:
    """Deterministic panel from one seeded generator stream.

    Draw order (fixed, part of the determinism contract): factor
    responses, risk alignments, daily common factor, daily state bits,
    idiosyncratic noise, tail mask.
    """
    n, t, d = config.n_counterparties, config.n_days, len(PANEL_COLUMNS)
    rng = np.random.default_rng(config.seed)
    lively = rng.uniform(*_RESPONSE_LIVELY, size=d)
    stable = rng.uniform(*_RESPONSE_STABLE, size=d)
    response = np.where(np.arange(d) % 2 == 1, lively, stable)
    response[list(_CODE_COLUMNS)] = _RESPONSE_CODE   # keep the code modes crisp
    alignment = rng.uniform(_ALIGN_LOW, _ALIGN_HIGH, size=d)
    common = rng.normal(0.0, 1.0, size=t)
    # daily state: each name leans toward its usual mode, partners lean
    # opposite ways, so the state weights differ within a pair while the
    # mode positions do not
    lean = np.where(np.arange(n) % 2 == 0, _STATE_BIAS, 1.0 - _STATE_BIAS)
    bit = np.where(rng.random(size=(n, t)) < lean[:, None], 1.0, -1.0)
    idio = rng.normal(0.0, config.idiosyncratic_scale, size=(n, t, d))
    lively_col = np.arange(d) % 2 == 1
    idio = np.where(lively_col, _LIVELY_NOISE * idio, idio)
    wide = (rng.random(size=(n, t, d)) < _TAIL_PROBABILITY) & lively_col
    idio = np.where(wide, _TAIL_WIDTH * idio, idio)

    risk = _paired_risk_levels(n)
    level = (config.factor_loading * _RISK_SCALE
             * risk[:, None] * alignment[None, :])            # (n, d)
    # pair code: the first code column swings with the daily state, the
    # second reads the same state straight (even names) or inverted (odd
    # names), so partners differ only in the sign of that co-movement
    # occasional quiet days mute the code swing market-wide, leaving the
    # state readable only through fine cross-column geometry
    quiet = rng.random(size=t) < _QUIET_PROBABILITY
    swing = (_CODE_AMPLITUDE * config.base_spacing
             * np.where(quiet, _QUIET_FACTOR, 1.0))            # (t,)
    orientation = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    code = np.zeros((n, t, d))
    code[:, :, _CODE_COLUMNS[0]] = swing[None, :] * bit
    code[:, :, _CODE_COLUMNS[1]] = swing[None, :] * bit * orientation[:, None]
    latent = (level[:, None, :]
              + config.factor_loading * code
              + config.factor_loading * response[None, None, :]
              * common[None, :, None] + idio)

    values: dict[str, np.ndarray] = {}
    values[S_COLUMN] = _S_BASE * np.exp(_S_SCALE * latent[:, :, 0])
    cumulative = np.zeros((n, t))
    for k, col in enumerate(PD_COLUMNS):
        hazard = _HAZARD_BASE * np.exp(_HAZARD_SCALE * latent[:, :, 1 + k])
        cumulative = cumulative + hazard * _TENOR_YEARS[k]
        values[col] = 1.0 - np.exp(-cumulative)
    for k, col in enumerate(IV_COLUMNS):
        values[col] = _IV_BASE * np.exp(_VOL_SCALE * latent[:, :, 7 + k])
    for k, col in enumerate(HV_COLUMNS):
        values[col] = _HV_BASE * np.exp(_VOL_SCALE * latent[:, :, 11 + k])

    dates = tuple((_FIRST_DATE + datetime.timedelta(days=i)).isoformat()
                  for i in range(t))
    return MarketPanel(counterparties=counterparty_names(n), dates=dates,
                       values=values)


# ------------------------------------------------------------- panel CSV


_PANEL_HEADER = ("counterparty", "date") + PANEL_COLUMNS


def write_panel(panel: MarketPanel, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_PANEL_HEADER)
        for i, name in enumerate(panel.counterparties):
            for j, date in enumerate(panel.dates):
                row = [name, date]
                for col in PANEL_COLUMNS:
                    v = panel.values[col][i, j]
                    row.append("" if not np.isfinite(v) else repr(float(v)))
                writer.writerow(row)


def _parse_cell(text: str, row_number: int, column: str) -> float:
    if text == "":
        if column == S_COLUMN:
            return float("nan")
        raise SchemaViolation(
            f"row {row_number}, column {column}: empty value")
    try:
        value = float(text)
    except ValueError as exc:
        raise SchemaViolation(
            f"row {row_number}, column {column}: not a number: {text!r}"
        ) from exc
    if column == S_COLUMN:
        if not np.isnan(value) and value < 0.0:
            raise RangeViolation(
                f"row {row_number}, column {column}: spread must be >= 0, "
                f"got {value}")
    elif column in PD_COLUMNS:
        if not 0.0 <= value <= 1.0:
            raise RangeViolation(
                f"row {row_number}, column {column}: probability outside "
                f"[0, 1]: {value}")
    else:
        if not value >= 0.0:
            raise RangeViolation(
                f"row {row_number}, column {column}: volatility must be "
                f">= 0, got {value}")
    return value


def read_panel(path) -> MarketPanel:
    """Load and validate a panel written by write_panel.

    A file without the s column still loads (its five-year rates are
    simply missing); any other absent column is a schema violation, as is
    an incomplete (counterparty, date) grid.
    """
    with open(path, "r", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolation("panel file is empty") from None
        missing = [c for c in _PANEL_HEADER if c not in header]
        if missing != [] and missing != [S_COLUMN]:
            raise SchemaViolation(f"panel file lacks columns: {missing}")
        extra = [c for c in header if c not in _PANEL_HEADER]
        if extra:
            raise SchemaViolation(f"panel file has unknown columns: {extra}")
        position = {c: header.index(c) for c in header}
        cells: dict[tuple[str, str], dict[str, float]] = {}
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaViolation(
                    f"row {row_number}: expected {len(header)} fields, "
                    f"got {len(row)}")
            key = (row[position["counterparty"]], row[position["date"]])
            if key in cells:
                raise SchemaViolation(
                    f"row {row_number}: duplicate observation for {key}")
            record = {}
            for col in PANEL_COLUMNS:
                if col in position:
                    record[col] = _parse_cell(row[position[col]],
                                              row_number, col)
                else:
                    record[col] = float("nan")
            cells[key] = record
    if not cells:
        raise SchemaViolation("panel file has no observations")
    names = tuple(sorted({k[0] for k in cells}))
    dates = tuple(sorted({k[1] for k in cells}))
    values = {col: np.full((len(names), len(dates)), np.nan)
              for col in PANEL_COLUMNS}
    for i, name in enumerate(names):
        for j, date in enumerate(dates):
            if (name, date) not in cells:
                raise SchemaViolation(
                    f"missing observation for counterparty {name!r} on "
                    f"{date}")
            for col in PANEL_COLUMNS:
                values[col][i, j] = cells[(name, date)][col]
    return MarketPanel(counterparties=names, dates=dates, values=values)


# -------------------------------------------- category cells and records


def assign_categories(names: Sequence[str]) -> dict[str, dict[str, str]]:
    """Deterministic category labels with every cell holding >= 2 names.

    Counterparty i joins cell i mod (n // 2); the cell index spells out
    rating, then region, sector and seniority in mixed radix, so small
    universes vary only by rating (keeping the regression design full
    rank) while large ones spread over all four vocabularies.
    """
    n_cells = max(1, len(names) // 2)
    table = {}
    for i, name in enumerate(names):
        cell = i % n_cells
        rating, rest = RATINGS[cell % len(RATINGS)], cell // len(RATINGS)
        region, rest = REGIONS[rest % len(REGIONS)], rest // len(REGIONS)
        sector, rest = SECTORS[rest % len(SECTORS)], rest // len(SECTORS)
        seniority = SENIORITIES[rest % len(SENIORITIES)]
        table[name] = {"region": region, "sector": sector,
                       "rating": rating, "seniority": seniority}
    return table


def records_from_panel(panel: MarketPanel,
                       categories: Mapping[str, Mapping[str, str]] | None = None,
                       ) -> list[CdsContractRecord]:
    """One record per counterparty: its latest observed five-year rate
    plus category labels (generated deterministically when not given)."""
    if categories is None:
        categories = assign_categories(panel.counterparties)
    records = []
    for i, name in enumerate(panel.counterparties):
        rates = panel.values[S_COLUMN][i]
        observed = np.flatnonzero(np.isfinite(rates))
        if observed.size == 0:
            raise MissingFiveYearRate(
                f"counterparty {name!r} has no observed five-year rate")
        cats = categories[name]
        records.append(CdsContractRecord(
            counterparty=name, spread=float(rates[observed[-1]]),
            region=cats["region"], sector=cats["sector"],
            rating=cats["rating"], seniority=cats["seniority"]))
    return records


_RECORD_HEADER = ("counterparty", "spread", "region", "sector", "rating",
                  "seniority")


def write_records(records: Iterable[CdsContractRecord], path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_RECORD_HEADER)
        for r in records:
            writer.writerow([r.counterparty, repr(float(r.spread)), r.region,
                             r.sector, r.rating, r.seniority])


def read_records(path) -> list[CdsContractRecord]:
    with open(path, "r", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolation("records file is empty") from None
        if tuple(header) != _RECORD_HEADER:
            raise SchemaViolation(
                f"records file header {header} != {list(_RECORD_HEADER)}")
        records = []
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(_RECORD_HEADER):
                raise SchemaViolation(
                    f"row {row_number}: expected {len(_RECORD_HEADER)} "
                    f"fields, got {len(row)}")
            try:
                spread = float(row[1])
            except ValueError as exc:
                raise SchemaViolation(
                    f"row {row_number}, column spread: not a number: "
                    f"{row[1]!r}") from exc
            records.append(CdsContractRecord(
                counterparty=row[0], spread=spread, region=row[2],
                sector=row[3], rating=row[4], seniority=row[5]))
    return records
