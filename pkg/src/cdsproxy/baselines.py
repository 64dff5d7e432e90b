"""Incumbent proxy methods used as comparison anchors.

Curve mapping assigns every counterparty in a (region, sector, rating)
bucket the same summary spread (mean or median of the bucket). The
cross-sectional regression fits ordinary least squares to log spreads on
dummy-coded region/sector/rating/seniority levels and predicts the
exponential of the fitted log spread. Both produce one value per category
cell — every member of a cell receives an identical proxy, which is
exactly the homogeneity the per-counterparty classifiers are built to beat.
"""
from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import numerics as nm
from .errors import (
    EmptyBucket,
    NotPositiveDefinite,
    RangeViolation,
    RankDeficientDesign,
    UnknownCategoryLevel,
)

CATEGORY_FIELDS = ("region", "sector", "rating", "seniority")
BUCKET_FIELDS = ("region", "sector", "rating")


class ProxyStatistic(str, enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"


@dataclass(frozen=True)
class CdsContractRecord:
    """One counterparty's observed spread plus its category labels."""

    counterparty: str
    spread: float            # basis points
    region: str
    sector: str
    rating: str
    seniority: str

    def __post_init__(self):
        if not (math.isfinite(self.spread) and self.spread > 0.0):
            raise RangeViolation(
                f"spread for {self.counterparty!r} must be a positive "
                f"finite number of basis points, got {self.spread!r}")

    def categories(self) -> dict[str, str]:
        return {field: getattr(self, field) for field in CATEGORY_FIELDS}


# ----------------------------------------------------------- curve mapping


def curve_mapping_proxy(bucket: Sequence[float],
                        statistic: ProxyStatistic = ProxyStatistic.MEAN,
                        ) -> float:
    """Summary spread of one bucket: arithmetic mean, or median with the
    even-count convention of averaging the middle pair."""
    statistic = ProxyStatistic(statistic)
    spreads = [float(s) for s in bucket]
    if not spreads:
        raise EmptyBucket("curve mapping needs at least one spread")
    if statistic is ProxyStatistic.MEAN:
        return statistics.fmean(spreads)
    return float(statistics.median(spreads))


def bucket_key(record: CdsContractRecord) -> tuple[str, ...]:
    return tuple(getattr(record, field) for field in BUCKET_FIELDS)


def group_buckets(records: Iterable[CdsContractRecord],
                  ) -> dict[tuple[str, ...], list[float]]:
    buckets: dict[tuple[str, ...], list[float]] = {}
    for record in records:
        buckets.setdefault(bucket_key(record), []).append(record.spread)
    return buckets


def curve_mapping_table(records: Sequence[CdsContractRecord],
                        statistic: ProxyStatistic = ProxyStatistic.MEAN,
                        ) -> dict[tuple[str, ...], float]:
    """Proxy spread for every (region, sector, rating) bucket present."""
    return {key: curve_mapping_proxy(spreads, statistic)
            for key, spreads in sorted(group_buckets(records).items())}


# ------------------------------------------------- cross-sectional regression


@dataclass(frozen=True)
class CrossSectionalModel:
    """Log-linear spread model on dummy-coded category levels.

    The first (sorted) level of each category is the reference and carries
    no coefficient; its effect lives in the intercept.
    """

    intercept: float
    coefficients: tuple[tuple[str, tuple[tuple[str, float], ...]], ...]
    references: tuple[tuple[str, str], ...]

    def coefficient(self, field: str, level: str) -> float:
        table = dict(self.coefficients)[field]
        references = dict(self.references)
        if level == references[field]:
            return 0.0
        levels = dict(table)
        if level not in levels:
            known = sorted([references[field], *levels])
            raise UnknownCategoryLevel(
                f"{field} level {level!r} was not in the training records; "
                f"known levels: {', '.join(known)}")
        return levels[level]

    def log_spread(self, categories: Mapping[str, str]) -> float:
        total = self.intercept
        for field in CATEGORY_FIELDS:
            total += self.coefficient(field, categories[field])
        return total

    def predict(self, categories: Mapping[str, str]) -> float:
        return math.exp(self.log_spread(categories))

    def predict_record(self, record: CdsContractRecord) -> float:
        return self.predict(record.categories())


def _level_table(records: Sequence[CdsContractRecord],
                 ) -> dict[str, list[str]]:
    return {field: sorted({getattr(r, field) for r in records})
            for field in CATEGORY_FIELDS}


def fit_cross_sectional(records: Sequence[CdsContractRecord],
                        ) -> CrossSectionalModel:
    """Least squares on log spreads over intercept + level dummies."""
    if not records:
        raise EmptyBucket("regression needs at least one record")
    levels = _level_table(records)
    columns: list[tuple[str, str]] = []       # (field, level) per dummy
    for field in CATEGORY_FIELDS:
        columns.extend((field, level) for level in levels[field][1:])
    n, p = len(records), 1 + len(columns)
    design = np.zeros((n, p))
    design[:, 0] = 1.0
    for j, (field, level) in enumerate(columns, start=1):
        design[:, j] = [getattr(r, field) == level for r in records]
    target = np.log([r.spread for r in records])
    gram = design.T @ design
    try:
        beta = nm.solve_spd(gram, design.T @ target)
    except NotPositiveDefinite as exc:
        raise RankDeficientDesign(
            "category dummies are collinear after dropping reference "
            "levels; merge or drop the aliased levels") from exc
    grouped: dict[str, list[tuple[str, float]]] = {f: [] for f in CATEGORY_FIELDS}
    for (field, level), value in zip(columns, beta[1:]):
        grouped[field].append((level, float(value)))
    return CrossSectionalModel(
        intercept=float(beta[0]),
        coefficients=tuple((f, tuple(grouped[f])) for f in CATEGORY_FIELDS),
        references=tuple((f, levels[f][0]) for f in CATEGORY_FIELDS))
