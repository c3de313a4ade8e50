"""Welfare and inequality measures over satisfaction-probability profiles.

Order statistics and shares stay exact rationals. Power means and log
variances are evaluated in double precision from the exact values, summing
with ``math.fsum``.
"""

from __future__ import annotations

import io
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

DEFAULT_P = (1, 0, -1, -2, -5)
DEFAULT_T = (1, 5, 10, 20)
NEG_INF = -math.inf


class MetricError(ValueError):
    """Parameter out of range or a measure that is undefined for the profile."""


def _values(profile: Mapping[int, Fraction] | Iterable[Fraction]) -> list[Fraction]:
    vals = list(profile.values()) if isinstance(profile, Mapping) else list(profile)
    if not vals:
        raise MetricError("empty profile")
    return [Fraction(v) for v in vals]


def nash_welfare(profile, p: float, floor: Fraction | None = None) -> float:
    """Power mean N_p: p=1 arithmetic, p=0 geometric, p=-inf minimum.

    ``floor`` (only for p=0) replaces each value q by max(q, floor), as used
    for Monte Carlo estimates. A zero probability gives 0 for any p <= 0.
    """
    vals = _values(profile)
    if p == 0 and floor is not None:
        vals = [max(q, Fraction(floor)) for q in vals]
    if p == NEG_INF:
        return float(min(vals))
    if p == 1:
        return float(sum(vals, Fraction(0)) / len(vals))
    if p <= 0 and min(vals) == 0:
        return 0.0
    if p == 0:
        return math.exp(math.fsum(_log(q) for q in vals) / len(vals))
    return (math.fsum(float(q) ** p for q in vals) / len(vals)) ** (1.0 / p)


def _log(q: Fraction) -> float:
    # log of numerator and denominator separately survives huge denominators
    return math.log(q.numerator) - math.log(q.denominator)


def inequality_variance(profile) -> float:
    """Population variance of ln(probability)."""
    vals = _values(profile)
    if min(vals) <= 0:
        raise MetricError("variance of logarithms is undefined with a zero probability")
    logs = [_log(q) for q in vals]
    mean = math.fsum(logs) / len(logs)
    return math.fsum((x - mean) ** 2 for x in logs) / len(logs)


def quantile(profile, q: Fraction | float) -> Fraction:
    """Lower empirical quantile: element ``ceil(q*n) - 1`` of the ascending sort."""
    q = Fraction(q)
    if not 0 < q <= 1:
        raise MetricError(f"quantile level must lie in (0, 1], got {q}")
    vals = sorted(_values(profile))
    return vals[math.ceil(q * len(vals)) - 1]


def per1(profile) -> Fraction:
    """Share of users whose probability is exactly 1."""
    vals = _values(profile)
    return Fraction(sum(1 for v in vals if v == 1), len(vals))


def bottom_fraction(profile: Mapping[int, Fraction], t_percent: float | Fraction) -> Fraction:
    """Mean probability of the ceil(t% * n) least satisfied users (ties by vertex id)."""
    t = Fraction(t_percent)
    if not 0 < t <= 100:
        raise MetricError(f"t must lie in (0, 100], got {t}")
    items = sorted(profile.items(), key=lambda kv: (kv[1], kv[0]))
    k = math.ceil(t / 100 * len(items))
    return sum((v for _, v in items[:k]), Fraction(0)) / k


def lexicographic_compare(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> int:
    """Compare ascending-sorted profiles: 1 if ``a`` is larger, -1 if smaller, 0 if equal."""
    if set(a) != set(b):
        raise MetricError("profiles cover different vertex sets")
    sa, sb = sorted(a.values()), sorted(b.values())
    return (sa > sb) - (sa < sb)


@dataclass(frozen=True)
class MetricsReport:
    min: Fraction
    q25: Fraction
    q50: Fraction
    q75: Fraction
    per1: Fraction
    nash: dict[float, float]
    varlog: float | None
    bottom: dict[float, Fraction] = field(default_factory=dict)


def metrics_report(profile: Mapping[int, Fraction], ps: Sequence[float] = DEFAULT_P,
                   ts: Sequence[float] = DEFAULT_T, floor: Fraction | None = None) -> MetricsReport:
    ps = list(dict.fromkeys([0, *ps]))
    try:
        varlog = inequality_variance(profile)
    except MetricError:
        varlog = None
    return MetricsReport(
        min=min(_values(profile)),
        q25=quantile(profile, Fraction(1, 4)),
        q50=quantile(profile, Fraction(1, 2)),
        q75=quantile(profile, Fraction(3, 4)),
        per1=per1(profile),
        nash={p: nash_welfare(profile, p, floor) for p in ps},
        varlog=varlog,
        bottom={t: bottom_fraction(profile, t) for t in ts},
    )


def _fmt(x) -> str:
    if x is None:
        return "undefined"
    return f"{float(x):.6g}"


def _p_label(p: float) -> str:
    if p == NEG_INF:
        return "Nmin"
    return f"N{int(p)}" if float(p).is_integer() else f"N{p:g}"


def format_metrics(reports: Mapping[str, MetricsReport]) -> str:
    """TSV: mechanism, min, q25, q50, q75, per1, N0, N_p..., varlog, bottom_t...

    All rows must share the same p and t lists.
    """
    first = next(iter(reports.values()))
    ps = [p for p in first.nash if p != 0]
    ts = list(first.bottom)
    cols = ["mechanism", "min", "q25", "q50", "q75", "per1", "N0", *map(_p_label, ps), "varlog",
            *(f"bottom{t:g}" for t in ts)]
    out = io.StringIO()
    out.write("\t".join(cols) + "\n")
    for name, r in reports.items():
        row = [name, *map(_fmt, (r.min, r.q25, r.q50, r.q75, r.per1, r.nash[0])),
               *(_fmt(r.nash[p]) for p in ps), _fmt(r.varlog), *(_fmt(r.bottom[t]) for t in ts)]
        out.write("\t".join(row) + "\n")
    return out.getvalue()
