"""Reference implementations the tests check production code against.

Each oracle answers the same question as its production counterpart but is
written in a deliberately different shape — exhaustive scans and recursion
instead of bisection and in-place loops — so a shared bug is unlikely.
"""

import random
from datetime import datetime, timedelta, timezone
from itertools import takewhile

from dateutil.relativedelta import relativedelta

# --- annual selection --------------------------------------------------------


def oracle_advance(dt: datetime, years: int, days: float, k: int) -> datetime:
    if years:
        dt = dt + relativedelta(years=years * k)
    if days:
        dt = dt + timedelta(days=days * k)
    return dt


def oracle_select(dts, years=1, days=0.0, fixed_grid=False):
    """Return [(target, index)] per the selection contract, by exhaustive scan.

    The first memento seeds the sample; each later target keeps the record
    dated strictly after the previous pick that minimizes the key
    (|dt - target|, dt, index): nearest, earlier-on-ties, first-listed when
    datetimes coincide.
    """
    if not dts:
        raise ValueError("nothing to sample")
    pivot = dts[0]
    picks = [(pivot, 0)]
    prev = pivot
    k = 1
    while True:
        if fixed_grid:
            target = oracle_advance(pivot, years, days, k)
        else:
            target = oracle_advance(prev, years, days, 1)
        best = None
        for i, dt in enumerate(dts):
            if dt <= prev:
                continue
            key = (abs(dt - target), dt, i)
            if best is None or key < best:
                best = key
        if best is None:
            break
        picks.append((target, best[2]))
        prev = dts[best[2]]
        k += 1
    return picks


def random_datetimes(rng: random.Random, max_n: int) -> list[datetime]:
    """A sorted random capture history, sometimes with coinciding instants."""
    n = rng.randint(1, max_n)
    base = datetime(1996, 1, 1, tzinfo=timezone.utc)
    span = 20 * 365 * 86400
    dts = sorted(base + timedelta(seconds=rng.randrange(span)) for _ in range(n))
    if n > 2 and rng.random() < 0.3:
        i = rng.randrange(n - 1)
        dts[i + 1] = dts[i]
        dts.sort()
    return dts


# --- sustained-drop detection ------------------------------------------------


def _median(values):
    vs = sorted(values)
    mid = len(vs) // 2
    if len(vs) % 2:
        return float(vs[mid])
    return (vs[mid - 1] + vs[mid]) / 2


def oracle_drops(years, counts, threshold=0.5, window=2):
    """Return [(start_year, end_year, baseline, dropped, ratio)] recursively.

    A flag is a maximal run of at least `window` consecutive counts below
    threshold x median-of-all-earlier-counts, the median being fixed at the
    run's first year; scanning resumes past the run.
    """

    def scan(start):
        for i in range(max(start, 1), len(counts)):
            baseline = _median(counts[:i])
            cutoff = threshold * baseline
            if baseline > 0 and counts[i] < cutoff:
                run = list(takewhile(lambda j: counts[j] < cutoff,
                                     range(i, len(counts))))
                rest = scan(run[-1] + 1)
                if len(run) >= window:
                    dropped = _median([counts[j] for j in run])
                    return [(years[run[0]], years[run[-1]], float(baseline),
                             dropped, dropped / float(baseline))] + rest
                return rest
        return []

    return scan(1)


def random_series(rng: random.Random, min_len=3, max_len=24):
    """Random annual counts, biased to contain plateaus and collapses."""
    n = rng.randint(min_len, max_len)
    counts = []
    level = rng.randint(5, 60)
    for _ in range(n):
        roll = rng.random()
        if roll < 0.15:
            level = rng.randint(0, 60)  # regime change
        elif roll < 0.35:
            level = max(0, level // rng.choice((2, 3, 4)))  # collapse
        elif roll < 0.55:
            level = level + rng.randint(-3, 6)  # drift
        counts.append(max(0, level + rng.randint(-2, 2)))
    years = list(range(1996, 1996 + n))
    return years, counts
