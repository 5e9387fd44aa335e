"""Estimators over simulation records.

Dispersion of the per-realization estimators is the sample standard
deviation across realizations (the spread of the realizations, not the
standard error of their mean).
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, EmptyInput, NoDeliveredPackets


@dataclass(frozen=True)
class SimEstimates:
    nonempty_prob: tuple
    mean_delay: tuple
    success_prob: tuple
    stranded_fraction: float
    interference_corr: tuple | None = None
    success_corr: tuple | None = None
    queue_length: tuple | None = None


def _spread(values):
    values = np.asarray(values, dtype=float)
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), sd


def _require(records):
    records = list(records)
    if not records:
        raise EmptyInput("no simulation records")
    return records


def estimate_nonempty(records):
    """Fraction of (interior link, slot) pairs with a nonempty queue.

    Computed per realization, then averaged; realizations without interior
    links are skipped.
    """
    records = _require(records)
    fractions = [r.nonempty_count.sum() / r.interior_count.sum()
                 for r in records if r.interior_count.sum() > 0]
    if not fractions:
        raise EmptyInput("no interior links in any realization")
    return _spread(fractions)


def estimate_queue_length(records):
    """Mean number of packets queued at an interior link at slot start."""
    records = _require(records)
    means = [r.queue_sum.sum() / r.interior_count.sum()
             for r in records if r.interior_count.sum() > 0]
    if not means:
        raise EmptyInput("no interior links in any realization")
    return _spread(means)


def estimate_delay(records):
    """Mean sojourn (departure - arrival) of delivered interior packets."""
    records = _require(records)
    means = [float((r.departure_slot - r.arrival_slot).mean())
             for r in records if r.departure_slot.size > 0]
    if not means:
        raise NoDeliveredPackets("no interior packet was delivered")
    return _spread(means)


def estimate_success(records):
    """Delivered fraction of transmission attempts by interior links."""
    records = _require(records)
    ratios = [r.successes / r.attempts for r in records if r.attempts > 0]
    if not ratios:
        raise EmptyInput("no transmission attempts by interior links")
    return _spread(ratios)


def stranded_fraction(records):
    """Share of interior packets still queued when the run ended."""
    records = _require(records)
    delivered = sum(r.departure_slot.size for r in records)
    stranded = sum(r.stranded for r in records)
    total = delivered + stranded
    return stranded / total if total else 0.0


def _lag_sums(trace, lag, mask):
    x, y = trace[:-lag], trace[lag:]
    if mask is None:
        m = np.ones(x.shape, dtype=bool)
    else:
        m = mask[:-lag] & mask[lag:]
    x = np.where(m, x, 0.0)
    y = np.where(m, y, 0.0)
    return np.stack([
        m.sum(axis=0), x.sum(axis=0), y.sum(axis=0),
        (x * x).sum(axis=0), (y * y).sum(axis=0), (x * y).sum(axis=0),
    ])


def _corr(s):
    n, sx, sy, sxx, syy, sxy = s
    vx = sxx - sx * sx / n
    vy = syy - sy * sy / n
    if vx <= 0 or vy <= 0:
        raise DegenerateVariance("series has zero variance")
    return (sxy - sx * sy / n) / math.sqrt(vx * vy)


def _group_sums(sums, groups):
    labels, inverse = np.unique(groups, return_inverse=True)
    out = np.zeros((sums.shape[0], labels.size))
    for row in range(sums.shape[0]):
        out[row] = np.bincount(inverse, weights=sums[row], minlength=labels.size)
    return out


def pearson_over_slots(trace, lag=1, *, mask=None, groups=None, pooling="population"):
    """Correlation between a series and itself ``lag`` slots later.

    Parameters
    ----------
    trace : array (slots, links), or a 1-D series
    mask : optional boolean array like ``trace``; a slot pair is used only
        when both of its entries are unmasked
    groups : optional label per link; links sharing a label are treated as
        one dependent cluster when estimating the standard error
    pooling : ``"population"`` pools raw pairs of all links into one sample,
        which measures correlation across topologies as well as time;
        ``"per_link"`` averages the coefficients of the individual links

    Returns
    -------
    (estimate, std_error). For ``"population"`` the error is obtained on the
    Fisher z scale, by delete-one-cluster jackknife when there are at least
    two clusters and as ``1/sqrt(n - 3)`` otherwise.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim == 1:
        trace = trace[:, None]
        mask = None if mask is None else np.asarray(mask)[:, None]
    if lag < 1 or trace.shape[0] <= lag + 2:
        raise ValueError("trace must be longer than lag + 2")
    sums = _lag_sums(trace, lag, mask)

    if pooling == "per_link":
        coefs = []
        for col in range(sums.shape[1]):
            if sums[0, col] < 3:
                continue
            try:
                coefs.append(_corr(sums[:, col]))
            except DegenerateVariance:
                continue
        if not coefs:
            raise DegenerateVariance("every link series is constant")
        coefs = np.asarray(coefs)
        se = coefs.std(ddof=1) / math.sqrt(coefs.size) if coefs.size > 1 else math.nan
        return float(coefs.mean()), float(se)
    if pooling != "population":
        raise ValueError(f"unknown pooling {pooling!r}")

    total = sums.sum(axis=1)
    r = _corr(total)
    if groups is None:
        groups = np.arange(sums.shape[1])
    clustered = _group_sums(sums, np.asarray(groups))
    clustered = clustered[:, clustered[0] > 0]
    k = clustered.shape[1]
    if k < 2:
        n = total[0]
        return r, (1.0 - r * r) / math.sqrt(max(n - 3.0, 1.0))
    zs = []
    for col in range(k):
        try:
            zs.append(math.atanh(_corr(total - clustered[:, col])))
        except DegenerateVariance:
            continue
    zs = np.asarray(zs)
    se_z = math.sqrt((zs.size - 1) / zs.size * ((zs - zs.mean()) ** 2).sum())
    return r, (1.0 - r * r) * se_z


def joint_frequency(indicator, lag=1, *, groups=None):
    """Frequency of ``indicator[t] & indicator[t + lag]`` with a cluster
    jackknife standard error.
    """
    ind = np.asarray(indicator, dtype=float)
    if ind.ndim == 1:
        ind = ind[:, None]
    both = ind[:-lag] * ind[lag:]
    hits, pairs = both.sum(axis=0), np.full(both.shape[1], both.shape[0], dtype=float)
    if groups is None:
        groups = np.arange(both.shape[1])
    labels, inverse = np.unique(np.asarray(groups), return_inverse=True)
    gh = np.bincount(inverse, weights=hits, minlength=labels.size)
    gp = np.bincount(inverse, weights=pairs, minlength=labels.size)
    freq = gh.sum() / gp.sum()
    k = labels.size
    if k < 2:
        return float(freq), math.sqrt(freq * (1 - freq) / gp.sum())
    loo = (gh.sum() - gh) / (gp.sum() - gp)
    se = math.sqrt((k - 1) / k * ((loo - loo.mean()) ** 2).sum())
    return float(freq), se


def stacked_traces(records, name):
    """Concatenate a trace field of all records along the link axis, with
    the realization index of each column as its cluster label."""
    blocks = [getattr(r, name) for r in records if getattr(r, name) is not None]
    if not blocks:
        raise EmptyInput(f"no record carries {name}")
    labels = np.concatenate([np.full(getattr(r, name).shape[1], r.index)
                             for r in records if getattr(r, name) is not None])
    return np.concatenate(blocks, axis=1), labels


def summarize(records, lag=1):
    records = _require(records)
    try:
        delay = estimate_delay(records)
    except NoDeliveredPackets:
        delay = (math.nan, math.nan)
    interference_corr = success_corr = None
    if any(r.trace_capture is not None for r in records):
        traces = [r for r in records if r.trace_capture is not None and r.trace_capture.shape[1]]
        if traces:
            inter, labels = stacked_traces(traces, "trace_interference")
            cap, _ = stacked_traces(traces, "trace_capture")
            inside, _ = stacked_traces(traces, "trace_interior")
            try:
                interference_corr = pearson_over_slots(inter, lag, mask=inside, groups=labels)
            except (DegenerateVariance, ValueError):
                interference_corr = None
            try:
                success_corr = pearson_over_slots(cap, lag, mask=inside, groups=labels)
            except (DegenerateVariance, ValueError):
                success_corr = None
    return SimEstimates(
        nonempty_prob=estimate_nonempty(records),
        mean_delay=delay,
        success_prob=estimate_success(records),
        stranded_fraction=stranded_fraction(records),
        interference_corr=interference_corr,
        success_corr=success_corr,
        queue_length=estimate_queue_length(records),
    )
