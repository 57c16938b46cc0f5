from casecost import CaseRecord, CmgStats, Dataset
from casecost.aggregation import summarize


def make_case(case_id, cmg="100", pac=1.0, riw=1.0, los=(5, 5, 0), sc=0.0):
    total, acute, alc = los
    return CaseRecord(case_id, cmg, pac, riw, total, acute, alc, sc)


def dataset_from_costs(cases, params, costs):
    """Dataset whose benchmark aggregates the given per-case true costs."""
    by_cmg = {}
    for c in cases:
        by_cmg.setdefault(c.cmg, []).append(costs[c.case_id])
    bench = {cmg: summarize(cmg, v) for cmg, v in by_cmg.items()}
    return Dataset(tuple(cases), params, bench)


def stats(cmg, n, avg, mn, mx, sd=0.0):
    return CmgStats(cmg, n, avg * n, avg, sd, mn, mx)
