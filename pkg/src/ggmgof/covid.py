"""Ingestion of the NYT state-level COVID-19 CSV into a weekly panel.

The source file lists cumulative confirmed cases per state per day with
header ``date,state,fips,cases,deaths``.  Ingestion differences the
cumulative counts to daily new cases (clamping revision-induced negative
differences to zero), sums them over 52 consecutive 7-day windows starting
January 1 (the leap-over day December 31 is dropped), and converts to
thousands.  The result is one row per state for the 50 states plus the
District of Columbia, with a Census-region tag per state.
"""

import csv
import datetime as dt
import json
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ParseError, RegionMappingError

_REGION_TAGS = ("NorthEast", "MidWest", "West", "South")
_NYT_COLUMNS = ("date", "state", "fips", "cases", "deaths")

WEEKS_PER_YEAR = 52
DAYS_PER_WEEK = 7


def default_region_mapping():
    """The shipped state -> Census-region table (editable data file)."""
    path = resources.files("ggmgof").joinpath("data/us_census_regions.json")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


# The 51 jurisdictions of the panel, NYT naming, fixed order.
CANONICAL_STATES = tuple(sorted(default_region_mapping()))


@dataclass
class WeeklyPanel:
    """Weekly confirmed cases in thousands, one row per state.

    ``values`` has shape ``(len(states), 52)``; ``weeks`` holds the ISO
    start date of each 7-day window; ``regions`` the per-state region tag.
    """

    states: list
    weeks: list
    values: np.ndarray
    regions: list


def load_nyt_csv(path):
    """Parse the NYT cumulative CSV into date-sorted records per state.

    States outside the 50-states-plus-DC panel (territories) are skipped
    with a warning.  A malformed row raises :class:`ParseError` carrying
    its line number.
    """
    records = {}
    skipped = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _NYT_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"missing required columns {missing} in {path}", line=1)
        for row in reader:
            try:
                day = dt.date.fromisoformat(row["date"])
                state = row["state"]
                cases = int(row["cases"])
            except (TypeError, ValueError, KeyError) as exc:
                raise ParseError(
                    f"malformed row at line {reader.line_num}: {exc}",
                    line=reader.line_num,
                ) from exc
            if state not in CANONICAL_STATES:
                if state not in skipped:
                    warnings.warn(f"skipping unrecognized state {state!r}")
                    skipped.add(state)
                continue
            records.setdefault(state, []).append((day, cases))
    for state in records:
        records[state].sort(key=lambda rec: rec[0])
    return records


def _daily_new_series(state_records, start, n_days):
    """Daily new cases over [start, start + n_days), negatives clamped.

    Missing days carry the last known cumulative count forward; the
    baseline is the last record strictly before ``start`` (or the first
    in-window value, making the first day's count zero).
    """
    cumulative = np.empty(n_days)
    pointer = 0
    baseline = None
    while pointer < len(state_records) and state_records[pointer][0] < start:
        baseline = state_records[pointer][1]
        pointer += 1
    last = baseline
    for d in range(n_days):
        day = start + dt.timedelta(days=d)
        while pointer < len(state_records) and state_records[pointer][0] <= day:
            last = state_records[pointer][1]
            pointer += 1
        if last is None:
            # No record yet this year and none before: nothing confirmed.
            last = 0
        cumulative[d] = last
    if baseline is None:
        baseline = cumulative[0]
    new = np.diff(np.concatenate([[baseline], cumulative]))
    return np.maximum(new, 0.0)


def weekly_aggregate(records, year=2021, states=None, region_mapping=None):
    """Aggregate cumulative records into the 52-week panel in thousands.

    ``states`` defaults to the full 51-state panel; every requested state
    must appear in ``records``.
    """
    states = list(CANONICAL_STATES) if states is None else list(states)
    mapping = default_region_mapping() if region_mapping is None else region_mapping
    start = dt.date(year, 1, 1)
    n_days = WEEKS_PER_YEAR * DAYS_PER_WEEK
    values = np.empty((len(states), WEEKS_PER_YEAR))
    regions = []
    for row, state in enumerate(states):
        if state not in records:
            raise ValueError(f"no records for state {state!r} in input file")
        daily = _daily_new_series(records[state], start, n_days)
        values[row] = daily.reshape(WEEKS_PER_YEAR, DAYS_PER_WEEK).sum(axis=1) / 1000.0
        if state not in mapping:
            raise RegionMappingError(f"state {state!r} missing from region mapping")
        region = mapping[state]
        if region not in _REGION_TAGS:
            raise RegionMappingError(f"unknown region {region!r} for state {state!r}")
        regions.append(region)
    weeks = [
        (start + dt.timedelta(days=DAYS_PER_WEEK * w)).isoformat()
        for w in range(WEEKS_PER_YEAR)
    ]
    return WeeklyPanel(states=states, weeks=weeks, values=values, regions=regions)


def region_dummies(panel, mapping=None):
    """Binary covariates (NorthEast, MidWest, West); South is baseline."""
    if mapping is None:
        regions = panel.regions
    else:
        regions = []
        for state in panel.states:
            if state not in mapping:
                raise RegionMappingError(f"state {state!r} missing from region mapping")
            regions.append(mapping[state])
    out = np.zeros((len(panel.states), 3))
    columns = {"NorthEast": 0, "MidWest": 1, "West": 2}
    for row, region in enumerate(regions):
        if region == "South":
            continue
        if region not in columns:
            raise RegionMappingError(f"unknown region {region!r}")
        out[row, columns[region]] = 1.0
    return out


def write_panel_csv(panel, path):
    """Write the 51 x 52 panel as headerless CSV (GEE responses format)."""
    np.savetxt(path, panel.values, delimiter=",", fmt="%.10g")


def write_panel_meta(panel, path):
    """Sidecar JSON naming the rows, windows, and regions of the panel CSV."""
    payload = {"states": panel.states, "weeks": panel.weeks, "regions": panel.regions}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
