"""Parsing and validation of election, candidate, and geometry inputs.

Canonical input formats:

* candidates: CSV ``candidate_id,cfscore,party,state,district,cycle,office``
* elections:  CSV ``precinct_id,state,cycle,office,cand0_id,cand1_id,n0,n1``
* centers:    CSV ``precinct_id,lon,lat``
* boundaries: GeoJSON FeatureCollection of Polygon/MultiPolygon features with
  an integer ``district`` property (optional ``state`` property)

All loaders are pure: they never mutate their inputs, and the records they
return are frozen dataclasses.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DegenerateRingError,
    DuplicateKeyError,
    MissingCenterError,
    MissingColumnError,
    NegativeCountError,
    NonFiniteScoreError,
    PartyConflictError,
    UnknownCandidateError,
)

__all__ = [
    "Party",
    "Office",
    "CandidateRecord",
    "ElectionRecord",
    "PrecinctCenter",
    "DistrictBoundary",
    "load_candidates",
    "load_elections",
    "load_centers",
    "load_boundaries",
    "write_candidates",
    "write_elections",
    "write_centers",
    "write_boundaries",
    "candidate_index",
    "point_in_polygon",
    "link_districts",
]


class Party(Enum):
    DEMOCRAT = "Democrat"
    REPUBLICAN = "Republican"
    OTHER = "Other"


class Office(Enum):
    HOUSE = "House"
    SENATE = "Senate"


@dataclass(frozen=True)
class CandidateRecord:
    candidate_id: str
    cfscore: float
    party: Party
    state: str
    district: int
    cycle: int
    office: Office


@dataclass(frozen=True)
class ElectionRecord:
    """One precinct's two-candidate contest. Candidate 0 is the Democrat."""

    precinct_id: str
    state: str
    cycle: int
    office: Office
    cand0_id: str
    cand1_id: str
    n0: int
    n1: int
    district: int | None = None

    @property
    def n(self) -> int:
        return self.n0 + self.n1


@dataclass(frozen=True)
class PrecinctCenter:
    precinct_id: str
    lon: float
    lat: float


@dataclass(frozen=True)
class DistrictBoundary:
    """Polygon with optional holes: first ring exterior, the rest holes."""

    district: int
    state: str
    rings: tuple


CANDIDATE_COLUMNS = ["candidate_id", "cfscore", "party", "state", "district", "cycle", "office"]
ELECTION_COLUMNS = ["precinct_id", "state", "cycle", "office", "cand0_id", "cand1_id", "n0", "n1"]
CENTER_COLUMNS = ["precinct_id", "lon", "lat"]


def _require_columns(fieldnames, required, path):
    missing = [c for c in required if fieldnames is None or c not in fieldnames]
    if missing:
        raise MissingColumnError(f"{path}: missing required column(s) {missing}")


def candidate_index(candidates) -> dict:
    """Index candidates by their unique (candidate_id, cycle, office) key."""
    index = {}
    for rec in candidates:
        key = (rec.candidate_id, rec.cycle, rec.office)
        if key in index:
            raise DuplicateKeyError(f"duplicate candidate key {key}")
        index[key] = rec
    return index


def load_candidates(path) -> list[CandidateRecord]:
    """Load and validate candidate records from CSV."""
    records = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames, CANDIDATE_COLUMNS, path)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            try:
                cfscore = float(row["cfscore"])
            except ValueError:
                raise NonFiniteScoreError(f"{where}: cfscore {row['cfscore']!r} is not a number") from None
            if not math.isfinite(cfscore):
                raise NonFiniteScoreError(f"{where}: cfscore {cfscore} is not finite")
            try:
                party = Party(row["party"])
                office = Office(row["office"])
            except ValueError as exc:
                raise ValueError(f"{where}: {exc}") from None
            district = int(row["district"])
            if district < 1:
                raise ValueError(f"{where}: district must be >= 1, got {district}")
            rec = CandidateRecord(
                candidate_id=row["candidate_id"],
                cfscore=cfscore,
                party=party,
                state=row["state"],
                district=district,
                cycle=int(row["cycle"]),
                office=office,
            )
            key = (rec.candidate_id, rec.cycle, rec.office)
            if key in seen:
                raise DuplicateKeyError(f"{where}: duplicate candidate key {key}")
            seen.add(key)
            records.append(rec)
    return records


def load_elections(path, candidates) -> tuple[list[ElectionRecord], int]:
    """Load election records, orienting the Democrat into position 0.

    Rows whose candidates appear Republican-first are re-oriented with their
    counts swapped. Rows with zero total votes are dropped. Returns the kept
    records and the number of dropped rows.
    """
    index = candidate_index(candidates)
    records = []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames, ELECTION_COLUMNS, path)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            cycle = int(row["cycle"])
            try:
                office = Office(row["office"])
            except ValueError as exc:
                raise ValueError(f"{where}: {exc}") from None
            cand = []
            for col in ("cand0_id", "cand1_id"):
                key = (row[col], cycle, office)
                if key not in index:
                    raise UnknownCandidateError(f"{where}: unknown candidate {key}")
                cand.append(index[key])
            counts = []
            for col in ("n0", "n1"):
                value = int(row[col])
                if value < 0:
                    raise NegativeCountError(f"{where}: {col} = {value}")
                counts.append(value)
            parties = {cand[0].party, cand[1].party}
            if parties != {Party.DEMOCRAT, Party.REPUBLICAN}:
                raise PartyConflictError(
                    f"{where}: candidates must be one Democrat and one Republican, "
                    f"got {cand[0].party.value} and {cand[1].party.value}"
                )
            if cand[0].party is Party.REPUBLICAN:
                cand.reverse()
                counts.reverse()
            if counts[0] + counts[1] == 0:
                skipped += 1
                continue
            records.append(
                ElectionRecord(
                    precinct_id=row["precinct_id"],
                    state=row["state"],
                    cycle=cycle,
                    office=office,
                    cand0_id=cand[0].candidate_id,
                    cand1_id=cand[1].candidate_id,
                    n0=counts[0],
                    n1=counts[1],
                )
            )
    return records, skipped


def load_centers(path) -> list[PrecinctCenter]:
    """Load precinct geographic centers from CSV."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames, CENTER_COLUMNS, path)
        for lineno, row in enumerate(reader, start=2):
            lon, lat = float(row["lon"]), float(row["lat"])
            if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
                raise ValueError(f"{path}:{lineno}: coordinates out of range ({lon}, {lat})")
            records.append(PrecinctCenter(row["precinct_id"], lon, lat))
    return records


def _check_ring(ring, context):
    if len(ring) < 4:
        raise DegenerateRingError(f"{context}: ring has {len(ring)} vertices, need >= 4")
    if tuple(ring[0]) != tuple(ring[-1]):
        raise DegenerateRingError(f"{context}: ring is not closed")


def load_boundaries(path) -> list[DistrictBoundary]:
    """Load district boundaries from a GeoJSON FeatureCollection.

    Each MultiPolygon member becomes its own boundary entry sharing the
    feature's district number.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    boundaries = []
    for idx, feature in enumerate(doc.get("features", [])):
        context = f"{path}: feature {idx}"
        props = feature.get("properties") or {}
        if "district" not in props:
            raise MissingColumnError(f"{context}: missing 'district' property")
        district = int(props["district"])
        state = str(props.get("state", ""))
        geometry = feature.get("geometry") or {}
        gtype = geometry.get("type")
        if gtype == "Polygon":
            polygons = [geometry["coordinates"]]
        elif gtype == "MultiPolygon":
            polygons = geometry["coordinates"]
        else:
            raise ValueError(f"{context}: unsupported geometry type {gtype!r}")
        for poly in polygons:
            rings = []
            for ring in poly:
                _check_ring(ring, context)
                rings.append(tuple((float(x), float(y)) for x, y in ring))
            boundaries.append(DistrictBoundary(district=district, state=state, rings=tuple(rings)))
    return boundaries


def write_candidates(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CANDIDATE_COLUMNS)
        for r in records:
            writer.writerow(
                [r.candidate_id, repr(r.cfscore), r.party.value, r.state, r.district, r.cycle, r.office.value]
            )


def write_elections(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ELECTION_COLUMNS)
        for r in records:
            writer.writerow(
                [r.precinct_id, r.state, r.cycle, r.office.value, r.cand0_id, r.cand1_id, r.n0, r.n1]
            )


def write_centers(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CENTER_COLUMNS)
        for r in records:
            writer.writerow([r.precinct_id, repr(r.lon), repr(r.lat)])


def write_boundaries(boundaries, path) -> None:
    features = []
    for b in boundaries:
        features.append(
            {
                "type": "Feature",
                "properties": {"district": b.district, "state": b.state},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x, y] for x, y in ring] for ring in b.rings],
                },
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _on_segment(px, py, x1, y1, x2, y2) -> bool:
    cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    if cross != 0.0:
        return False
    return min(x1, x2) <= px <= max(x1, x2) and min(y1, y2) <= py <= max(y1, y2)


def point_in_polygon(point, boundary: DistrictBoundary) -> bool:
    """Even-odd ray-casting containment test over all rings.

    Crossings are accumulated across the exterior ring and every hole, so a
    point inside a hole tests outside. Points lying exactly on any ring edge
    count as inside.
    """
    lon, lat = point
    crossings = 0
    for ring in boundary.rings:
        _check_ring(ring, f"district {boundary.district}")
        for i in range(len(ring) - 1):
            x1, y1 = ring[i]
            x2, y2 = ring[i + 1]
            if _on_segment(lon, lat, x1, y1, x2, y2):
                return True
            if (y1 > lat) != (y2 > lat):
                x_cross = x1 + (lat - y1) * (x2 - x1) / (y2 - y1)
                if lon < x_cross:
                    crossings += 1
    return crossings % 2 == 1


def link_districts(elections, centers, boundaries):
    """Assign each precinct to the district whose boundary contains its center.

    Containment is restricted to boundaries of the precinct's state (an empty
    boundary state matches any). Precincts contained by no boundary are
    returned unmatched with their district left unset; containment by more
    than one district resolves to the lowest district number with a warning.
    The result is independent of the input ordering of elections, centers,
    and boundaries.
    """
    center_map = {c.precinct_id: c for c in centers}
    by_state_order = sorted(boundaries, key=lambda b: (b.district, b.state))
    linked = []
    unmatched = set()
    for election in elections:
        center = center_map.get(election.precinct_id)
        if center is None:
            raise MissingCenterError(f"no center for precinct {election.precinct_id!r}")
        point = (center.lon, center.lat)
        containing = sorted(
            {
                b.district
                for b in by_state_order
                if b.state in ("", election.state) and point_in_polygon(point, b)
            }
        )
        if not containing:
            unmatched.add(election.precinct_id)
            linked.append(election)
            continue
        if len(containing) > 1:
            warnings.warn(
                f"precinct {election.precinct_id!r} contained by districts {containing}; "
                f"using {containing[0]}",
                stacklevel=2,
            )
        linked.append(dataclasses.replace(election, district=containing[0]))
    return linked, sorted(unmatched)
