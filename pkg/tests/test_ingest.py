import numpy as np
import pytest

from prefinfer.errors import (
    DegenerateRingError,
    DuplicateKeyError,
    MissingCenterError,
    MissingColumnError,
    NegativeCountError,
    NonFiniteScoreError,
    PartyConflictError,
    UnknownCandidateError,
)
from prefinfer.ingest import (
    DistrictBoundary,
    Office,
    Party,
    PrecinctCenter,
    link_districts,
    load_boundaries,
    load_candidates,
    load_centers,
    load_elections,
    point_in_polygon,
    write_boundaries,
    write_candidates,
    write_elections,
)

CAND_HEADER = "candidate_id,cfscore,party,state,district,cycle,office\n"
ELEC_HEADER = "precinct_id,state,cycle,office,cand0_id,cand1_id,n0,n1\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


@pytest.fixture
def basic_candidates(tmp_path):
    return load_candidates(write(
        tmp_path, "cands.csv",
        CAND_HEADER
        + "A,-1.2,Democrat,TX,7,2008,House\n"
        + "B,0.9,Republican,TX,7,2008,House\n"
    ))


class TestLoadCandidates:
    def test_field_mapping(self, basic_candidates):
        rec = basic_candidates[0]
        assert rec.candidate_id == "A"
        assert rec.cfscore == -1.2
        assert rec.party is Party.DEMOCRAT
        assert rec.state == "TX"
        assert rec.district == 7
        assert rec.cycle == 2008
        assert rec.office is Office.HOUSE

    def test_nan_score_rejected(self, tmp_path):
        path = write(tmp_path, "bad.csv", CAND_HEADER + "A,NaN,Democrat,TX,7,2008,House\n")
        with pytest.raises(NonFiniteScoreError):
            load_candidates(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = write(
            tmp_path, "dup.csv",
            CAND_HEADER
            + "A,-1.2,Democrat,TX,7,2008,House\n"
            + "A,0.4,Democrat,TX,3,2008,House\n"
        )
        with pytest.raises(DuplicateKeyError):
            load_candidates(path)

    def test_missing_column(self, tmp_path):
        path = write(tmp_path, "short.csv", "candidate_id,cfscore\nA,-1.2\n")
        with pytest.raises(MissingColumnError):
            load_candidates(path)


class TestLoadElections:
    def test_reorients_republican_first(self, tmp_path, basic_candidates):
        path = write(tmp_path, "e.csv", ELEC_HEADER + "P1,TX,2008,House,B,A,10,30\n")
        records, skipped = load_elections(path, basic_candidates)
        assert skipped == 0
        rec = records[0]
        assert rec.cand0_id == "A" and rec.cand1_id == "B"
        assert rec.n0 == 30 and rec.n1 == 10

    def test_zero_vote_rows_dropped(self, tmp_path, basic_candidates):
        path = write(
            tmp_path, "e.csv",
            ELEC_HEADER + "P1,TX,2008,House,A,B,0,0\nP2,TX,2008,House,A,B,5,5\n"
        )
        records, skipped = load_elections(path, basic_candidates)
        assert skipped == 1
        assert [r.precinct_id for r in records] == ["P2"]

    def test_unknown_candidate(self, tmp_path, basic_candidates):
        path = write(tmp_path, "e.csv", ELEC_HEADER + "P1,TX,2008,House,A,ZZZ,1,2\n")
        with pytest.raises(UnknownCandidateError):
            load_elections(path, basic_candidates)

    def test_negative_count(self, tmp_path, basic_candidates):
        path = write(tmp_path, "e.csv", ELEC_HEADER + "P1,TX,2008,House,A,B,-1,2\n")
        with pytest.raises(NegativeCountError):
            load_elections(path, basic_candidates)

    def test_same_party_rejected(self, tmp_path):
        candidates = load_candidates(write(
            tmp_path, "c.csv",
            CAND_HEADER
            + "A,-1.2,Democrat,TX,7,2008,House\n"
            + "C,-0.5,Democrat,TX,7,2008,House\n"
        ))
        path = write(tmp_path, "e.csv", ELEC_HEADER + "P1,TX,2008,House,A,C,1,2\n")
        with pytest.raises(PartyConflictError):
            load_elections(path, candidates)

    def test_third_party_rejected(self, tmp_path):
        candidates = load_candidates(write(
            tmp_path, "c.csv",
            CAND_HEADER
            + "A,-1.2,Democrat,TX,7,2008,House\n"
            + "O,0.1,Other,TX,7,2008,House\n"
        ))
        path = write(tmp_path, "e.csv", ELEC_HEADER + "P1,TX,2008,House,A,O,1,2\n")
        with pytest.raises(PartyConflictError):
            load_elections(path, candidates)

    def test_every_loaded_record_is_democrat_first(self, tmp_path, basic_candidates):
        rows = ["P1,TX,2008,House,A,B,3,4", "P2,TX,2008,House,B,A,5,6"]
        path = write(tmp_path, "e.csv", ELEC_HEADER + "\n".join(rows) + "\n")
        records, _ = load_elections(path, basic_candidates)
        assert all(r.cand0_id == "A" for r in records)


class TestRoundTrip:
    def test_candidates(self, tmp_path, basic_candidates):
        out = tmp_path / "out.csv"
        write_candidates(basic_candidates, out)
        assert load_candidates(out) == basic_candidates

    def test_elections(self, tmp_path, basic_candidates):
        path = write(
            tmp_path, "e.csv",
            ELEC_HEADER + "P1,TX,2008,House,A,B,3,4\nP2,TX,2008,House,A,B,7,1\n"
        )
        records, _ = load_elections(path, basic_candidates)
        out = tmp_path / "out.csv"
        write_elections(records, out)
        reloaded, skipped = load_elections(out, basic_candidates)
        assert skipped == 0
        assert reloaded == records


SQUARE = DistrictBoundary(
    district=1, state="TX",
    rings=(((0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (0.0, 0.0)),),
)


class TestPointInPolygon:
    def test_interior(self):
        assert point_in_polygon((1.0, 1.0), SQUARE)

    def test_exterior(self):
        assert not point_in_polygon((3.0, 1.0), SQUARE)

    def test_edge_counts_inside(self):
        assert point_in_polygon((0.0, 1.0), SQUARE)
        assert point_in_polygon((1.0, 2.0), SQUARE)
        assert point_in_polygon((0.0, 0.0), SQUARE)  # vertex

    def test_hole_excluded(self):
        with_hole = DistrictBoundary(
            district=1, state="TX",
            rings=(
                ((0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (0.0, 0.0)),
                ((0.75, 0.75), (1.25, 0.75), (1.25, 1.25), (0.75, 1.25), (0.75, 0.75)),
            ),
        )
        assert not point_in_polygon((1.0, 1.0), with_hole)
        assert point_in_polygon((0.5, 0.5), with_hole)
        # the hole's edge still counts as inside the district
        assert point_in_polygon((0.75, 1.0), with_hole)

    def test_degenerate_ring(self):
        bad = DistrictBoundary(district=1, state="TX",
                               rings=(((0.0, 0.0), (1.0, 0.0), (0.0, 0.0)),))
        with pytest.raises(DegenerateRingError):
            point_in_polygon((0.5, 0.5), bad)


def unit_square(district, x0):
    return DistrictBoundary(
        district=district, state="TX",
        rings=(((x0, 0.0), (x0 + 1.0, 0.0), (x0 + 1.0, 1.0), (x0, 1.0), (x0, 0.0)),),
    )


class TestLinkDistricts:
    def make_elections(self, tmp_path, precinct_ids):
        candidates = load_candidates(write(
            tmp_path, "c.csv",
            CAND_HEADER
            + "A,-1.2,Democrat,TX,7,2008,House\n"
            + "B,0.9,Republican,TX,7,2008,House\n"
        ))
        rows = "".join(f"{p},TX,2008,House,A,B,3,4\n" for p in precinct_ids)
        records, _ = load_elections(write(tmp_path, "e.csv", ELEC_HEADER + rows), candidates)
        return records

    def test_hand_geometry(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa", "Pb", "Pc"])
        centers = [
            PrecinctCenter("Pa", 0.5, 0.5),
            PrecinctCenter("Pb", 1.5, 0.5),
            PrecinctCenter("Pc", 0.25, 0.75),
        ]
        boundaries = [unit_square(1, 0.0), unit_square(2, 1.0)]
        linked, unmatched = link_districts(elections, centers, boundaries)
        assert unmatched == []
        assert {r.precinct_id: r.district for r in linked} == {"Pa": 1, "Pb": 2, "Pc": 1}

    def test_unmatched_excluded(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa", "Pfar"])
        centers = [PrecinctCenter("Pa", 0.5, 0.5), PrecinctCenter("Pfar", 50.0, 50.0)]
        linked, unmatched = link_districts(elections, centers, [unit_square(1, 0.0)])
        assert unmatched == ["Pfar"]
        by_id = {r.precinct_id: r for r in linked}
        assert by_id["Pa"].district == 1
        assert by_id["Pfar"].district is None

    def test_missing_center(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa"])
        with pytest.raises(MissingCenterError):
            link_districts(elections, [], [unit_square(1, 0.0)])

    def test_overlap_resolves_to_lowest_with_warning(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa"])
        centers = [PrecinctCenter("Pa", 0.5, 0.5)]
        overlapping = [unit_square(5, 0.0), unit_square(2, 0.0)]
        with pytest.warns(UserWarning):
            linked, _ = link_districts(elections, centers, overlapping)
        assert linked[0].district == 2

    def test_other_state_boundary_ignored(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa"])
        centers = [PrecinctCenter("Pa", 0.5, 0.5)]
        ny = DistrictBoundary(district=9, state="NY", rings=unit_square(9, 0.0).rings)
        linked, unmatched = link_districts(elections, centers, [ny])
        assert unmatched == ["Pa"]

    def test_order_independent(self, tmp_path):
        elections = self.make_elections(tmp_path, ["Pa", "Pb", "Pc"])
        centers = [
            PrecinctCenter("Pa", 0.5, 0.5),
            PrecinctCenter("Pb", 1.5, 0.5),
            PrecinctCenter("Pc", 0.25, 0.75),
        ]
        boundaries = [unit_square(1, 0.0), unit_square(2, 1.0)]
        base, _ = link_districts(elections, centers, boundaries)
        expected = {r.precinct_id: r.district for r in base}
        rng = np.random.default_rng(3)
        for _ in range(5):
            es = list(elections); rng.shuffle(es)
            cs = list(centers); rng.shuffle(cs)
            bs = list(boundaries); rng.shuffle(bs)
            linked, _ = link_districts(es, cs, bs)
            assert {r.precinct_id: r.district for r in linked} == expected


class TestGeoJson:
    def test_round_trip(self, tmp_path):
        boundaries = [unit_square(1, 0.0), unit_square(2, 1.0)]
        path = tmp_path / "d.geojson"
        write_boundaries(boundaries, path)
        assert load_boundaries(path) == boundaries

    def test_multipolygon_splits(self, tmp_path):
        path = tmp_path / "multi.geojson"
        path.write_text("""{
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "properties": {"district": 3, "state": "TX"},
            "geometry": {"type": "MultiPolygon", "coordinates": [
              [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
              [[[5,5],[6,5],[6,6],[5,6],[5,5]]]
            ]}
          }]
        }""")
        boundaries = load_boundaries(path)
        assert len(boundaries) == 2
        assert all(b.district == 3 for b in boundaries)

    def test_missing_district_property(self, tmp_path):
        path = tmp_path / "bad.geojson"
        path.write_text("""{
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "properties": {},
            "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,1],[0,1],[0,0]]]}
          }]
        }""")
        with pytest.raises(MissingColumnError):
            load_boundaries(path)

    def test_degenerate_ring_rejected(self, tmp_path):
        path = tmp_path / "bad.geojson"
        path.write_text("""{
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "properties": {"district": 1},
            "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[0,0]]]}
          }]
        }""")
        with pytest.raises(DegenerateRingError):
            load_boundaries(path)


class TestLoadCenters:
    def test_basic(self, tmp_path):
        path = write(tmp_path, "centers.csv", "precinct_id,lon,lat\nP1,-97.5,30.25\n")
        centers = load_centers(path)
        assert centers == [PrecinctCenter("P1", -97.5, 30.25)]

    def test_out_of_range(self, tmp_path):
        path = write(tmp_path, "centers.csv", "precinct_id,lon,lat\nP1,200.0,30.0\n")
        with pytest.raises(ValueError):
            load_centers(path)
