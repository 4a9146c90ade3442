"""Serialization round trips and deterministic output bytes."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lemkit import formats
from lemkit.curves import PolylineCurve, circle_curve
from lemkit.errors import FormatError
from lemkit.lemgraph import build_graph
from lemkit.ratfun import Poly, RationalMap
from lemkit.tracer import trace

BERNOULLI = RationalMap(Poly([-1, 0, 1]), Poly([1]))


class TestMapJson:
    def test_round_trip(self):
        r = RationalMap(Poly([1 + 2j, 0, 3 - 0.5j]), Poly([-2j, 1]))
        doc = formats.map_to_json(r)
        back = formats.map_from_json(doc)
        assert np.array_equal(back.num.coeffs, r.num.coeffs)
        assert np.array_equal(back.den.coeffs, r.den.coeffs)

    def test_schema_shape(self):
        doc = formats.map_to_json(BERNOULLI)
        assert doc == {"num": [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
                       "den": [[1.0, 0.0]]}

    @pytest.mark.parametrize("bad", [
        [], {"num": [[1, 0]]}, {"num": "x", "den": [[1, 0]]},
        {"num": [[1]], "den": [[1, 0]]},
        {"num": [[1, "a"]], "den": [[1, 0]]},
    ])
    def test_rejects_malformed(self, bad):
        with pytest.raises(FormatError):
            formats.map_from_json(bad)


class TestCurveCsv:
    def test_round_trip_closed(self):
        curve = circle_curve(0.5 - 0.25j, 2.0, 17)
        text = formats.curve_to_csv(curve)
        back = formats.curve_from_csv(text, closed=True)
        assert back.closed
        assert np.array_equal(back.points, curve.points)

    def test_round_trip_open(self):
        curve = PolylineCurve(np.array([0, 1 + 1j, 2.5j]), closed=False)
        back = formats.curve_from_csv(formats.curve_to_csv(curve),
                                      closed=False)
        assert not back.closed
        assert np.array_equal(back.points, curve.points)

    def test_header_and_no_repeat(self):
        text = formats.curve_to_csv(circle_curve(0, 1, 8))
        lines = text.strip().splitlines()
        assert lines[0] == "re,im"
        assert len(lines) == 9  # header + 8 points, endpoint not repeated

    @pytest.mark.parametrize("bad", [
        "", "x,y\n1,2\n", "re,im\n1\n", "re,im\n1,zzz\n",
    ])
    def test_rejects_malformed(self, bad):
        with pytest.raises(FormatError):
            formats.curve_from_csv(bad, closed=False)


@pytest.fixture(scope="module")
def bern_trace():
    return trace(BERNOULLI, 2.0, grid_n=256)


class TestManifests:
    def test_trace_round_trip(self, bern_trace, tmp_path):
        names = formats.write_edge_csvs(bern_trace.edges, tmp_path)
        doc = formats.trace_manifest(bern_trace, names)
        formats.write_json(tmp_path / "trace_manifest.json", doc)
        back = formats.load_trace(tmp_path / "trace_manifest.json")
        assert back.level == bern_trace.level
        assert back.grid_n == bern_trace.grid_n
        assert back.box == tuple(bern_trace.box)
        assert len(back.edges) == len(bern_trace.edges)
        for e0, e1 in zip(bern_trace.edges, back.edges):
            assert np.array_equal(e0.curve.points, e1.curve.points)
            assert (e0.v_start, e0.v_end) == (e1.v_start, e1.v_end)
        assert np.array_equal(back.rmap.num.coeffs,
                              BERNOULLI.num.coeffs)

    def test_graph_round_trip(self, bern_trace, tmp_path):
        graph = build_graph(bern_trace)
        names = formats.write_edge_csvs(graph.edges, tmp_path)
        formats.write_json(tmp_path / "graph_manifest.json",
                           formats.graph_manifest(graph, names))
        back = formats.load_graph(tmp_path / "graph_manifest.json")
        assert back.faces == graph.faces
        assert back.level == graph.level
        assert back.vertices == graph.vertices
        for e0, e1 in zip(graph.edges, back.edges):
            assert np.array_equal(e0.curve.points, e1.curve.points)
        # the reloaded graph supports point location
        assert back.face_of(0j) == graph.face_of(0j)

    def test_wrong_kind_rejected(self, bern_trace, tmp_path):
        names = formats.write_edge_csvs(bern_trace.edges, tmp_path)
        formats.write_json(tmp_path / "m.json",
                           formats.trace_manifest(bern_trace, names))
        with pytest.raises(FormatError):
            formats.load_graph(tmp_path / "m.json")


class TestDeterminism:
    def test_canonical_json_sorted(self):
        a = formats.canonical_dumps({"b": 1, "a": [2.5, {"z": 0, "y": 1}]})
        b = formats.canonical_dumps({"a": [2.5, {"y": 1, "z": 0}], "b": 1})
        assert a == b
        assert a.index('"a"') < a.index('"b"')

    def test_svg_parses_and_repeats(self):
        curves = [circle_curve(0, 1, 64), circle_curve(2, 0.5, 32)]
        svg1 = formats.svg_curves(curves, markers=[0j, 2 + 0j])
        svg2 = formats.svg_curves(curves, markers=[0j, 2 + 0j])
        assert svg1 == svg2
        ET.fromstring(svg1)

    def test_weld_svg_parses(self):
        t = np.linspace(0, 2 * np.pi, 50)
        ET.fromstring(formats.svg_weld_plot(t, t))

    def test_run_manifest_hashes_inputs(self, tmp_path):
        f = tmp_path / "input.json"
        f.write_text("{}")
        doc = formats.run_manifest("trace", ["--map", "x"], 7, [f], 0.25)
        import hashlib
        assert doc["inputs"][str(f)] == hashlib.sha256(b"{}").hexdigest()
        assert doc["seed"] == 7
        assert doc["command"] == "trace"
