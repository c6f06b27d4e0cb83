import xml.etree.ElementTree as ET

import pytest

from normsched.instances import make_jp, make_pp_schedule
from normsched.render import job_labels, render_ascii, render_gantt, render_svg, save_gantt_png, save_line_plot
from normsched.timeline import IntervalSchedule

P0_ASCII = """\
M1 |a1^0-----------|a2^0---|a4^0-----------|
M2 |a2^0---|a3^0-----------|
   +       +       +       +               +
   0       1/2     1       3/2             5/2
"""


def test_ascii_for_the_smallest_construction():
    sched = make_pp_schedule(0)
    assert render_ascii(sched, job_labels(make_jp(0), sched)) == P0_ASCII


def test_single_job_fills_one_lane():
    text = render_ascii(IntervalSchedule.from_pieces([(0, 0, 1, 0)]))
    lanes = text.splitlines()[:2]
    assert lanes[0].startswith("M1 |0") and lanes[1] == "M2"


def test_svg_is_well_formed_and_labelled():
    sched = make_pp_schedule(2)
    doc = render_svg(sched, job_labels(make_jp(2), sched), title="levels 0-2")
    root = ET.fromstring(doc)
    texts = {t.text for t in root.iter("{http://www.w3.org/2000/svg}text")}
    labels = {f"a{j}^{i}" for i in range(3) for j in range(1, 5)}
    assert labels <= texts
    assert "55/8" in texts


def test_output_is_byte_stable():
    sched = make_pp_schedule(1)
    assert render_gantt(sched, "svg") == render_gantt(sched, "svg")
    with pytest.raises(ValueError):
        render_gantt(sched, "pdf")


def test_png_figures(tmp_path):
    sched = make_pp_schedule(1)
    save_gantt_png(sched, tmp_path / "g.png", title="t")
    save_line_plot([0, 1], {"s": [1, 2]}, tmp_path / "l.png", "x", "y", "t", logy=True)
    for name in ("g.png", "l.png"):
        assert (tmp_path / name).read_bytes()[:4] == b"\x89PNG"
