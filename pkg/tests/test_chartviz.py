import pytest

from picdescent.charts import e2_page, load_chart, run_ring
from picdescent.chartviz import ChartStyle, _positions, load_style, render_svg, spot_items
from picdescent.errors import UnknownGlyph
from picdescent.picard import run_case
from picdescent.ssengine import Window


def test_render_is_deterministic():
    pages, rules = run_ring(load_chart("ko"))
    style = load_style()
    w = Window(7, -4, 7)
    a = render_svg(pages[:1], rules, style, w, title="ko")
    b = render_svg(pages[:1], rules, style, w, title="ko")
    assert a == b
    assert a.startswith("<?xml") and "<svg" in a


def test_ko_e2_placement():
    page = e2_page(load_chart("ko"))
    w = Window(7, -4, 7)
    pos = _positions(page, w)
    alg = page.algebra
    # every basis class in the window is placed once, at x = t - s near y = s
    expected = {((s, t), k) for (s, t), sp in page.spots.items() if w.contains(s, t)
                for k in sp.keys}
    assert set(pos) == expected
    for ((s, t), key), (x, y, pat, label) in pos.items():
        assert x == t - s and abs(y - s) < 0.5
        assert pat == ("Z" if alg.order(key[1]) == 0 else "Z/2")


def test_empty_page_has_axes_only():
    svg = render_svg([], [], load_style(), Window(3, 0, 3))
    assert "<svg" in svg
    assert "t - s" in svg


def test_unknown_glyph():
    page = e2_page(load_chart("ko"))
    style = ChartStyle({"Z": {"marker": "s", "filled": False}})
    with pytest.raises(UnknownGlyph, match="Z/2"):
        render_svg([page], [], style, Window(4, -2, 2))


def test_family_glyphs_and_arrows():
    run, _, _ = run_case("ko-qq")
    items = spot_items(run.e2, 2, 1)
    assert any("[q]" in pat for pat, _, _ in items)
    svg = render_svg(run.pages[:1], run.rules, load_style(), Window(6, -3, 4))
    assert svg.count("<svg") == 1


def test_tmf2_arrows_drawn():
    run, _, _ = run_case("tmf2")
    style = load_style()
    w = Window(16, -2, 8)
    with_rules = render_svg([run.pages[3]], run.rules, style, w)
    without = render_svg([run.pages[3]], [], style, w)
    assert with_rules != without
