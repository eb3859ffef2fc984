"""SVG charts of spectral sequence pages in Adams indexing.

Classes are drawn at (t - s, s).  One glyph per basis class; a run of
classes from one coefficient family (Z/2[j], Z[[q]], ...) at a bidegree is
drawn as a single family glyph.  Stacked glyphs are offset vertically in
the reading order of their labels.  Output is byte-stable: the SVG hash salt is fixed,
text stays text and no date is written.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .datasets import load_json  # noqa: E402
from .errors import UnknownGlyph  # noqa: E402

SVG_RC = {
    "svg.hashsalt": "picdescent",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 8,
    "axes.linewidth": 0.6,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "legend.fontsize": 7,
    "lines.linewidth": 0.8,
}

FAMILY_NAMES = {"j": "j", "q": "q"}


@dataclass
class ChartStyle:
    glyphs: dict
    lines: dict = field(default_factory=dict)
    arrows: dict = field(default_factory=dict)
    size: tuple = (7.0, 5.0)

    def glyph(self, pattern):
        if pattern not in self.glyphs:
            raise UnknownGlyph(f"no glyph for order pattern {pattern!r}")
        return self.glyphs[pattern]

    def arrow(self, r):
        return self.arrows.get(str(r), self.arrows.get("default", {"color": "black"}))


def load_style(name="default"):
    doc = load_json("style", name)
    return ChartStyle(doc["glyphs"], doc.get("lines", {}), doc.get("arrows", {}),
                      tuple(doc.get("size", (7.0, 5.0))))


def _base(order):
    return "Z" if order == 0 else f"Z/{order}"


def spot_items(page, s, t):
    """``[(pattern, label, key)]`` for the classes drawn at one bidegree."""
    sp = page.spots.get((s, t))
    if sp is None:
        return []
    if page.r == 2:
        raw = [(o, sp.families[i], sp.labels[i], sp.keys[i])
               for i, o in enumerate(sp.e2_orders)]
    else:
        g = sp.group()
        raw = []
        for o, vec in zip(g.invariant_factors, g.generators):
            i = next(k for k, x in enumerate(vec) if x)
            raw.append((o, sp.families[i], sp.labels[i], sp.keys[i]))
    out = []
    seen = set()
    for o, fam, label, key in sorted(raw, key=lambda x: x[2]):
        if fam:
            pat = f"{_base(o)}[{FAMILY_NAMES.get(fam, fam)}]"
            if pat in seen:
                continue
            seen.add(pat)
            out.append((pat, f"{label} ({fam} family)", key))
        else:
            out.append((_base(o), label, key))
    return out


def _draw_glyph(ax, x, y, glyph, color="black"):
    size = glyph.get("size", 5)
    face = color if glyph.get("filled", True) else "white"
    marker = glyph.get("marker", "o")
    if marker in ("x", "+"):
        ax.plot([x], [y], marker=marker, color=color, markersize=size, linestyle="none",
                markeredgewidth=1.0)
    else:
        ax.plot([x], [y], marker=marker, markerfacecolor=face, markeredgecolor=color,
                markersize=size, linestyle="none", markeredgewidth=0.8)
    if glyph.get("dot"):
        ax.plot([x], [y], marker="o", color=color, markersize=1.6, linestyle="none")


def _positions(page, window):
    pos = {}
    for (s, t) in page.bidegrees():
        if not window.contains(s, t):
            continue
        items = spot_items(page, s, t)
        n = len(items)
        step = min(0.16, 0.7 / max(n - 1, 1))
        for k, (pat, label, key) in enumerate(items):
            # first label on top
            pos[((s, t), key)] = (t - s, s + ((n - 1) / 2 - k) * step, pat, label)
    return pos


def _structure_lines(ax, page, pos, style):
    alg = page.algebra
    if alg is None:
        return
    for name, line in sorted(style.lines.items()):
        if name not in alg.pos:
            continue
        g = alg.gens[alg.pos[name]]
        for ((s, t), key), (x, y, _, _) in sorted(pos.items(), key=lambda kv: str(kv[0])):
            if key[0] != "m":
                continue
            prod = alg.multiply({alg.gen(name): 1}, {key[1]: 1})
            if len(prod) != 1:
                continue
            (m, _), = prod.items()
            other = pos.get(((s + g.s, t + g.t), ("m", m)))
            if other:
                ax.plot([x, other[0]], [y, other[1]], color=line.get("color", "0.4"),
                        linewidth=0.5, zorder=1)


def _arrows(ax, rules, pos, style, window):
    drawn = set()
    for ru in rules:
        if not ru.target_vec or not any(ru.target_vec.values()):
            continue
        src, tgt = ru.source, ru.target
        if not (window.contains(*src) and window.contains(*tgt)):
            continue
        skey = next(iter(ru.source_vec))
        tkey = sorted(ru.target_vec, key=str)[0]
        a = pos.get((src, skey))
        b = pos.get((tgt, tkey))
        if a is None or b is None:
            continue
        sig = (src, tgt, ru.r, a[:2], b[:2])
        if sig in drawn:
            continue
        drawn.add(sig)
        ax.annotate("", xy=b[:2], xytext=a[:2],
                    arrowprops={"arrowstyle": "->", "color": style.arrow(ru.r).get("color", "k"),
                                "linewidth": 0.7, "shrinkA": 2, "shrinkB": 2})


def render_svg(pages, rules, style, window, title=None):
    """One panel per page; returns the SVG document as a string."""
    pages = list(pages)
    rules = list(rules)
    with plt.rc_context(SVG_RC):
        n = max(len(pages), 1)
        fig, axes = plt.subplots(1, n, figsize=(style.size[0] * n, style.size[1]), squeeze=False)
        patterns = set()
        for ax, page in zip(axes[0], pages or [None]):
            ax.set_xlim(window.stem_min - 0.7, window.stem_max + 0.7)
            ax.set_ylim(-0.7, window.s_max + 0.7)
            ax.set_xticks(range(window.stem_min, window.stem_max + 1))
            ax.set_yticks(range(0, window.s_max + 1))
            ax.grid(True, color="0.92", linewidth=0.4)
            ax.set_xlabel("t - s")
            ax.set_ylabel("s")
            if page is None:
                continue
            ax.set_title(f"{page.name} E_{page.r}" if page.name else f"E_{page.r}")
            pos = _positions(page, window)
            for _, (_, _, pat, _) in pos.items():
                style.glyph(pat)
            _structure_lines(ax, page, pos, style)
            for _, (x, y, pat, _) in sorted(pos.items(), key=lambda kv: str(kv[0])):
                _draw_glyph(ax, x, y, style.glyph(pat))
                patterns.add(pat)
            _arrows(ax, [ru for ru in rules if ru.r >= page.r], pos, style, window)
        handles = []
        for pat in sorted(patterns):
            glyph = style.glyph(pat)
            h, = axes[0][0].plot([], [], marker=glyph.get("marker", "o"), linestyle="none",
                                 markerfacecolor="black" if glyph.get("filled", True) else "white",
                                 markeredgecolor="black", color="black", label=pat)
            handles.append(h)
        if handles:
            axes[0][-1].legend(handles=handles, loc="upper right", frameon=False)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
