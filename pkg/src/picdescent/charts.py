"""Chart datasets: loading, merging and running the ring spectral sequence.

A chart document (kind ``"chart"``) has the fields

``generators``
    list of ``{name, s, t, order, invertible, cap, floor, family, enum}``.
``relations``
    list of ``{lhs: monomial, rhs: {monomial: coefficient}}``; an empty rhs
    kills the monomial.
``explicit``
    classes without multiplicative structure: ``{label, s, t, order, family}``.
``window``
    ``{s_max, stem_min, stem_max}`` for the ring chart.
``stages``
    Leibniz seeds per page: ``{r, seeds: {monomial: target}, permanent: [...]}``.
``rules``
    rules given verbatim: ``{r, spot: [s, t], source: {...}, target: {...}}``;
    keys are monomials or explicit labels.
``merge``
    names of other chart documents whose contents are added first.

Monomials are written ``"h1^3 c4 c6 Delta^-1"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .datasets import load_json
from .errors import DatasetError
from .ssengine import (DifferentialRule, ExplicitClass, GeneratorSpec, MonomialAlgebra, Window,
                       e2_from_dataset, leibniz_close, run_pages)

DEFAULT_TRUNCATION = 24


@dataclass
class ChartDataset:
    name: str
    generators: list
    relations: list
    explicit: list
    window: Window
    stages: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    comment: str = ""

    def algebra(self):
        return MonomialAlgebra(self.generators, self._parsed_relations())

    def _parsed_relations(self):
        probe = MonomialAlgebra(self.generators)
        out = []
        for rel in self.relations:
            lhs = probe.parse(rel["lhs"])
            rhs = {probe.parse(k): int(v) for k, v in rel.get("rhs", {}).items()}
            out.append((lhs, rhs))
        return out


def _generator(doc, truncation):
    cap = doc.get("cap")
    floor = doc.get("floor")
    if cap == "D":
        cap = truncation
    if floor == "-D":
        floor = -truncation
    enum = doc.get("enum")
    return GeneratorSpec(doc["name"], int(doc["s"]), int(doc["t"]), int(doc.get("order", 0)),
                         bool(doc.get("invertible", False)), cap, floor, doc.get("family"),
                         tuple(enum) if enum else None)


def load_chart(name, truncation=DEFAULT_TRUNCATION, window=None):
    doc = load_json("chart", name)
    try:
        ds = _from_doc(doc, truncation)
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"chart {name}: {exc}") from exc
    if window is not None:
        ds.window = window
    return ds


def _from_doc(doc, truncation):
    gens, rels, explicit, stages, rules = [], [], [], [], []
    for other in doc.get("merge", []):
        sub = load_chart(other, truncation)
        gens, rels, explicit, stages, rules = _merge(
            (gens, rels, explicit, stages, rules),
            (sub.generators, sub.relations, sub.explicit, sub.stages, sub.rules))
    own = ([_generator(g, truncation) for g in doc.get("generators", [])],
           list(doc.get("relations", [])),
           [ExplicitClass(x["label"], int(x["s"]), int(x["t"]), int(x.get("order", 0)),
                          x.get("family")) for x in doc.get("explicit", [])],
           [dict(st) for st in doc.get("stages", [])],
           [dict(ru) for ru in doc.get("rules", [])])
    gens, rels, explicit, stages, rules = _merge((gens, rels, explicit, stages, rules), own)
    w = doc["window"]
    return ChartDataset(doc.get("name", ""), gens, rels, explicit,
                        Window(int(w["s_max"]), int(w["stem_min"]), int(w["stem_max"])),
                        stages, rules, doc.get("comment", ""))


def _merge(a, b):
    gens = list(a[0])
    names = {g.name: g for g in gens}
    for g in b[0]:
        if g.name in names:
            if names[g.name] != g:
                raise DatasetError(f"generator {g.name} declared twice with different data")
        else:
            gens.append(g)
            names[g.name] = g
    rels = list(a[1])
    seen = {r["lhs"] for r in rels}
    rels += [r for r in b[1] if r["lhs"] not in seen]
    labels = {x.label for x in a[2]}
    explicit = list(a[2]) + [x for x in b[2] if x.label not in labels]
    stages = {st["r"]: {"r": st["r"], "seeds": dict(st.get("seeds", {})),
                        "permanent": list(st.get("permanent", []))} for st in a[3]}
    for st in b[3]:
        cur = stages.setdefault(st["r"], {"r": st["r"], "seeds": {}, "permanent": []})
        for k, v in st.get("seeds", {}).items():
            if k in cur["seeds"]:
                cur["seeds"][k] = _add_targets(cur["seeds"][k], v)
            else:
                cur["seeds"][k] = v
        cur["permanent"] += [p for p in st.get("permanent", []) if p not in cur["permanent"]]
    for st in stages.values():
        st["permanent"] = [p for p in st["permanent"] if p not in st["seeds"]]
    rules = list(a[4]) + list(b[4])
    return gens, rels, explicit, [stages[r] for r in sorted(stages)], rules


def _add_targets(x, y):
    x = {x: 1} if isinstance(x, str) else dict(x)
    y = {y: 1} if isinstance(y, str) else y
    for k, v in y.items():
        x[k] = x.get(k, 0) + v
    return x


def _key(alg, explicit_labels, text):
    if text in explicit_labels:
        return ("x", text)
    return ("m", alg.parse(text))


def e2_page(ds, check_confluence=True):
    alg = ds.algebra()
    return e2_from_dataset(alg, ds.window, ds.explicit, ds.name, check_confluence)


def ring_rules(ds, page):
    """All ring differentials: Leibniz closures of the seeds plus verbatim rules."""
    alg = page.algebra
    labels = {x.label for x in ds.explicit}
    out = []
    for st in ds.stages:
        out += leibniz_close(page, st.get("seeds", {}), st.get("permanent", []), r=int(st["r"]))
    for ru in ds.rules:
        src = {_key(alg, labels, k): int(v) for k, v in ru["source"].items()}
        tgt = {_key(alg, labels, k): int(v) for k, v in ru.get("target", {}).items()}
        out.append(DifferentialRule(int(ru["r"]), tuple(ru["spot"]), src, tgt,
                                    ru.get("provenance", "supplied-dataset"),
                                    ru.get("certificate")))
    return out


def run_ring(ds):
    """``(pages, rules)`` for the ring spectral sequence of a chart dataset."""
    page = e2_page(ds)
    rules = ring_rules(ds, page)
    return run_pages(page, rules), rules
