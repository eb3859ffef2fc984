"""Picard descent: assemble the E_2 page of pic, run it, and certify Pic.

Rows t >= 2 of the Picard chart are the ring chart shifted up by one in t;
row t = 1 is the cohomology of the units and row t = 0 that of the Picard
group of the cover.  Along the column t = s the final page gives an upper
bound for the order of the Picard group; a matching lower bound (a known
periodicity, or a constructed element) certifies the answer.

A picard document (kind ``"picard"``) has the fields ``chart`` (a chart
dataset, optional for purely algebraic runs), ``row0`` and ``row1`` (row
sources, see ``row_groups``), ``unstable`` (spots where the first unstable
differential is computed from the formula d(x) = d_ring(x) + x^2),
``periodicity`` and ``lower_tag`` (the lower bound and its justification),
``free_rank`` with ``free_filtrations`` (filtrations whose classes assemble
into the free quotient), ``read_s_max``, ``clutching`` (optional
``[pic_order, shift]``) and ``mayer_vietoris`` (optional, for gluing two
algebraic runs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod

from .charts import DEFAULT_TRUNCATION, e2_page, load_chart, ring_rules
from .datasets import load_group, load_json, load_module
from .errors import BoundMismatch, DatasetError, MissingRow, ZeroShift
from .exactalg import FgAbGroup, IntMatrix, subquotient
from .groupcoh import (bar_h, cyclic_h, cyclic_h_module, h1_crossed, invariants, lhs_assemble,
                       modp_bar_dims)
from .ssengine import (ChartPage, DifferentialRule, Spot, Window, import_comparison, run_pages,
                       unstable_first_differential)

STATUSES = ("cyclic-certified", "extension-ambiguous", "bound-only")


# ---------------------------------------------------------------------------
# small algebraic statements


@dataclass
class AlgebraicPic:
    order: int
    group: FgAbGroup | None
    note: str


def algebraic_pic(pic_pi0, periodicity_2k):
    """Order bookkeeping for 0 -> Pic(pi_0) -> Pic(pi_*) -> Z/2k -> 0."""
    if periodicity_2k <= 0 or periodicity_2k % 2:
        raise ValueError("the periodicity must be a positive even number")
    if not pic_pi0.is_finite():
        raise ValueError("Pic(pi_0) must be finite")
    order = pic_pi0.order() * periodicity_2k
    group = None
    if pic_pi0.is_trivial():
        group = FgAbGroup.from_orders([periodicity_2k])
    note = f"extension of Z/{periodicity_2k} by {pic_pi0}"
    return AlgebraicPic(order, group, note)


def omega_weight(t):
    """Row t of the algebraic Picard spectral sequence is H^s(omega^{(t-1)/2}) for odd t >= 3."""
    if t < 3 or t % 2 == 0:
        raise ValueError(f"row {t} carries no power of omega")
    return (t - 1) // 2


def clutching_order(pic_order, shift_per_clutch):
    """Smallest m >= 1 with shift * m = 0 mod pic_order."""
    if shift_per_clutch == 0:
        raise ZeroShift("the clutching shift is zero")
    return pic_order // gcd(pic_order, shift_per_clutch)


# ---------------------------------------------------------------------------
# row sources


def _group_list(row, max_s, truncation):
    """``[(s, [(order, family), ...])]`` for one row source."""
    kind = row.get("kind")
    max_s = int(row.get("max_s", max_s))
    if kind == "zero":
        return []
    if kind == "constant":
        return [(0, [(int(row["order"]), None)])]
    if kind == "explicit":
        return [(int(s), [(int(o), row.get("family")) for o in orders])
                for s, orders in sorted(row["groups"].items(), key=lambda x: int(x[0]))]
    if kind == "case":
        group = run_case(row["case"], truncation)[2].group
        if group is None:
            raise MissingRow(f"case {row['case']} is not certified")
        return [(int(row.get("s", 1)), [(d, None) for d in group.invariant_factors])]
    if kind == "modp":
        group = load_group(row["group"])
        dims = modp_bar_dims(group, int(row["p"]), max_s)
        return [(s, [(int(row["p"]), None)] * d) for s, d in enumerate(dims)]
    if kind == "cyclic":
        n = int(row.get("n", 2))
        out = []
        for s in range(max_s + 1):
            items = []
            for summand in row["summands"]:
                copies = summand.get("copies", 1)
                copies = truncation if copies == "D" else int(copies)
                action = summand.get("action", [[1]])
                h = cyclic_h(IntMatrix(action), n, s, [int(summand["order"])])
                for _ in range(copies):
                    items += [(d, summand.get("family")) for d in h.invariant_factors]
            out.append((s, items))
        return out
    if kind == "gmodule":
        mod = load_module(row["module"])
        method = row.get("method", "bar")
        if method == "lhs":
            res = lhs_assemble(mod, row["normal"], max_s)
            groups = []
            for s in range(max_s + 1):
                h = res.assembled.get(s)
                if h is None:
                    raise MissingRow(f"LHS does not determine H^{s} of {row['module']}")
                groups.append(h)
        elif method == "h1":
            groups = [invariants(mod), h1_crossed(mod)][:max_s + 1]
        elif method == "cyclic":
            gen = mod.group.gens[mod.group.gen_index(row["generator"])]
            groups = [cyclic_h_module(mod, gen, s) for s in range(max_s + 1)]
        elif method == "bar":
            groups = bar_h(mod.group, mod, max_s)
        else:
            raise DatasetError(f"unknown method {method!r}")
        return [(s, [(d, None) for d in h.invariant_factors]) for s, h in enumerate(groups)]
    raise MissingRow(f"unknown row source {kind!r}")


def row_groups(row, max_s, truncation=DEFAULT_TRUNCATION):
    """``{s: FgAbGroup}`` for a row source."""
    return {s: FgAbGroup.from_orders([o for o, _ in items])
            for s, items in _group_list(row, max_s, truncation)}


# ---------------------------------------------------------------------------
# the Picard chart


@dataclass
class PicardInput:
    name: str
    chart: str | None
    row0: dict
    row1: dict
    periodicity: int
    lower_tag: str = ""
    free_rank: int = 0
    free_filtrations: tuple = ()
    read_s_max: int | None = None
    unstable: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    clutching: tuple | None = None
    mayer_vietoris: dict | None = None
    truncation: int = DEFAULT_TRUNCATION
    comment: str = ""


def load_picard(name, truncation=DEFAULT_TRUNCATION):
    doc = load_json("picard", name)
    try:
        return PicardInput(
            doc.get("name", name), doc.get("chart"), doc.get("row0", {"kind": "zero"}),
            doc.get("row1", {"kind": "zero"}), int(doc["periodicity"]), doc.get("lower_tag", ""),
            int(doc.get("free_rank", 0)), tuple(doc.get("free_filtrations", ())),
            doc.get("read_s_max"), list(doc.get("unstable", [])), list(doc.get("rules", [])),
            tuple(doc["clutching"]) if doc.get("clutching") else None,
            doc.get("mayer_vietoris"), truncation, doc.get("comment", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"picard {name}: {exc}") from exc


@dataclass
class PicardRun:
    inp: PicardInput
    ring_page: ChartPage | None
    ring_rules: list
    e2: ChartPage
    rules: list
    rejected: list
    unstable: list
    pages: list


def _row_spots(row, t, tag, window, truncation):
    spots = {}
    max_s = window.s_max
    for s, items in _group_list(row, max_s, truncation):
        if not window.contains(s, t) or not items:
            continue
        keys = [("x", f"{tag}[{s}]#{i}") for i in range(len(items))]
        labels = [f"{tag}^{s}" + (f"#{i}" if len(items) > 1 else "") for i in range(len(items))]
        spots[(s, t)] = Spot(s, t, keys, [o for o, _ in items], [f for _, f in items], labels)
    return spots


def build_pic_e2(inp, ring_page=None):
    """E_2 of the Picard spectral sequence: shifted ring rows plus rows t = 0, 1."""
    if inp.row0 is None or inp.row1 is None:
        raise MissingRow("rows t = 0 and t = 1 need sources")
    if ring_page is not None:
        rw = ring_page.window
        window = Window(rw.s_max, rw.stem_min + 1, rw.stem_max + 1)
        alg = ring_page.algebra
    else:
        s_max = inp.read_s_max if inp.read_s_max is not None else 1
        window = Window(s_max, -s_max, 1)
        alg = None
    spots = {}
    spots.update(_row_spots(inp.row0, 0, "Pic", window, inp.truncation))
    spots.update(_row_spots(inp.row1, 1, "U", window, inp.truncation))
    if ring_page is not None:
        for (s, t), sp in ring_page.spots.items():
            if t >= 1 and window.contains(s, t + 1):
                new = Spot(s, t + 1, sp.keys, sp.e2_orders, sp.families, sp.labels)
                spots[(s, t + 1)] = new
    return ChartPage(2, window, spots, alg, inp.name)


def check_shift(pic_page, ring_page):
    """Rows t >= 2 of the Picard chart agree with ring rows (s, t - 1) elementwise."""
    for (s, t), sp in pic_page.spots.items():
        if t < 2:
            continue
        rsp = ring_page.spots.get((s, t - 1))
        if rsp is None or rsp.keys != sp.keys or rsp.e2_orders != sp.e2_orders:
            return False
    for (s, t), rsp in ring_page.spots.items():
        if t >= 1 and pic_page.window.contains(s, t + 1) and (s, t + 1) not in pic_page.spots:
            return False
    return True


def unstable_rules(pic_page, ring_rule_list, source):
    """First unstable differential at the Picard spot of a ring class.

    ``source`` is a ring monomial at (t + 1, t); its Picard spot is
    (t + 1, t + 1) and the differential is d_{t+1}.  ring_d is read from the
    ring rules, the square is computed in the algebra.
    """
    alg = pic_page.algebra
    m = alg.parse(source)
    s, t = alg.bidegree(m)
    if s != t + 1:
        raise ValueError(f"{source} is not in a bidegree (t + 1, t)")
    r = s
    spot = (s, t + 1)
    sp = pic_page.spots[spot]
    tgt = (s + r, t + 1 + r - 1)
    tsp = pic_page.spots.get(tgt)
    by_source = {}
    for ru in ring_rule_list:
        if ru.r == r and ru.source == (s, t) and len(ru.source_vec) == 1:
            (k, c), = ru.source_vec.items()
            if c == 1:
                by_source[k] = ru.target_vec

    def as_target(vec):
        out = [0] * (tsp.rank if tsp else 0)
        for k, c in vec.items():
            if tsp is None:
                continue
            if k not in tsp.index:
                raise DatasetError(f"{k} is not a basis class at {tgt}")
            out[tsp.index[k]] = (out[tsp.index[k]] + c) % 2
        return out

    ring_cols = [as_target(by_source.get(k, {})) for k in sp.keys]
    sq_cols = []
    for k in sp.keys:
        if k[0] != "m":
            raise DatasetError(f"cannot square the explicit class {k[1]}")
        sq = alg.multiply({k[1]: 1}, {k[1]: 1})
        sq_cols.append(as_target({("m", mm): c for mm, c in sq.items()}))

    def combine(cols):
        def f(vec):
            out = [0] * (tsp.rank if tsp else 0)
            for x, col in zip(vec, cols):
                if x % 2:
                    out = [(a + b) % 2 for a, b in zip(out, col)]
            return out
        return f

    return unstable_first_differential(pic_page, spot, combine(ring_cols), combine(sq_cols), r=r)


def _supplied_rules(inp, page):
    out = []
    alg = page.algebra
    for ru in inp.rules:
        def key(text):
            for sp in page.spots.values():
                if ("x", text) in sp.index:
                    return ("x", text)
            return ("m", alg.parse(text))
        out.append(DifferentialRule(int(ru["r"]), tuple(ru["spot"]),
                                    {key(k): int(v) for k, v in ru["source"].items()},
                                    {key(k): int(v) for k, v in ru.get("target", {}).items()},
                                    "supplied-dataset", ru.get("certificate")))
    return out


def run_picard(inp):
    """Assemble and run the Picard spectral sequence of a case study."""
    ring_page, rr = None, []
    if inp.chart:
        ds = load_chart(inp.chart, inp.truncation)
        ring_page = e2_page(ds)
        rr = ring_rules(ds, ring_page)
    e2 = build_pic_e2(inp, ring_page)
    imported, rejected = ([], []) if ring_page is None else import_comparison(rr, e2)
    unstable = []
    rules = list(imported)
    for u in inp.unstable:
        res = unstable_rules(e2, rr, u["source"])
        unstable.append(res)
        spot = res.rules[0].source if res.rules else None
        rules = [ru for ru in rules if not (ru.source == spot and ru.r == res.rules[0].r)]
        rules += res.rules
    rules += _supplied_rules(inp, e2)
    pages = run_pages(e2, rules)
    return PicardRun(inp, ring_page, rr, e2, rules, rejected, unstable, pages)


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class PicVerdict:
    name: str
    column: dict                    # s -> FgAbGroup on the final page, t = s
    bound: int | None               # product of orders (None when infinite)
    torsion_bound: int
    free_rank: int
    status: str = "bound-only"
    free_filtrations: tuple = ()

    def survivors(self):
        return {s: g.order() if g.is_finite() else 0
                for s, g in sorted(self.column.items()) if not g.is_trivial()}

    def describe(self):
        if self.free_rank:
            return f"Z^{self.free_rank} + torsion of order <= {self.torsion_bound}" \
                if self.free_rank > 1 else f"Z + torsion of order <= {self.torsion_bound}"
        return f"order <= {self.bound}"


def pic_upper_bound(page, rules=(), read_s_max=None, free_filtrations=(), name=""):
    """Run all pages and read the t = s column.

    Differentials that are not supplied are taken to be zero, which can only
    enlarge the surviving groups, so the product is an upper bound.
    ``free_filtrations`` lists the filtrations whose classes assemble into
    the free quotient; they do not count towards the torsion bound.
    """
    final = run_pages(page, list(rules))[-1] if rules else page
    s_max = final.window.s_max if read_s_max is None else read_s_max
    column = {s: final.group(s, s) for s in range(s_max + 1) if (s, s) in final.spots}
    free = sum(g.free_rank for g in column.values())
    torsion = prod(g.order() for s, g in column.items()
                   if s not in free_filtrations and g.is_finite() and not g.is_trivial())
    for s, g in column.items():
        if s not in free_filtrations and not g.is_finite():
            raise BoundMismatch(f"free class at filtration {s} outside the declared free part")
    bound = None if free else torsion
    return PicVerdict(name, column, bound, torsion, free, "bound-only", tuple(free_filtrations))


def verdict_for(run):
    inp = run.inp
    return pic_upper_bound(run.pages[-1], (), inp.read_s_max, inp.free_filtrations, inp.name)


@dataclass
class Conclusion:
    status: str
    group: FgAbGroup | None
    message: str


def conclude_pic(v, lower, constructed_order=None):
    """Compare the upper bound with a lower bound.

    For free rank 0, ``lower`` is the periodicity: bound = lower certifies a
    cyclic group generated by the suspension.  For free rank 1 the torsion
    bound is compared with ``constructed_order``, the order of an explicitly
    constructed torsion element.
    """
    if v.free_rank == 0:
        if lower > v.bound:
            raise BoundMismatch(f"lower bound {lower} exceeds upper bound {v.bound}")
        if lower == v.bound:
            return Conclusion("cyclic-certified", FgAbGroup.from_orders([lower]),
                              f"bound {v.bound} = periodicity {lower}; Z/{lower} certified")
        return Conclusion("bound-only", None, f"{lower} <= |Pic| <= {v.bound}")
    if v.free_rank == 1:
        c = lower if constructed_order is None else constructed_order
        if c > v.torsion_bound:
            raise BoundMismatch(f"constructed order {c} exceeds torsion bound {v.torsion_bound}")
        if c == v.torsion_bound:
            return Conclusion("cyclic-certified", FgAbGroup.from_orders([c, 0]),
                              f"torsion bound {c} = order of constructed element; "
                              f"Z + Z/{c} certified")
        return Conclusion("extension-ambiguous", None,
                          f"Z + torsion with {c} <= |torsion| <= {v.torsion_bound}")
    return Conclusion("bound-only", None, v.describe())


@dataclass
class RelativePic:
    order: int
    group: FgAbGroup | None
    filtrations: dict


def relative_pic(v, conclusion=None):
    """Contributions of filtrations s >= 1 on the t = s column.

    When the whole group is certified cyclic the relative group is a
    subgroup of a cyclic group, hence cyclic of this order.
    """
    parts = {s: o for s, o in v.survivors().items()
             if s >= 1 and o and s not in getattr(v, "free_filtrations", ())}
    order = prod(parts.values()) if parts else 1
    group = None
    if conclusion is not None and conclusion.status == "cyclic-certified" and v.free_rank == 0:
        group = FgAbGroup.from_orders([order])
    return RelativePic(order, group, parts)


def theorem_e_check(rel, group_order):
    """|G|^k kills the relative group, k = number of contributing filtrations."""
    k = len(rel.filtrations)
    return (group_order ** k) % rel.order == 0


# ---------------------------------------------------------------------------
# Mayer-Vietoris gluing of two algebraic runs


def mayer_vietoris_pic(pic_a, pic_b, pic_ab, map_a, map_b, units_cokernel=None):
    """Pic of X = U u V from 0 -> coker(units) -> Pic X -> Pic U + Pic V -> Pic(U n V).

    ``map_a``/``map_b`` are integer matrices from the invariant-factor
    coordinates of Pic U, Pic V to those of Pic(U n V).  The kernel of the
    difference map is computed exactly; ``units_cokernel`` (an FgAbGroup,
    trivial by default) is the contribution of units on the overlap.
    """
    mid = list(pic_a.invariant_factors) + list(pic_b.invariant_factors)
    tgt = list(pic_ab.invariant_factors)
    rows = [list(ra) + [-x for x in rb] for ra, rb in zip(map_a, map_b)]
    g = IntMatrix(rows, len(tgt), len(mid))
    kernel = subquotient(IntMatrix.zeros(len(mid), 0), g, mid, tgt)
    uc = units_cokernel or FgAbGroup.trivial()
    if uc.is_trivial():
        return kernel, "units on the overlap contribute nothing"
    return FgAbGroup.from_orders(list(kernel.invariant_factors) + list(uc.invariant_factors)), \
        f"order bound only: extension of {kernel} by {uc}"


def units_cokernel(source_exponents, target_orders):
    """Cokernel of a map of unit groups given on exponent coordinates."""
    m = IntMatrix(source_exponents, len(target_orders), len(source_exponents[0]))
    return subquotient(m, IntMatrix.zeros(0, len(target_orders)), target_orders, [])


def run_case(name, truncation=DEFAULT_TRUNCATION):
    """``(run or None, verdict, conclusion)`` for a shipped picard document."""
    inp = load_picard(name, truncation)
    if inp.mayer_vietoris:
        mv = inp.mayer_vietoris
        parts = [run_case(p, truncation)[2].group for p in mv["parts"]]
        overlap = FgAbGroup.from_orders(mv["overlap"])
        uc = units_cokernel(mv["units_map"], mv["units_target"])
        group, note = mayer_vietoris_pic(parts[0], parts[1], overlap, mv["map_a"], mv["map_b"], uc)
        v = PicVerdict(inp.name, {}, group.order(), group.order(), group.free_rank)
        return None, v, conclude_pic(v, inp.periodicity)
    run = run_picard(inp)
    v = verdict_for(run)
    if inp.clutching:
        lower = clutching_order(*inp.clutching)
        return run, v, conclude_pic(v, inp.periodicity, lower)
    return run, v, conclude_pic(v, inp.periodicity)
