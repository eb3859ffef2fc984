"""Cohomology of finite groups with coefficients in finitely generated modules.

Groups are finite matrix groups over Z/n, enumerated by closure.  Modules
are diagonally presented abelian groups (one order per coordinate, 0 for a
free coordinate) with one integer action matrix per group generator; the
matrix acts on column vectors, ``new = A @ old``.

Several independent routes are available and are cross-checked in the tests:
invariants, H^1 by crossed homomorphisms, periodic cohomology of cyclic
groups, the normalized bar complex, a small free F_p[G]-resolution for mod p
dimensions, and the Lyndon-Hochschild-Serre E_2 page for a cyclic normal
subgroup.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, NotCyclic, NotNormal, NotPrime
from .exactalg import (FgAbGroup, IntMatrix, SparseIntMatrix, is_prime, modp_rank,
                       presented_h_orders, subquotient)

DEFAULT_BUDGET = 10 ** 7


# ---------------------------------------------------------------------------
# groups


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``mul[a][b]`` is the index of ``a*b``; ``gens`` are element indices with
    names.  Element 0 is the identity.
    """

    def __init__(self, mul, gens, gen_names=None, element_names=None):
        self.mul = mul
        self.gens = list(gens)
        self.gen_names = list(gen_names) if gen_names else [f"g{i}" for i in self.gens]
        self.order = len(mul)
        self.identity = 0
        inv = [None] * self.order
        for a in range(self.order):
            for b in range(self.order):
                if mul[a][b] == 0:
                    inv[a] = b
                    break
        self.inv = inv
        self.element_names = element_names
        self._bfs()

    def _bfs(self):
        """Spanning tree of the Cayley graph with edges h -> g_i h."""
        parent = {0: None}
        order = [0]
        queue = deque([0])
        while queue:
            h = queue.popleft()
            for i, g in enumerate(self.gens):
                x = self.mul[g][h]
                if x not in parent:
                    parent[x] = (i, h)
                    order.append(x)
                    queue.append(x)
        if len(parent) != self.order:
            raise ValueError("generators do not generate the group")
        self.tree_parent = parent
        self.bfs_order = order

    def gen_index(self, name):
        return self.gen_names.index(name)

    def element_order(self, a):
        k, x = 1, a
        while x != 0:
            x = self.mul[x][a]
            k += 1
        return k

    def power(self, a, k):
        x = 0
        for _ in range(k % self.element_order(a)):
            x = self.mul[x][a]
        return x

    def subgroup(self, elems):
        """Closure of ``elems`` as a sorted list of indices."""
        out = {0}
        frontier = list(elems)
        while frontier:
            x = frontier.pop()
            if x in out:
                continue
            out.add(x)
            for y in list(out):
                for z in (self.mul[x][y], self.mul[y][x]):
                    if z not in out:
                        frontier.append(z)
        return sorted(out)

    def is_normal(self, sub):
        s = set(sub)
        for g in self.gens:
            for n in sub:
                if self.mul[self.mul[g][n]][self.inv[g]] not in s:
                    return False
        return True

    def quotient(self, sub):
        """``(Q, coset_of)``: the quotient group by a normal subgroup."""
        if not self.is_normal(sub):
            raise NotNormal("subgroup is not normal")
        coset_of = [None] * self.order
        reps = []
        for a in range(self.order):
            if coset_of[a] is None:
                k = len(reps)
                reps.append(a)
                for n in sub:
                    coset_of[self.mul[a][n]] = k
        mul = [[coset_of[self.mul[a][b]] for b in reps] for a in reps]
        qgens = sorted({coset_of[g] for g in self.gens} - {0})
        names = [self.gen_names[[coset_of[g] for g in self.gens].index(k)] for k in qgens]
        q = FiniteGroup(mul, qgens or [0], names or ["e"])
        q.reps = reps
        return q, coset_of

    def abelianization(self):
        """Invariant factors of G^ab, via the relation lattice of generator images."""
        comm = self.subgroup([self.mul[self.mul[a][b]][self.inv[self.mul[b][a]]]
                              for a in self.gens for b in self.gens] +
                             [self.mul[self.mul[g][a]][self.inv[self.mul[a][g]]]
                              for g in range(self.order) for a in self.gens])
        q, coset_of = self.quotient(comm)
        k = len(q.gens)
        seen = {0: (0,) * k}
        rels = []
        queue = deque([0])
        while queue:
            x = queue.popleft()
            vec = seen[x]
            for i, g in enumerate(q.gens):
                y = q.mul[g][x]
                nv = tuple(v + (j == i) for j, v in enumerate(vec))
                if y in seen:
                    diff = [a - b for a, b in zip(nv, seen[y])]
                    if any(diff):
                        rels.append(diff)
                else:
                    seen[y] = nv
                    queue.append(y)
        for i, g in enumerate(q.gens):
            rels.append([q.element_order(g) * (j == i) for j in range(k)])
        from .exactalg import elementary_divisors
        rank, divs = elementary_divisors(IntMatrix(rels, len(rels), k))
        return FgAbGroup.from_orders(divs + [0] * (k - rank))

    def is_cyclic_subgroup(self, sub):
        return any(self.element_order(x) == len(sub) for x in sub)


def _mat_mul_mod(a, b, n):
    k = len(a)
    return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(k)) % n for j in range(k))
                 for i in range(k))


class FiniteMatrixGroup(FiniteGroup):
    """Closure of named invertible k x k matrices over Z/n.

    >>> g = FiniteMatrixGroup(2, {"s": [[0, 1], [1, 1]], "t": [[0, 1], [1, 0]]})
    >>> g.order
    6
    """

    def __init__(self, modulus, generators, name=None):
        self.modulus = modulus
        self.name = name
        self.gen_matrices = {k: tuple(tuple(x % modulus for x in row) for row in m)
                             for k, m in generators.items()}
        names = list(self.gen_matrices)
        k = len(next(iter(self.gen_matrices.values())))
        ident = tuple(tuple(int(i == j) for j in range(k)) for i in range(k))
        elems = [ident]
        index = {ident: 0}
        queue = deque([ident])
        while queue:
            h = queue.popleft()
            for nm in names:
                x = _mat_mul_mod(self.gen_matrices[nm], h, modulus)
                if x not in index:
                    index[x] = len(elems)
                    elems.append(x)
                    queue.append(x)
        self.elements = elems
        self.index = index
        mul = [[index[_mat_mul_mod(a, b, modulus)] for b in elems] for a in elems]
        super().__init__(mul, [index[self.gen_matrices[nm]] for nm in names], names)

    def element(self, m):
        key = tuple(tuple(x % self.modulus for x in row) for row in m)
        return self.index[key]


# ---------------------------------------------------------------------------
# modules


@dataclass
class GModule:
    """A diagonally presented abelian group with a group action.

    ``orders[i]`` is the order of the i-th basis coordinate (0 = free).
    ``action[name]`` is the integer matrix of the generator ``name``.
    """

    group: FiniteGroup
    orders: list
    action: dict
    labels: list = None
    name: str = ""
    _rho: dict = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.orders)
        if self.labels is None:
            self.labels = [f"e{i}" for i in range(n)]
        self.action = {k: IntMatrix(v) if not isinstance(v, IntMatrix) else v
                       for k, v in self.action.items()}
        for k, m in self.action.items():
            if (m.rows, m.cols) != (n, n):
                raise DimensionMismatch(f"action matrix {k} is not {n}x{n}")
            self._check_well_defined(m, k)
        self._build_rho()

    @property
    def rank(self):
        return len(self.orders)

    def underlying(self):
        return FgAbGroup.from_orders(self.orders)

    def reduce(self, vec):
        return [v % o if o else v for v, o in zip(vec, self.orders)]

    def reduce_matrix(self, m):
        return IntMatrix([[x % o if o else x for x in row] for row, o in zip(m.data, self.orders)],
                         m.rows, m.cols)

    def _check_well_defined(self, m, name):
        for c, oc in enumerate(self.orders):
            if not oc:
                continue
            for r, orow in enumerate(self.orders):
                x = m.data[r][c] * oc
                if (orow == 0 and x) or (orow and x % orow):
                    raise ValueError(f"action of {name} does not respect the relation on "
                                     f"coordinate {c}")

    def _build_rho(self):
        g = self.group
        mats = [self.action[nm] for nm in g.gen_names]
        rho = {0: IntMatrix.identity(self.rank)}
        for x in g.bfs_order[1:]:
            i, h = g.tree_parent[x]
            rho[x] = self.reduce_matrix(mats[i] @ rho[h])
        # every Cayley edge must agree: this checks all relations of the group
        for h in range(g.order):
            for i, gi in enumerate(g.gens):
                x = g.mul[gi][h]
                if self.reduce_matrix(mats[i] @ rho[h]) != rho[x]:
                    raise ValueError(f"action of {g.gen_names[i]} is not a homomorphism "
                                     f"(fails at element {h})")
        self._rho = rho

    def rho(self, elem):
        return self._rho[elem]

    def is_trivial_action(self):
        ident = IntMatrix.identity(self.rank)
        return all(self.reduce_matrix(m) == ident for m in self.action.values())

    def restrict(self, subgroup_elems, generator):
        """Restriction to the cyclic subgroup generated by ``generator``."""
        return self.rho(generator)


def trivial_module(group, orders, labels=None, name=""):
    n = len(orders)
    return GModule(group, list(orders), {k: IntMatrix.identity(n) for k in group.gen_names},
                   labels, name)


def describe(vec, labels):
    """Linear combination of basis labels, e.g. ``'-1 + 2*t'``."""
    parts = []
    for c, lab in zip(vec, labels):
        if c == 0:
            continue
        if c == 1:
            parts.append(f"[{lab}]")
        elif c == -1:
            parts.append(f"-[{lab}]")
        else:
            parts.append(f"{c}[{lab}]")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# H^0 and H^1


def _stack(mats):
    data = []
    for m in mats:
        data.extend(r[:] for r in m.data)
    return IntMatrix(data, len(data), mats[0].cols)


def invariants(mod):
    """Kernel of the stacked ``(g - 1)`` over the generators."""
    n = mod.rank
    ident = IntMatrix.identity(n)
    blocks = [IntMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(m.data, ident.data)])
              for m in (mod.action[k] for k in mod.group.gen_names)]
    g = _stack(blocks)
    return subquotient(IntMatrix.zeros(n, 0), g, mod.orders, mod.orders * len(blocks))


def h1_crossed(mod):
    """H^1 as crossed homomorphisms modulo principal ones.

    The unknowns are the values ``u_i = f(g_i)`` on generators.  Values on all
    other elements are propagated along a BFS tree of the Cayley graph by
    ``f(g_i h) = u_i + g_i f(h)``; each non-tree edge contributes one linear
    constraint.
    """
    g = mod.group
    n = mod.rank
    k = len(g.gens)
    width = n * k
    mats = [mod.action[nm] for nm in g.gen_names]

    def unit_block(i):
        m = [[0] * width for _ in range(n)]
        for r in range(n):
            m[r][i * n + r] = 1
        return IntMatrix(m, n, width)

    f = {0: IntMatrix.zeros(n, width)}
    for x in g.bfs_order[1:]:
        i, h = g.tree_parent[x]
        prop = mats[i] @ f[h]
        f[x] = IntMatrix([[a + b for a, b in zip(r1, r2)]
                          for r1, r2 in zip(unit_block(i).data, prop.data)], n, width)
    cons = []
    seen = set()
    for h in range(g.order):
        for i, gi in enumerate(g.gens):
            x = g.mul[gi][h]
            if g.tree_parent.get(x) == (i, h):
                continue
            prop = mats[i] @ f[h]
            c = [[a - b - e for a, b, e in zip(r1, r2, r3)]
                 for r1, r2, r3 in zip(f[x].data, prop.data, unit_block(i).data)]
            c = [[v % o if o else v for v in row] for row, o in zip(c, mod.orders)]
            key = tuple(map(tuple, c))
            if any(any(r) for r in c) and key not in seen:
                seen.add(key)
                cons.append(c)
    rows = [r for c in cons for r in c]
    tgt = mod.orders * len(cons)
    cmat = IntMatrix(rows, len(rows), width)
    ident = IntMatrix.identity(n)
    coboundary = _stack([IntMatrix([[a - b for a, b in zip(r1, r2)]
                                    for r1, r2 in zip(m.data, ident.data)]) for m in mats])
    return subquotient(coboundary, cmat, mod.orders * k, tgt)


# ---------------------------------------------------------------------------
# cyclic groups


def _norm_matrix(a, n, orders):
    size = a.rows
    acc = IntMatrix.zeros(size, size)
    p = IntMatrix.identity(size)
    for _ in range(n):
        acc = IntMatrix([[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(acc.data, p.data)])
        p = a @ p
    return IntMatrix([[x % o if o else x for x in row] for row, o in zip(acc.data, orders)])


def _minus_identity(a):
    return IntMatrix([[x - (i == j) for j, x in enumerate(row)] for i, row in enumerate(a.data)])


def cyclic_h(action, n, s, orders):
    """H^s(C_n, M) from the periodic resolution.

    ``action`` is the matrix of the chosen generator g and ``orders`` the
    coordinate orders of M.

    >>> cyclic_h(IntMatrix([[1]]), 2, 2, [0])
    FgAbGroup([2])
    """
    a = action if isinstance(action, IntMatrix) else IntMatrix(action)
    size = a.rows
    gm1 = _minus_identity(a)
    if s == 0:
        return subquotient(IntMatrix.zeros(size, 0), gm1, orders, orders)
    nm = _norm_matrix(a, n, orders)
    if s % 2:
        return subquotient(gm1, nm, orders, orders)
    return subquotient(nm, gm1, orders, orders)


def cyclic_h_module(mod, generator, s):
    g = mod.group
    return cyclic_h(mod.rho(generator), g.element_order(generator), s, mod.orders)


# ---------------------------------------------------------------------------
# bar complex


def _bar_differential(group, mod, s):
    """Sparse normalized bar differential C^s -> C^{s+1} and the tuple bases."""
    nonid = list(range(1, group.order))
    m = len(nonid)
    n = mod.rank
    pos = {g: i for i, g in enumerate(nonid)}

    def index(tup):
        k = 0
        for g in tup:
            k = k * m + pos[g]
        return k

    def tuples(length):
        if length == 0:
            yield ()
            return
        for t in tuples(length - 1):
            for g in nonid:
                yield t + (g,)

    rows = []
    rho = {g: mod.rho(g) for g in nonid}
    for tup in tuples(s + 1):
        acc = [dict() for _ in range(n)]

        def add(src_tuple, mat=None, sign=1):
            if any(x == 0 for x in src_tuple):
                return
            base = index(src_tuple) * n
            if mat is None:
                for r in range(n):
                    acc[r][base + r] = acc[r].get(base + r, 0) + sign
            else:
                for r in range(n):
                    for c, x in enumerate(mat.data[r]):
                        if x:
                            acc[r][base + c] = acc[r].get(base + c, 0) + sign * x

        add(tup[1:], rho[tup[0]], 1)
        for i in range(1, s + 1):
            merged = tup[:i - 1] + (group.mul[tup[i - 1]][tup[i]],) + tup[i + 1:]
            add(merged, None, (-1) ** i)
        add(tup[:s], None, (-1) ** (s + 1))
        for r in range(n):
            o = mod.orders[r]
            rows.append({j: (x % o if o else x) for j, x in acc[r].items() if (x % o if o else x)})
    return SparseIntMatrix(rows, m ** s * n)


def bar_h(group, mod, s_max, budget=DEFAULT_BUDGET, dense_limit=600):
    """Cohomology of the normalized bar complex in degrees 0..s_max."""
    size = group.order ** (s_max + 1) * mod.rank
    if size > budget:
        raise BudgetExceeded(f"|G|^{s_max + 1} * rank = {group.order}^{s_max + 1} * "
                             f"{mod.rank} = {size} exceeds budget {budget}")
    ds = [_bar_differential(group, mod, s) for s in range(s_max + 1)]
    m = group.order - 1
    orders = [mod.orders * (m ** s) for s in range(s_max + 2)]
    out = []
    for s in range(s_max + 1):
        d_cur = ds[s]
        d_prev = ds[s - 1] if s else SparseIntMatrix([{} for _ in range(mod.rank)], 0)
        if d_cur.nrows <= dense_limit and d_cur.ncols <= dense_limit:
            out.append(subquotient(d_prev.to_dense(), d_cur.to_dense(), orders[s],
                                   orders[s + 1]))
        elif s == 0:
            out.append(invariants(mod))
        else:
            # s >= 1: the group is finite, so only the torsion read off the
            # incoming total differential is needed.
            prev_orders = orders[s - 1] if s else []
            out.append(_torsion_only(d_prev, d_cur, prev_orders, orders[s], orders[s + 1],
                                     group.order))
    return out


def _torsion_only(d_prev, d_cur, o_prev, o_cur, o_next, exponent):
    """H^s for s >= 1, which is killed by |G|."""
    return presented_h_orders(d_prev, d_cur, None, (o_prev, o_cur, o_next, None),
                              exponent=exponent)


# ---------------------------------------------------------------------------
# mod p dimensions


def _rref_mod_p(a, p):
    """Row-reduce ``a`` (numpy int64) over F_p; returns (rref, pivot columns)."""
    a = a.copy() % p
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            a[nzr] = (a[nzr] - np.outer(col[nzr], a[r])) % p
        piv.append(c)
        r += 1
    return a[:r], piv


def _nullspace_mod_p(a, p):
    rows, cols = a.shape
    red, piv = _rref_mod_p(a, p)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = (-red[i, f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def _act(group, h, vec, m):
    """Left action of element h on a vector of F_p[G]^m (blocks of size |G|)."""
    n = group.order
    out = np.zeros_like(vec)
    perm = [group.mul[h][g] for g in range(n)]
    for i in range(m):
        block = vec[i * n:(i + 1) * n]
        out[i * n + np.array(perm)] = block
    return out


def fp_resolution_dims(group, p, s_max):
    """dim H^s(G, F_p) for s <= s_max from a free F_p[G]-resolution.

    Generators of each syzygy module are chosen greedily: take a kernel
    vector outside the submodule generated so far, add its G-orbit, repeat.
    Hom_G(P_s, F_p) = F_p^{m_s} and the coboundary is the augmentation of the
    boundary matrix.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    n = group.order
    # K_0 = ker(augmentation) inside F_p[G]
    aug = np.ones((1, n), dtype=np.int64)
    kernel = _nullspace_mod_p(aug, p)
    m_prev = 1
    gen_counts = [1]
    coboundaries = []
    for _ in range(s_max + 1):
        gens = []
        span = np.zeros((0, n * m_prev), dtype=np.int64)
        rank = 0
        target = kernel.shape[0]
        for v in kernel:
            if rank == target:
                break
            test = np.vstack([span, v[None, :]]) if span.size else v[None, :]
            if _rref_mod_p(test, p)[0].shape[0] == rank:
                continue
            gens.append(v)
            orbit = np.array([_act(group, h, v, m_prev) for h in range(n)])
            span = np.vstack([span, orbit]) if span.size else orbit
            span, _ = _rref_mod_p(span, p)
            rank = span.shape[0]
        m = len(gens)
        # coboundary: (delta phi)(e_j) = sum_i eps(v_j block i) phi(e_i)
        cob = np.array([[int(v[i * n:(i + 1) * n].sum()) % p for i in range(m_prev)]
                        for v in gens], dtype=np.int64).reshape(m, m_prev)
        coboundaries.append(cob)
        gen_counts.append(m)
        # boundary of the new free module: columns (j, g) -> g . v_j
        cols = []
        for v in gens:
            for h in range(n):
                cols.append(_act(group, h, v, m_prev))
        bmat = np.array(cols, dtype=np.int64).T
        kernel = _nullspace_mod_p(bmat, p)
        m_prev = m
    dims = []
    for s in range(s_max + 1):
        r_out = int(_rref_mod_p(coboundaries[s], p)[0].shape[0]) if coboundaries[s].size else 0
        r_in = (int(_rref_mod_p(coboundaries[s - 1], p)[0].shape[0])
                if s and coboundaries[s - 1].size else 0)
        dims.append(gen_counts[s] - r_out - r_in)
    return dims


def modp_bar_dims(group, p, s_max, budget=DEFAULT_BUDGET, bar_limit=2 * 10 ** 5,
                  method="auto"):
    """dim_{F_p} H^s(G, F_p) for s = 0..s_max.

    ``method`` is ``"bar"`` (normalized bar complex, sparse ranks),
    ``"resolution"`` (free F_p[G]-resolution) or ``"auto"``, which uses the
    bar complex while its largest cochain group stays under ``bar_limit``.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    largest = (group.order - 1) ** (s_max + 1)
    if method == "auto":
        method = "bar" if largest <= bar_limit else "resolution"
    if method == "resolution":
        return fp_resolution_dims(group, p, s_max)
    if group.order ** (s_max + 1) > budget:
        raise BudgetExceeded(f"|G|^{s_max + 1} = {group.order ** (s_max + 1)} exceeds {budget}")
    mod = trivial_module(group, [p])
    ranks = []
    for s in range(s_max + 1):
        d = _bar_differential(group, mod, s)
        ranks.append(modp_rank(d, p))
    m = group.order - 1
    return [m ** s - ranks[s] - (ranks[s - 1] if s else 0) for s in range(s_max + 1)]


# ---------------------------------------------------------------------------
# Lyndon-Hochschild-Serre


def _normal_subgroup(group, normal):
    if isinstance(normal, str):
        elems = [group.gens[group.gen_index(normal)]]
    elif isinstance(normal, int):
        elems = [normal]
    else:
        elems = list(normal)
    sub = group.subgroup(elems)
    gen = next((x for x in sub if group.element_order(x) == len(sub)), None)
    if gen is None:
        raise NotCyclic(f"subgroup of order {len(sub)} is not cyclic")
    if len(elems) == 1 and group.element_order(elems[0]) == len(sub):
        gen = elems[0]
    if not group.is_normal(sub):
        raise NotNormal("subgroup is not normal")
    return sub, gen


@dataclass
class LHSResult:
    window: int
    normal_order: int
    quotient_order: int
    fibre: dict          # q -> FgAbGroup H^q(N, M)
    fibre_action: dict   # q -> {quotient generator name: IntMatrix on H^q coords}
    decorations: dict    # q -> "trivial" / "sgn" / description
    e2: dict             # (p, q) -> FgAbGroup
    collapse: bool
    collapse_failures: list
    assembled: dict      # s -> FgAbGroup or None
    extension_ambiguous: dict


def _coprime(a, b):
    if a.is_trivial() or b.is_trivial():
        return True
    if a.free_rank or b.free_rank:
        return False
    return gcd(a.exponent(), b.exponent()) == 1


def lhs_assemble(mod, normal, window, budget=DEFAULT_BUDGET):
    """E_2 page of the LHS spectral sequence for a cyclic normal subgroup.

    The quotient acts on H^q(N, M) through a chain map on the periodic
    resolution.  If ``c`` conjugates the generator as ``c^-1 g c = g^b``, the
    lift of conjugation sends the degree 2k generator to ``b^k`` and the
    degree 2k+1 generator to ``b^k (1 + g + ... + g^{b-1})``; the class of
    ``m`` then goes to ``c`` applied to that element acting on ``m``.
    """
    g = mod.group
    sub, gen = _normal_subgroup(g, normal)
    n = len(sub)
    q_group, coset_of = g.quotient(sub)
    rho_g = mod.rho(gen)
    fibre = {}
    fibre_action = {}
    decorations = {}
    for q in range(window + 2):
        h = cyclic_h(rho_g, n, q, mod.orders)
        fibre[q] = h
        acts = {}
        for qi, qg in enumerate(q_group.gens):
            c = q_group.reps[qg]
            cinv = g.inv[c]
            conj = g.mul[g.mul[cinv][gen]][c]
            b = next(k for k in range(1, n + 1) if g.power(gen, k) == conj)
            lift = IntMatrix.identity(mod.rank)
            if q % 2:
                acc = IntMatrix.zeros(mod.rank, mod.rank)
                p = IntMatrix.identity(mod.rank)
                for _ in range(b):
                    acc = IntMatrix([[x + y for x, y in zip(r1, r2)]
                                     for r1, r2 in zip(acc.data, p.data)])
                    p = rho_g @ p
                lift = acc
            scale = b ** (q // 2)
            rc = mod.rho(c)
            cols = []
            for rep in h.generators:
                img = rc.apply(lift.apply([scale * x for x in rep]))
                cols.append(list(h.coordinates(mod.reduce(img))))
            acts[q_group.gen_names[qi]] = IntMatrix.from_columns(cols, h.rank) if cols else \
                IntMatrix.zeros(0, 0)
        fibre_action[q] = acts
        decorations[q] = _decoration(h, acts)
    e2 = {}
    cyclic_q = q_group.order == 1 or any(q_group.element_order(x) == q_group.order
                                         for x in range(q_group.order))
    for q in range(window + 2):
        h = fibre[q]
        for p in range(window + 2 - q):
            if h.is_trivial():
                e2[(p, q)] = FgAbGroup.trivial()
                continue
            orders = list(h.invariant_factors)
            if q_group.order == 1:
                e2[(p, q)] = FgAbGroup(h.invariant_factors) if p == 0 else FgAbGroup.trivial()
                continue
            if cyclic_q:
                qgen = next(x for x in range(q_group.order)
                            if q_group.element_order(x) == q_group.order)
                mat = _quotient_element_matrix(q_group, fibre_action[q], qgen, h.rank, orders)
                e2[(p, q)] = FgAbGroup(cyclic_h(mat, q_group.order, p, orders).invariant_factors)
            else:
                qmod = GModule(q_group, orders, fibre_action[q])
                e2[(p, q)] = FgAbGroup(bar_h(q_group, qmod, p, budget)[p].invariant_factors)
    failures = []
    for (p, q), src in e2.items():
        if p + q > window:
            continue
        for r in range(2, q + 2):
            tgt = e2.get((p + r, q - r + 1))
            if tgt is None:
                continue
            if not _coprime(src, tgt):
                failures.append(((p, q), (p + r, q - r + 1), r))
    collapse = not failures
    assembled = {}
    ambiguous = {}
    for s in range(window + 1):
        pieces = [e2[(p, s - p)] for p in range(s + 1)]
        nonzero = [x for x in pieces if not x.is_trivial()]
        primes = {}
        clash = False
        for x in nonzero:
            keys = set(x.primes()) | ({0} if x.free_rank else set())
            for k in keys:
                if k in primes:
                    clash = True
                primes[k] = True
        ambiguous[s] = clash
        if collapse and not clash:
            total = FgAbGroup.trivial()
            for x in nonzero:
                total = total.direct_sum(x)
            assembled[s] = total
        else:
            assembled[s] = None
    return LHSResult(window, n, q_group.order, fibre, fibre_action, decorations, e2, collapse,
                     failures, assembled, ambiguous)


def _quotient_element_matrix(q_group, gen_mats, elem, size, orders):
    """Matrix of an arbitrary quotient element from generator matrices."""
    x = elem
    word = []
    while x != 0:
        i, h = q_group.tree_parent[x]
        word.append(i)
        x = h
    m = IntMatrix.identity(size)
    for i in reversed(word):
        m = gen_mats[q_group.gen_names[i]] @ m
    return IntMatrix([[v % o if o else v for v in row] for row, o in zip(m.data, orders)],
                     size, size)


def _decoration(h, acts):
    if h.is_trivial():
        return "0"
    ident = IntMatrix.identity(h.rank)
    tags = []
    for name, m in acts.items():
        red = IntMatrix([[v % o if o else v for v in row]
                         for row, o in zip(m.data, h.invariant_factors)])
        if red == ident:
            tags.append("trivial")
        else:
            neg = IntMatrix([[(-v) % o if o else -v for v in row]
                             for row, o in zip(ident.data, h.invariant_factors)])
            tags.append("sgn" if red == neg else f"{name}:{red.data}")
    return "trivial" if all(t == "trivial" for t in tags) else ",".join(tags)
