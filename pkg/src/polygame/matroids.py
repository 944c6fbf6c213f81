"""Matroid classes, rank oracles, base enumeration, and orderability checks.

Each class gets its own rank oracle (uniform/partition/laminar/transversal/
graphic/gammoid/explicit) instead of a generic independence closure; that
keeps exhaustive certification fast and the constructors independently
testable against each other.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .errors import GraphTooLarge, GroundTooLarge, InvalidSpec, NotLaminar
from .flows import FlowNetwork
from .polymatroid import GroundSet, SubmodularOracle

BASE_ENUM_MAX = 14
ORDERABLE_GROUND_MAX = 12
ORDERABLE_BASES_MAX = 200
MINOR_VERTEX_MAX = 12
MINOR_EDGE_MAX = 30


@dataclass(frozen=True)
class MultiGraph:
    """Undirected multigraph; edges are (edge_id, endpoint, endpoint)."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        ids = [e[0] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise InvalidSpec("edge ids must be unique")
        vset = set(self.vertices)
        for eid, u, v in self.edges:
            if u not in vset or v not in vset:
                raise InvalidSpec(f"edge {eid!r} has undeclared endpoint")

    @classmethod
    def create(cls, vertices: Iterable[str], edges: Iterable[Sequence[str]]) -> "MultiGraph":
        return cls(tuple(vertices), tuple((e[0], e[1], e[2]) for e in edges))


@dataclass(frozen=True)
class GammoidSpec:
    """Digraph linkage system: X independent iff vertex-disjoint paths join
    the vertices of X to distinct vertices of ``targets`` (following arcs)."""

    vertices: tuple[str, ...]
    arcs: tuple[tuple[str, str], ...]
    targets: tuple[str, ...]
    ground: tuple[str, ...]

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise InvalidSpec("gammoid vertices must be unique")
        for u, v in self.arcs:
            if u not in vset or v not in vset:
                raise InvalidSpec(f"arc ({u!r}, {v!r}) uses undeclared vertex")
        if not set(self.targets) <= vset or not set(self.ground) <= vset:
            raise InvalidSpec("targets and ground must be declared vertices")

    def to_dot(self) -> str:
        lines = ["digraph gammoid {"]
        for v in self.vertices:
            shape = "doublecircle" if v in self.targets else (
                "box" if v in self.ground else "circle")
            lines.append(f'  "{v}" [shape={shape}];')
        for u, v in self.arcs:
            lines.append(f'  "{u}" -> "{v}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


class Matroid:
    """Rank/independence oracle with a class tag; immutable after construction."""

    __slots__ = ("ground", "class_tag", "_rank_mask", "_memo")

    def __init__(self, ground: GroundSet, rank_mask: Callable[[int], int], class_tag: str):
        self.ground = ground
        self.class_tag = class_tag
        self._rank_mask = rank_mask
        self._memo: dict[int, int] = {}

    def rank_of_mask(self, mask: int) -> int:
        memo = self._memo
        val = memo.get(mask)
        if val is None:
            val = int(self._rank_mask(mask))
            memo[mask] = val
        return val

    def rank(self, subset: Iterable[str]) -> int:
        return self.rank_of_mask(self.ground.mask_of(subset))

    def is_independent(self, subset: Iterable[str]) -> bool:
        mask = self.ground.mask_of(subset)
        return self.rank_of_mask(mask) == mask.bit_count()

    @property
    def full_rank(self) -> int:
        return self.rank_of_mask(self.ground.full_mask)

    def __repr__(self) -> str:
        return f"Matroid({self.class_tag}, m={self.ground.size}, rank={self.full_rank})"


def default_elements(m: int) -> tuple[str, ...]:
    if m <= 26:
        return tuple(string.ascii_lowercase[:m])
    return tuple(f"e{i:02d}" for i in range(m))


def make_uniform(m: int, k: int, elements: Iterable[str] | None = None) -> Matroid:
    if m < 1 or k < 0:
        raise InvalidSpec("uniform matroid needs m >= 1 and k >= 0")
    ground = GroundSet(elements if elements is not None else default_elements(m))
    if ground.size != m:
        raise InvalidSpec("element list does not match m")
    return Matroid(ground, lambda mask: min(mask.bit_count(), k), "uniform")


def make_partition(blocks: Sequence[tuple[Iterable[str], int]]) -> Matroid:
    block_list = [(tuple(elems), int(cap)) for elems, cap in blocks]
    seen: set[str] = set()
    for elems, cap in block_list:
        if cap < 0:
            raise InvalidSpec("block capacities must be nonnegative")
        if seen & set(elems):
            raise InvalidSpec("partition blocks must be disjoint")
        seen.update(elems)
    ground = GroundSet(sorted(seen))
    masked = [(ground.mask_of(elems), cap) for elems, cap in block_list]

    def rank(mask: int) -> int:
        return sum(min((mask & bmask).bit_count(), cap) for bmask, cap in masked)

    return Matroid(ground, rank, "partition")


def _check_laminar(masked: list[tuple[int, int]]) -> None:
    for (a, _), (b, _) in combinations(masked, 2):
        inter = a & b
        if inter and inter != a and inter != b:
            raise NotLaminar("family sets must be nested or disjoint")


def make_laminar(family: Sequence[tuple[Iterable[str], int]],
                 ground: Iterable[str] | None = None) -> Matroid:
    """Laminar matroid: U independent iff |U ∩ X| <= cap_X for every family set."""
    sets = [(frozenset(elems), int(cap)) for elems, cap in family]
    for elems, cap in sets:
        if cap < 0:
            raise InvalidSpec("laminar capacities must be nonnegative")
        if not elems:
            raise InvalidSpec("laminar sets must be nonempty")
    universe = set().union(*(elems for elems, _ in sets)) if sets else set()
    if ground is not None:
        gset = set(ground)
        if not universe <= gset:
            raise InvalidSpec("family sets exceed the declared ground")
        universe = gset
    if not universe:
        raise InvalidSpec("laminar matroid needs a nonempty ground")
    gs = GroundSet(sorted(universe))
    # duplicate subsets collapse to their tightest capacity
    by_mask: dict[int, int] = {}
    for elems, cap in sets:
        mask = gs.mask_of(elems)
        by_mask[mask] = min(cap, by_mask.get(mask, cap))
    masked = sorted(by_mask.items(), key=lambda mc: (mc[0].bit_count(), mc[0]))
    _check_laminar(masked)
    # forest structure: parent = smallest strict superset in the family
    parents = [-1] * len(masked)
    for i, (mask, _) in enumerate(masked):
        for j in range(i + 1, len(masked)):
            sup = masked[j][0]
            if mask & sup == mask and sup != mask:
                parents[i] = j
                break
    children: list[list[int]] = [[] for _ in masked]
    roots = []
    for i, p in enumerate(parents):
        (children[p] if p >= 0 else roots).append(i)
    covered = 0
    for mask, _ in masked:
        covered |= mask
    free_mask = gs.full_mask & ~covered

    def node_count(i: int, mask: int) -> int:
        smask, cap = masked[i]
        loose = smask
        for c in children[i]:
            loose &= ~masked[c][0]
        count = (mask & loose).bit_count()
        count += sum(node_count(c, mask) for c in children[i])
        return min(cap, count)

    def rank(mask: int) -> int:
        return (mask & free_mask).bit_count() + sum(node_count(r, mask) for r in roots)

    return Matroid(gs, rank, "laminar")


def make_transversal(sets: Sequence[Iterable[str]],
                     ground: Iterable[str] | None = None) -> Matroid:
    """Transversal matroid: rank(U) = maximum matching between U and the sets."""
    families = [frozenset(s) for s in sets]
    if not families:
        raise InvalidSpec("transversal matroid needs at least one set")
    universe = set().union(*families)
    if ground is not None:
        gset = set(ground)
        if not universe <= gset:
            raise InvalidSpec("sets exceed the declared ground")
        universe = gset
    gs = GroundSet(sorted(universe))
    incident = [tuple(j for j, fam in enumerate(families) if e in fam)
                for e in gs.elements]

    def rank(mask: int) -> int:
        matched: dict[int, int] = {}

        def augment(i: int, seen: set[int]) -> bool:
            for j in incident[i]:
                if j not in seen:
                    seen.add(j)
                    if j not in matched or augment(matched[j], seen):
                        matched[j] = i
                        return True
            return False

        size = 0
        for i in range(gs.size):
            if mask >> i & 1 and augment(i, set()):
                size += 1
        return size

    return Matroid(gs, rank, "transversal")


def make_graphic(g: MultiGraph) -> Matroid:
    """Graphic matroid on edge ids: rank(U) = |U| - (cycles) via union-find."""
    vindex = {v: i for i, v in enumerate(g.vertices)}
    gs = GroundSet(e[0] for e in g.edges)
    endpoints = [None] * gs.size
    for eid, u, v in g.edges:
        endpoints[gs.index[eid]] = (vindex[u], vindex[v])

    def rank(mask: int) -> int:
        parent = list(range(len(g.vertices)))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        merges = 0
        for i in range(gs.size):
            if mask >> i & 1:
                ra, rb = find(endpoints[i][0]), find(endpoints[i][1])
                if ra != rb:
                    parent[ra] = rb
                    merges += 1
        return merges

    return Matroid(gs, rank, "graphic")


def make_gammoid(spec: GammoidSpec) -> Matroid:
    """Gammoid rank via unit-vertex-capacity max-flow on the split digraph."""
    gs = GroundSet(spec.ground)
    vidx = {v: i for i, v in enumerate(spec.vertices)}
    n = len(spec.vertices)
    # node i splits into in=2i, out=2i+1; super source/sink appended
    src, snk = 2 * n, 2 * n + 1

    def rank(mask: int) -> int:
        net = FlowNetwork(2 * n + 2)
        for i in range(n):
            net.add_arc(2 * i, 2 * i + 1, 1)
        for u, v in spec.arcs:
            net.add_arc(2 * vidx[u] + 1, 2 * vidx[v], 1)
        for t in spec.targets:
            net.add_arc(2 * vidx[t] + 1, snk, 1)
        for i in range(gs.size):
            if mask >> i & 1:
                net.add_arc(src, 2 * vidx[gs.elements[i]], 1)
        return net.max_flow(src, snk)

    return Matroid(gs, rank, "gammoid")


def make_explicit(elements: Iterable[str], bases: Sequence[Iterable[str]]) -> Matroid:
    """Matroid given by its base list; validated against the base axioms."""
    gs = GroundSet(elements)
    base_sets = [frozenset(b) for b in bases]
    if not base_sets:
        raise InvalidSpec("explicit matroid needs at least one base")
    for b in base_sets:
        if not b <= set(gs.elements):
            raise InvalidSpec("bases must be subsets of the ground set")
    if not _is_base_family(base_sets):
        raise InvalidSpec("base list violates the matroid base-exchange axioms")
    base_masks = [gs.mask_of(b) for b in base_sets]

    def rank(mask: int) -> int:
        return max((mask & b).bit_count() for b in base_masks)

    return Matroid(gs, rank, "explicit")


def _is_base_family(base_sets: Sequence[frozenset]) -> bool:
    sizes = {len(b) for b in base_sets}
    if len(sizes) != 1:
        return False
    family = set(base_sets)
    for b in family:
        for b2 in family:
            for e in b - b2:
                if not any(b - {e} | {f} in family for f in b2 - b):
                    return False
    return True


def matroid_axiom_report(matroid: Matroid) -> dict[str, bool]:
    """Exhaustive rank-axiom check: normalization, unit increments, the
    |U| bound, and submodularity (local form)."""
    gs = matroid.ground
    if gs.size > BASE_ENUM_MAX:
        raise GroundTooLarge(f"axiom report needs m <= {BASE_ENUM_MAX}")
    rank = matroid.rank_of_mask
    ok_zero = rank(0) == 0
    ok_unit = True
    ok_bound = True
    ok_submodular = True
    m = gs.size
    for mask in range(1 << m):
        r = rank(mask)
        if not 0 <= r <= mask.bit_count():
            ok_bound = False
        out = [i for i in range(m) if not mask >> i & 1]
        for i in out:
            ri = rank(mask | 1 << i)
            if ri < r or ri > r + 1:
                ok_unit = False
        for a in range(len(out)):
            i = out[a]
            ri = rank(mask | 1 << i)
            for b in range(a + 1, len(out)):
                j = out[b]
                if ri + rank(mask | 1 << j) < rank(mask | 1 << i | 1 << j) + r:
                    ok_submodular = False
    return {"normalized": ok_zero, "unit_increase": ok_unit,
            "cardinality_bound": ok_bound, "submodular": ok_submodular}


def oracle_from_matroid(matroid: Matroid, scale: float = 1.0) -> SubmodularOracle:
    """Submodular oracle for scale * rank; the polymatroid of the matroid."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    return SubmodularOracle(matroid.ground,
                            mask_fn=lambda mask: scale * matroid.rank_of_mask(mask))


def enumerate_bases(matroid: Matroid) -> list[tuple[str, ...]]:
    """All bases, lexicographically sorted."""
    gs = matroid.ground
    if gs.size > BASE_ENUM_MAX:
        raise GroundTooLarge(f"base enumeration needs m <= {BASE_ENUM_MAX}")
    r = matroid.full_rank
    out = []
    for combo in combinations(gs.elements, r):
        if matroid.rank_of_mask(gs.mask_of(combo)) == r:
            out.append(combo)
    return out


@dataclass(frozen=True)
class OrderabilityCertificate:
    ok: bool
    # bijections keyed by ordered base pair (B, B'); identity pairs omitted
    bijections: dict[tuple[tuple[str, ...], tuple[str, ...]], dict[str, str]] | None = None
    witness: tuple[tuple[str, ...], tuple[str, ...]] | None = None


def is_base_orderable(matroid: Matroid) -> OrderabilityCertificate:
    """Search, per ordered base pair (B, B'), for a bijection g: B -> B' with
    B - e + g(e) and B' + e - g(e) both bases for every e in B.

    Elements of the intersection map to themselves; the remainder is decided
    by maximum bipartite matching on the allowed-exchange graph.
    """
    gs = matroid.ground
    if gs.size > ORDERABLE_GROUND_MAX:
        raise GroundTooLarge(f"orderability check needs m <= {ORDERABLE_GROUND_MAX}")
    bases = enumerate_bases(matroid)
    if len(bases) > ORDERABLE_BASES_MAX:
        raise GroundTooLarge(f"orderability check needs <= {ORDERABLE_BASES_MAX} bases")
    base_set = {frozenset(b) for b in bases}
    bijections: dict = {}
    for bi in range(len(bases)):
        for bj in range(bi + 1, len(bases)):
            b1, b2 = frozenset(bases[bi]), frozenset(bases[bj])
            left = sorted(b1 - b2)
            right = sorted(b2 - b1)
            allowed = {
                e: [f for f in right
                    if b1 - {e} | {f} in base_set and b2 - {f} | {e} in base_set]
                for e in left
            }
            matched: dict[str, str] = {}

            def augment(e: str, seen: set[str]) -> bool:
                for f in allowed[e]:
                    if f not in seen:
                        seen.add(f)
                        if f not in matched or augment(matched[f], seen):
                            matched[f] = e
                            return True
                return False

            if not all(augment(e, set()) for e in left):
                return OrderabilityCertificate(False, witness=(bases[bi], bases[bj]))
            forward = {e: e for e in b1 & b2}
            forward.update({e: f for f, e in matched.items()})
            bijections[(bases[bi], bases[bj])] = forward
            bijections[(bases[bj], bases[bi])] = {f: e for e, f in forward.items()}
    return OrderabilityCertificate(True, bijections=bijections)


def _simple_adjacency(g: MultiGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {v: set() for v in g.vertices}
    for _, u, v in g.edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def has_k4_minor(g: MultiGraph) -> bool:
    """Contraction/deletion reduction: loops and parallels are irrelevant to a
    K4 minor, degree <= 1 vertices are deleted, degree-2 vertices contracted
    through.  A nonempty residue has minimum degree 3, which forces a K4
    subdivision, so the residue alone decides the question.
    """
    if len(g.vertices) > MINOR_VERTEX_MAX or len(g.edges) > MINOR_EDGE_MAX:
        raise GraphTooLarge("minor search guard exceeded")
    adj = _simple_adjacency(g)
    queue = [v for v, nbrs in adj.items() if len(nbrs) <= 2]
    while queue:
        v = queue.pop()
        nbrs = adj.get(v)
        if nbrs is None or len(nbrs) > 2:
            continue
        for u in nbrs:
            adj[u].discard(v)
        if len(nbrs) == 2:
            a, b = nbrs
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
        del adj[v]
        for u in nbrs:
            if len(adj[u]) <= 2:
                queue.append(u)
    return bool(adj)


def is_gsp(g: MultiGraph) -> bool:
    return not has_k4_minor(g)


def laminar_to_gammoid(family: Sequence[tuple[Iterable[str], int]]) -> GammoidSpec:
    """Linkage digraph realizing a laminar matroid whose family contains the
    full ground set.

    Every family set X gets cap_X copies; each element feeds the copies of
    the smallest set containing it and each set's copies feed the copies of
    its immediate parent, so any linkage of U to the root copies routes
    through at most cap_X paths inside every X.  Linkage targets are the
    copies of the root.
    """
    sets = [(frozenset(elems), int(cap)) for elems, cap in family]
    if not sets:
        raise NotLaminar("family must be nonempty")
    universe = frozenset().union(*(elems for elems, _ in sets))
    by_set: dict[frozenset, int] = {}
    for elems, cap in sets:
        if cap < 0:
            raise InvalidSpec("laminar capacities must be nonnegative")
        by_set[elems] = min(cap, by_set.get(elems, cap))
    if universe not in by_set:
        raise NotLaminar("family must contain the full ground set")
    ordered = sorted(by_set.items(), key=lambda sc: (len(sc[0]), tuple(sorted(sc[0]))))
    for (a, _), (b, _) in combinations(ordered, 2):
        inter = a & b
        if inter and inter != a and inter != b:
            raise NotLaminar("family sets must be nested or disjoint")
    parents = [-1] * len(ordered)
    for i, (s, _) in enumerate(ordered):
        for j in range(i + 1, len(ordered)):
            sup = ordered[j][0]
            if s < sup:
                parents[i] = j
                break
    copies = [[f"set{i}_{c}" for c in range(cap)] for i, (_, cap) in enumerate(ordered)]
    vertices = list(universe) + [name for group in copies for name in group]
    arcs = []
    for i, p in enumerate(parents):
        if p >= 0:
            arcs.extend((a, b) for a in copies[i] for b in copies[p])
    for e in sorted(universe):
        smallest = min((i for i, (s, _) in enumerate(ordered) if e in s),
                       key=lambda i: len(ordered[i][0]))
        arcs.extend((e, c) for c in copies[smallest])
    root = len(ordered) - 1
    return GammoidSpec(
        vertices=tuple(sorted(vertices)),
        arcs=tuple(sorted(arcs)),
        targets=tuple(copies[root]),
        ground=tuple(sorted(universe)),
    )
