"""Simplicial complexes: nerves and flag complexes of cover families.

Levels are indexed by nonempty sets of cover ids.  A level's vertices are
the tuples of cover elements (one per cover) with nonempty intersection;
the intersection is the vertex's wedge.  The flag complex fills in every
clique of pairwise-intersecting wedges, the nerve only the vertex sets with
a common point.  Complexes store the full downward-closed simplex set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .errors import GuardExceeded
from .ground import CoverFamily, CoverId, ElementId, PointId, WeightTable, partition_tables
DEFAULT_MAX_DIM = 8

Simplex = tuple[int, ...]


@dataclass(frozen=True)
class LambdaIndex:
    """A nonempty sorted set of cover ids; ordered by inclusion."""

    cover_ids: tuple[CoverId, ...]

    def __post_init__(self) -> None:
        ids = self.cover_ids
        if not ids:
            raise ValueError("level index must be nonempty")
        if list(ids) != sorted(set(ids)):
            raise ValueError("cover ids must be sorted and deduplicated")

    @classmethod
    def of(cls, ids: Iterable[CoverId]) -> "LambdaIndex":
        return cls(tuple(sorted(set(ids))))

    def __le__(self, other: "LambdaIndex") -> bool:
        return set(self.cover_ids) <= set(other.cover_ids)

    def __ge__(self, other: "LambdaIndex") -> bool:
        return other <= self

    def __lt__(self, other: "LambdaIndex") -> bool:
        return self <= other and self != other

    @property
    def sort_key(self) -> tuple[int, tuple[CoverId, ...]]:
        return (len(self.cover_ids), self.cover_ids)

    def json_key(self) -> str:
        return ",".join(str(i) for i in self.cover_ids)

    def __repr__(self) -> str:
        return "L(" + ",".join(str(i) for i in self.cover_ids) + ")"


@dataclass(frozen=True)
class Vertex:
    """One element choice per cover of the level, with the cached wedge.

    Identity is the tuple of element ids; distinct vertices may share a
    wedge and stay distinct.
    """

    lam: LambdaIndex
    elements: tuple[ElementId, ...]
    wedge: frozenset[PointId]

    def __post_init__(self) -> None:
        if len(self.elements) != len(self.lam.cover_ids):
            raise ValueError("one element per cover id required")
        if not self.wedge:
            raise ValueError("vertex wedge must be nonempty")


@dataclass(frozen=True)
class SimplicialComplex:
    """Abstract complex on vertex ids 0..n-1, stored downward closed."""

    n_vertices: int
    simplices: frozenset[Simplex]
    vertices: tuple[Vertex, ...] | None = field(default=None, compare=False)
    is_flag_complex: bool = False

    def __post_init__(self) -> None:
        if self.vertices is not None and len(self.vertices) != self.n_vertices:
            raise ValueError("vertex list length mismatch")
        for s in self.simplices:
            if list(s) != sorted(set(s)):
                raise ValueError(f"simplex {s} is not a sorted id tuple")
            if s and (s[0] < 0 or s[-1] >= self.n_vertices):
                raise ValueError(f"simplex {s} has out-of-range vertices")
        present = self.simplices
        for v in range(self.n_vertices):
            if (v,) not in present:
                raise ValueError(f"vertex {v} is missing as a singleton simplex")
        for s in present:
            if len(s) > 1:
                for f in combinations(s, len(s) - 1):
                    if f not in present:
                        raise ValueError(f"face {f} of {s} is missing")

    @classmethod
    def from_maximal(
        cls,
        n_vertices: int,
        maximal: Iterable[Sequence[int]],
        vertices: tuple[Vertex, ...] | None = None,
        is_flag_complex: bool = False,
    ) -> "SimplicialComplex":
        closed: set[Simplex] = {(v,) for v in range(n_vertices)}
        for m in maximal:
            m = tuple(sorted(set(m)))
            for k in range(1, len(m) + 1):
                closed.update(combinations(m, k))
        return cls(n_vertices, frozenset(closed), vertices, is_flag_complex)

    @property
    def dim(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def k_simplices(self, k: int) -> list[Simplex]:
        return sorted(s for s in self.simplices if len(s) == k + 1)

    def edges(self) -> list[Simplex]:
        return self.k_simplices(1)

    def has(self, s: Sequence[int]) -> bool:
        return tuple(sorted(set(s))) in self.simplices

    def skeleton(self, k: int) -> "SimplicialComplex":
        return SimplicialComplex(
            self.n_vertices,
            frozenset(s for s in self.simplices if len(s) <= k + 1),
            self.vertices,
            is_flag_complex=False,
        )

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for a, b in self.k_simplices(1):
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return self.n_vertices == other.n_vertices and self.simplices <= other.simplices


@dataclass(frozen=True)
class BarycentricPoint:
    """A point of a complex: its carrier simplex plus positive coordinates."""

    complex: SimplicialComplex = field(compare=False, repr=False)
    carrier: Simplex = ()
    coords: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        ids = tuple(v for v, _ in self.coords)
        if ids != self.carrier or list(ids) != sorted(set(ids)):
            raise ValueError("coordinates must be keyed by the carrier, sorted")
        if not self.carrier or self.carrier not in self.complex.simplices:
            raise ValueError("carrier is not a simplex of the complex")
        total = Fraction(0)
        for _, w in self.coords:
            if w <= 0:
                raise ValueError("barycentric coordinates must be positive")
            total += w
        if total != 1:
            raise ValueError(f"coordinates sum to {total}, not 1")

    @classmethod
    def from_dict(cls, cx: SimplicialComplex, coords: Mapping[int, Fraction]) -> "BarycentricPoint":
        items = tuple(sorted((v, w) for v, w in coords.items() if w != 0))
        return cls(cx, tuple(v for v, _ in items), items)

    def coord(self, v: int) -> Fraction:
        for u, w in self.coords:
            if u == v:
                return w
        return Fraction(0)

    def at_vertex(self) -> int | None:
        return self.carrier[0] if len(self.carrier) == 1 else None


def vertex_point(cx: SimplicialComplex, v: int) -> BarycentricPoint:
    return BarycentricPoint(cx, (v,), ((v, Fraction(1)),))


def convex_combination(
    t: Fraction, target: BarycentricPoint, source: BarycentricPoint
) -> BarycentricPoint:
    """t * target + (1 - t) * source inside their common complex."""
    if target.complex is not source.complex:
        raise ValueError("points live in different complexes")
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError("parameter must lie in [0, 1]")
    coords: dict[int, Fraction] = {}
    for v, w in target.coords:
        coords[v] = coords.get(v, Fraction(0)) + t * w
    for v, w in source.coords:
        coords[v] = coords.get(v, Fraction(0)) + (1 - t) * w
    return BarycentricPoint.from_dict(target.complex, coords)


@dataclass(frozen=True)
class SimplicialMap:
    """A vertex map that must carry simplices to simplices."""

    source: SimplicialComplex = field(compare=False, repr=False)
    target: SimplicialComplex = field(compare=False, repr=False)
    vertex_map: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.vertex_map) != self.source.n_vertices:
            raise ValueError("vertex map must cover every source vertex")
        for img in self.vertex_map:
            if not 0 <= img < self.target.n_vertices:
                raise ValueError("vertex map image out of range")

    def apply(self, v: int) -> int:
        return self.vertex_map[v]

    def image_simplex(self, s: Sequence[int]) -> Simplex:
        return tuple(sorted({self.vertex_map[v] for v in s}))

    def is_simplicial(self) -> bool:
        return all(self.image_simplex(s) in self.target.simplices for s in self.source.simplices)

    def verify(self) -> None:
        for s in self.source.simplices:
            if self.image_simplex(s) not in self.target.simplices:
                raise AssertionError(f"image of {s} is not a simplex of the target")

    def push_point(self, point: BarycentricPoint) -> BarycentricPoint:
        """Push a barycentric point forward, summing merged coordinates."""
        coords: dict[int, Fraction] = {}
        for v, w in point.coords:
            img = self.vertex_map[v]
            coords[img] = coords.get(img, Fraction(0)) + w
        return BarycentricPoint.from_dict(self.target, coords)

    def compose(self, inner: "SimplicialMap") -> "SimplicialMap":
        """self after inner."""
        if inner.target is not self.source:
            raise ValueError("maps do not compose")
        vm = tuple(self.vertex_map[inner.vertex_map[v]] for v in range(inner.source.n_vertices))
        return SimplicialMap(inner.source, self.target, vm)


# ---------------------------------------------------------------------------
# level construction


def build_vertices(family: CoverFamily, lam: LambdaIndex) -> list[Vertex]:
    """All element tuples with nonempty intersection, in lexicographic order."""
    covers = [family.covers[i] for i in lam.cover_ids]
    out = []
    for choice in product(*(c.elements for c in covers)):
        wedge = choice[0].pointset
        for e in choice[1:]:
            wedge = wedge & e.pointset
            if not wedge:
                break
        if wedge:
            out.append(Vertex(lam, tuple(e.id for e in choice), frozenset(wedge)))
    return out


def build_flag(
    family: CoverFamily,
    lam: LambdaIndex,
    max_dim: int = DEFAULT_MAX_DIM,
    vertices: list[Vertex] | None = None,
) -> SimplicialComplex:
    """Flag complex: edges where wedges meet, simplices on every clique."""
    verts = build_vertices(family, lam) if vertices is None else vertices
    n = len(verts)
    adj = [0] * n
    for i, j in combinations(range(n), 2):
        if verts[i].wedge & verts[j].wedge:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
    simplices = _all_cliques(n, adj, max_dim)
    return SimplicialComplex(n, frozenset(simplices), tuple(verts), is_flag_complex=True)


def _all_cliques(n: int, adj: list[int], max_dim: int) -> set[Simplex]:
    """Every clique up to max_dim+1 vertices; raises past the guard."""
    out: set[Simplex] = set()

    def extend(clique: tuple[int, ...], candidates: int) -> None:
        if len(clique) == max_dim + 2:
            raise GuardExceeded(
                f"clique of more than {max_dim + 1} vertices exceeds the dimension guard"
            )
        out.add(clique)
        c = candidates
        while c:
            v = (c & -c).bit_length() - 1
            c &= c - 1
            extend(clique + (v,), candidates & adj[v] & ~((1 << (v + 1)) - 1))

    for v in range(n):
        extend((v,), adj[v] & ~((1 << (v + 1)) - 1))
    return out


def build_nerve(
    family: CoverFamily,
    lam: LambdaIndex,
    max_dim: int = DEFAULT_MAX_DIM,
    vertices: list[Vertex] | None = None,
) -> SimplicialComplex:
    """Nerve: a vertex set spans a simplex iff the wedges share a point."""
    verts = build_vertices(family, lam) if vertices is None else vertices
    n = len(verts)
    simplices: set[Simplex] = {(v,) for v in range(n)}
    for x in family.ground.points:
        carrier = [i for i, v in enumerate(verts) if x in v.wedge]
        if len(carrier) > max_dim + 1:
            raise GuardExceeded(
                f"point {x} lies in {len(carrier)} wedges; simplex would exceed the guard"
            )
        for k in range(2, len(carrier) + 1):
            simplices.update(combinations(carrier, k))
    return SimplicialComplex(n, frozenset(simplices), tuple(verts), is_flag_complex=False)


def carrier_wedge(point: BarycentricPoint) -> frozenset[PointId]:
    """Intersection of the carrier vertices' wedges; empty off the nerve."""
    verts = point.complex.vertices
    if verts is None:
        raise ValueError("complex has no cover vertices attached")
    out = verts[point.carrier[0]].wedge
    for v in point.carrier[1:]:
        out = out & verts[v].wedge
    return frozenset(out)


# ---------------------------------------------------------------------------
# flag completion of graphs


def flag_completion(graph, max_dim: int = DEFAULT_MAX_DIM) -> SimplicialComplex:
    """Clique complex of a reflexive symmetric graph (loops ignored).

    Accepts any object with ``n_vertices`` and ``edges`` (a set of 2-element
    frozensets); graph homomorphisms induce simplicial maps via flag_map.
    """
    n = graph.n_vertices
    adj = [0] * n
    for e in graph.edges:
        pair = sorted(e)
        if len(pair) != 2:
            continue
        a, b = pair
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    simplices = _all_cliques(n, adj, max_dim)
    return SimplicialComplex(n, frozenset(simplices), None, is_flag_complex=True)


def flag_map(
    vertex_map: Sequence[int], source: SimplicialComplex, target: SimplicialComplex
) -> SimplicialMap:
    """The simplicial map a graph homomorphism induces on flag complexes."""
    m = SimplicialMap(source, target, tuple(vertex_map))
    m.verify()
    return m


# ---------------------------------------------------------------------------
# nerve with duplicate wedges identified


def identified_nerve(
    family: CoverFamily,
    lam: LambdaIndex,
    nerve: SimplicialComplex | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> tuple[SimplicialComplex, SimplicialMap, bool]:
    """Quotient the nerve by equal wedges.

    Returns the quotient complex, the quotient map, and whether the
    preimage of every quotient simplex spans a simplex of the nerve.
    """
    if nerve is None:
        nerve = build_nerve(family, lam, max_dim)
    verts = nerve.vertices
    assert verts is not None
    wedge_order: list[frozenset[PointId]] = []
    seen: dict[frozenset[PointId], int] = {}
    vmap = []
    for v in verts:
        if v.wedge not in seen:
            seen[v.wedge] = len(wedge_order)
            wedge_order.append(v.wedge)
        vmap.append(seen[v.wedge])
    q_simplices = {tuple(sorted({vmap[v] for v in s})) for s in nerve.simplices}
    quotient = SimplicialComplex(len(wedge_order), frozenset(q_simplices))
    qmap = SimplicialMap(nerve, quotient, tuple(vmap))
    preimage_ok = True
    for s in quotient.simplices:
        classes = set(s)
        preimage = tuple(
            sorted(v for v in range(nerve.n_vertices) if vmap[v] in classes)
        )
        if preimage not in nerve.simplices:
            preimage_ok = False
            break
    return quotient, qmap, preimage_ok


# ---------------------------------------------------------------------------
# product weights over a level


def product_weights(
    family: CoverFamily,
    vertices: Sequence[Vertex],
    x: PointId,
    tables: Mapping[CoverId, WeightTable] | None = None,
) -> dict[Vertex, Fraction]:
    """Per-vertex products of the covers' weights at x; sums to 1 exactly."""
    if not vertices:
        raise ValueError("level has no vertices")
    lam = vertices[0].lam
    if tables is None:
        tables = partition_tables(family)
    out: dict[Vertex, Fraction] = {}
    for v in vertices:
        w = Fraction(1)
        for cover_id, eid in zip(lam.cover_ids, v.elements):
            w *= tables[cover_id].weight(eid, x)
            if w == 0:
                break
        out[v] = w
    return out


# ---------------------------------------------------------------------------
# serialization


def complex_to_json(cx: SimplicialComplex, lam: LambdaIndex | None = None) -> dict:
    data: dict = {
        "lambda": list(lam.cover_ids) if lam is not None else None,
        "vertices": None
        if cx.vertices is None
        else [
            {"tuple": list(v.elements), "wedge": sorted(v.wedge)} for v in cx.vertices
        ],
        "simplices": sorted(list(s) for s in cx.simplices),
        "flag": cx.is_flag_complex,
    }
    return data


def complex_from_json(data: dict) -> SimplicialComplex:
    simplices = frozenset(tuple(s) for s in data["simplices"])
    n = max((s[-1] for s in simplices if s), default=-1) + 1
    vertices = None
    if data.get("vertices") and data.get("lambda"):
        lam = LambdaIndex.of(data["lambda"])
        vertices = tuple(
            Vertex(lam, tuple(v["tuple"]), frozenset(v["wedge"]))
            for v in data["vertices"]
        )
    return SimplicialComplex(n, simplices, vertices, bool(data.get("flag", False)))


def skeleton_dot(cx: SimplicialComplex, name: str) -> str:
    """The 1-skeleton as a Graphviz graph."""
    lines = [f"graph {name} {{"]
    for v in range(cx.n_vertices):
        lines.append(f"  {v};")
    for a, b in cx.k_simplices(1):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
