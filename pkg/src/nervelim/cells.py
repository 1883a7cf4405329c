"""Cell structures: level graphs, thread equivalence, Cauchy nets.

Each level's graph is the 1-skeleton of its flag complex with loops; bonds
are graph homomorphisms.  Threads are identified up to levelwise adjacency,
and the quotient is compared against the ground space point for point.

On a finite index set with a maximum level the eventual ("there exists a
level such that ...") quantifier of the Cauchy and convergence definitions
is satisfied vacuously by the top level, which would make every net Cauchy
and convergent.  The checks below therefore use the uniform finite
surrogate: the adjacency requirements must hold at every level.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

from .complexes import LambdaIndex, flag_completion, flag_map
from .ground import PointId
from .report import Report
from .systems import (
    InverseSystem,
    VertexThread,
    bonding_map,
    canonical_map,
    thread_image,
    vertex_threads,
)


@dataclass(frozen=True)
class CellGraph:
    """A reflexive symmetric relation; loops are implicit, edges stored as
    unordered pairs."""

    n_vertices: int
    edges: frozenset[frozenset[int]]

    def __post_init__(self) -> None:
        for e in self.edges:
            if len(e) != 2:
                raise ValueError("edges must be unordered pairs of distinct vertices")
            if not all(0 <= v < self.n_vertices for v in e):
                raise ValueError("edge endpoint out of range")

    def adjacent(self, a: int, b: int) -> bool:
        return a == b or frozenset((a, b)) in self.edges

    def star(self, a: int) -> frozenset[int]:
        out = {a}
        for e in self.edges:
            if a in e:
                out |= e
        return frozenset(out)

    def star_set(self, vertices: frozenset[int]) -> frozenset[int]:
        out: set[int] = set()
        for v in vertices:
            out |= self.star(v)
        return frozenset(out)


def graph_of_level(system: InverseSystem, lam: LambdaIndex) -> CellGraph:
    flag = system.levels[lam].flag
    return CellGraph(flag.n_vertices, frozenset(frozenset(e) for e in flag.k_simplices(1)))


@dataclass
class GraphSystem:
    lambdas: list[LambdaIndex]
    levels: dict[LambdaIndex, CellGraph]
    bonds: dict[tuple[LambdaIndex, LambdaIndex], tuple[int, ...]]

    def project(self, lam: LambdaIndex, mu: LambdaIndex, v: int) -> int:
        return self.bonds[(lam, mu)][v]

    def comparable_pairs(self) -> list[tuple[LambdaIndex, LambdaIndex]]:
        return [(a, b) for a in self.lambdas for b in self.lambdas if a <= b]

    @property
    def top(self) -> LambdaIndex | None:
        best = max(self.lambdas, key=lambda l: l.sort_key)
        return best if all(l <= best for l in self.lambdas) else None


def build_graph_system(system: InverseSystem) -> GraphSystem:
    """Extract the level graphs and verify every bond preserves adjacency."""
    levels = {lam: graph_of_level(system, lam) for lam in system.lambdas}
    bonds = {}
    for lam, mu in system.comparable_pairs():
        vm = bonding_map(system, lam, mu).vertex_map
        src, dst = levels[mu], levels[lam]
        for e in src.edges:
            a, b = sorted(e)
            if not dst.adjacent(vm[a], vm[b]):
                raise AssertionError("bond is not a graph homomorphism")
        bonds[(lam, mu)] = vm
    return GraphSystem(list(system.lambdas), levels, bonds)


# ---------------------------------------------------------------------------
# the star conditions


def check_star_contraction(
    gsystem: GraphSystem, z: VertexThread, lam: LambdaIndex
) -> tuple[bool, LambdaIndex | None]:
    """Find a level above lam whose double star of the thread projects into
    the single star at lam."""
    target = gsystem.levels[lam].star(z.at(lam))
    for mu in sorted((m for m in gsystem.lambdas if lam <= m), key=lambda l: l.sort_key):
        g = gsystem.levels[mu]
        double = g.star_set(g.star(z.at(mu)))
        vm = gsystem.bonds[(lam, mu)]
        if {vm[v] for v in double} <= target:
            return True, mu
    return False, None


def check_star_finiteness(
    gsystem: GraphSystem, z: VertexThread, lam: LambdaIndex
) -> tuple[bool, LambdaIndex | None]:
    """Vacuous on finite models; reported with the star size for profiling."""
    return True, lam


def check_star_conditions(gsystem: GraphSystem, system: InverseSystem) -> Report:
    threads = vertex_threads(system)
    bad = None
    star_sizes = []
    for z in threads:
        for lam in gsystem.lambdas:
            found, _ = check_star_contraction(gsystem, z, lam)
            if not found:
                bad = {"thread_top": z.at(gsystem.top), "lambda": list(lam.cover_ids)}
                break
            star_sizes.append(len(gsystem.levels[lam].star(z.at(lam))))
        if bad:
            break
    return Report(
        "star_conditions",
        bad is None,
        counterexample=bad,
        details={
            "threads": len(threads),
            "finiteness": "vacuous on finite ground models",
            "max_star": max(star_sizes, default=0),
        },
    )


# ---------------------------------------------------------------------------
# thread equivalence and the quotient


@dataclass(frozen=True)
class QuotientSpace:
    classes: tuple[tuple[int, ...], ...]  # thread ids, here top vertex ids
    class_of: tuple[int, ...]
    adjacency: dict[LambdaIndex, frozenset[tuple[int, int]]]

    def to_json(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "adjacency": {
                lam.json_key(): sorted(list(p) for p in pairs)
                for lam, pairs in self.adjacency.items()
            },
        }


@dataclass
class EquivalenceResult:
    transitive: bool
    witness: tuple[int, int, int] | None
    quotient: QuotientSpace | None


def equivalence_classes(gsystem: GraphSystem) -> EquivalenceResult:
    """Relate threads adjacent at every level; verify the relation is an
    equivalence before quotienting.  Failures are reported, not repaired."""
    top = gsystem.top
    if top is None:
        raise ValueError("graph system has no maximum level")
    n = gsystem.levels[top].n_vertices
    threads = [
        {lam: gsystem.bonds[(lam, top)][v] for lam in gsystem.lambdas} for v in range(n)
    ]

    def related(i: int, j: int) -> bool:
        return all(
            gsystem.levels[lam].adjacent(threads[i][lam], threads[j][lam])
            for lam in gsystem.lambdas
        )

    rel = [[related(i, j) for j in range(n)] for i in range(n)]
    for i in range(n):
        if not rel[i][i]:
            raise AssertionError("reflexivity cannot fail on a reflexive graph")
    for i, j, k in combinations(range(n), 3):
        for a, b, c in ((i, j, k), (j, i, k), (i, k, j)):
            if rel[a][b] and rel[b][c] and not rel[a][c]:
                return EquivalenceResult(False, (a, b, c), None)

    class_of = [-1] * n
    classes: list[tuple[int, ...]] = []
    for i in range(n):
        if class_of[i] >= 0:
            continue
        members = tuple(j for j in range(n) if rel[i][j])
        idx = len(classes)
        classes.append(members)
        for j in members:
            class_of[j] = idx
    adjacency = {}
    for lam in gsystem.lambdas:
        pairs = set()
        g = gsystem.levels[lam]
        for ci, cj in combinations(range(len(classes)), 2):
            if any(
                g.adjacent(threads[i][lam], threads[j][lam])
                for i in classes[ci]
                for j in classes[cj]
            ):
                pairs.add((ci, cj))
        for ci in range(len(classes)):
            pairs.add((ci, ci))
        adjacency[lam] = frozenset(pairs)
    return EquivalenceResult(
        True, None, QuotientSpace(tuple(classes), tuple(class_of), adjacency)
    )


def check_equivalence(gsystem: GraphSystem) -> Report:
    result = equivalence_classes(gsystem)
    return Report(
        "equivalence_classes",
        result.transitive,
        counterexample=None if result.transitive else {"witness_triple": list(result.witness)},
        details={
            "classes": None if result.quotient is None else len(result.quotient.classes)
        },
    )


def compare_quotient_to_ground(gsystem: GraphSystem, system: InverseSystem) -> Report:
    """Match quotient classes with ground points.

    Sends a point to the class of a vertex thread through the support of
    its canonical image at the top level, then checks the assignment is a
    bijection, that a thread's class matches its image point, and that two
    points share a level element exactly when their classes share a vertex
    there.
    """
    result = equivalence_classes(gsystem)
    if not result.transitive:
        return Report(
            "quotient_comparison",
            False,
            details={"skipped": "thread relation is not transitive"},
        )
    quotient = result.quotient
    assert quotient is not None
    top = gsystem.top
    assert top is not None
    points = list(system.family.ground.points)

    h: dict[PointId, int] = {}
    for x in points:
        support = canonical_map(system, top, x).carrier
        h[x] = quotient.class_of[support[0]]

    bijection = len(set(h.values())) == len(points) == len(quotient.classes)
    if not bijection:
        return Report(
            "quotient_comparison",
            False,
            details={"classes": len(quotient.classes), "points": len(points)},
            counterexample={"reason": "no bijection"},
        )

    threads = vertex_threads(system)
    for i, z in enumerate(threads):
        res = thread_image(system, z)
        if not res.resolved:
            return Report(
                "quotient_comparison",
                False,
                details={"skipped": "a vertex thread has a non-singleton image"},
            )
        (x,) = res.points
        if h[x] != quotient.class_of[z.at(top)]:
            return Report(
                "quotient_comparison",
                False,
                counterexample={"thread": i, "point": x},
                details={"reason": "class of thread disagrees with its image point"},
            )

    # Shared-element consistency: x and y lie in a common wedge of the level
    # exactly when their classes share a vertex there.
    thread_level = {
        (i, lam): gsystem.bonds[(lam, top)][threads[i].at(top)]
        for i in range(len(threads))
        for lam in gsystem.lambdas
    }
    class_vertices = {
        (ci, lam): {thread_level[(i, lam)] for i in quotient.classes[ci]}
        for ci in range(len(quotient.classes))
        for lam in gsystem.lambdas
    }
    for lam in gsystem.lambdas:
        level = system.levels[lam]
        for x, y in combinations(points, 2):
            common = any(x in v.wedge and y in v.wedge for v in level.vertices)
            shared = bool(class_vertices[(h[x], lam)] & class_vertices[(h[y], lam)])
            if common != shared:
                return Report(
                    "quotient_comparison",
                    False,
                    counterexample={"points": [x, y], "lambda": list(lam.cover_ids)},
                    details={"reason": "shared-element consistency"},
                )
    return Report(
        "quotient_comparison",
        True,
        details={"classes": len(quotient.classes), "points": len(points)},
    )


# ---------------------------------------------------------------------------
# nets


@dataclass(frozen=True)
class Net:
    """A choice of one vertex per level, with no compatibility required."""

    entries: tuple[tuple[LambdaIndex, int], ...]

    def at(self, lam: LambdaIndex) -> int:
        for l, v in self.entries:
            if l == lam:
                return v
        raise KeyError(lam)


def is_cauchy(gsystem: GraphSystem, y: Net) -> bool:
    """Projections of any two levels above a base must be adjacent there."""
    for lam0 in gsystem.lambdas:
        above = [m for m in gsystem.lambdas if lam0 <= m]
        projected = [gsystem.bonds[(lam0, m)][y.at(m)] for m in above]
        g = gsystem.levels[lam0]
        for a, b in combinations(projected, 2):
            if not g.adjacent(a, b):
                return False
    return True


def converge(gsystem: GraphSystem, y: Net) -> tuple[bool, VertexThread | None]:
    """Search all vertex threads for one levelwise adjacent to the net."""
    if not is_cauchy(gsystem, y):
        raise ValueError("convergence is only defined for Cauchy nets")
    top = gsystem.top
    if top is None:
        raise ValueError("graph system has no maximum level")
    n = gsystem.levels[top].n_vertices
    for v in range(n):
        if all(
            gsystem.levels[lam].adjacent(gsystem.bonds[(lam, top)][v], y.at(lam))
            for lam in gsystem.lambdas
        ):
            entries = tuple(
                (lam, gsystem.bonds[(lam, top)][v])
                for lam in sorted(gsystem.lambdas, key=lambda l: l.sort_key)
            )
            return True, VertexThread(entries)
    return False, None


def thread_as_net(z: VertexThread) -> Net:
    return Net(z.entries)


def perturbed_thread_net(
    gsystem: GraphSystem, z: VertexThread, rng: random.Random
) -> Net:
    """Move one non-maximal level of a thread to an adjacent vertex."""
    top = gsystem.top
    non_max = [lam for lam in gsystem.lambdas if lam != top]
    lam = non_max[rng.randrange(len(non_max))]
    star = sorted(gsystem.levels[lam].star(z.at(lam)))
    new = star[rng.randrange(len(star))]
    entries = tuple((l, new if l == lam else v) for l, v in z.entries)
    return Net(entries)


def sample_cauchy_nets(
    gsystem: GraphSystem, system: InverseSystem, count: int, seed: int
) -> list[Net]:
    """Seeded mix of perturbed threads and random nets kept when Cauchy."""
    rng = random.Random(seed)
    threads = vertex_threads(system)
    lambdas = sorted(gsystem.lambdas, key=lambda l: l.sort_key)
    nets: list[Net] = []
    while len(nets) < count:
        if rng.random() < 0.5:
            z = threads[rng.randrange(len(threads))]
            candidate = perturbed_thread_net(gsystem, z, rng)
        else:
            entries = tuple(
                (lam, rng.randrange(gsystem.levels[lam].n_vertices)) for lam in lambdas
            )
            candidate = Net(entries)
        if is_cauchy(gsystem, candidate):
            nets.append(candidate)
    return nets


def cauchy_sweep(
    gsystem: GraphSystem, system: InverseSystem, count: int, seed: int
) -> Report:
    nets = sample_cauchy_nets(gsystem, system, count, seed)
    bad = None
    for i, y in enumerate(nets):
        ok, _ = converge(gsystem, y)
        if not ok:
            bad = {"net": i}
            break
    return Report(
        "cauchy_sweep",
        bad is None,
        counterexample=bad,
        details={"nets": count, "seed": seed},
    )


# ---------------------------------------------------------------------------
# consistency of the flag functor with the complex-level system


def check_flag_functor(gsystem: GraphSystem, system: InverseSystem) -> Report:
    """Flag completions of the level graphs and bonds must reproduce the
    flag complexes and their bonding maps."""
    bad = None
    for lam in gsystem.lambdas:
        rebuilt = flag_completion(gsystem.levels[lam], system.max_dim)
        if rebuilt.simplices != system.levels[lam].flag.simplices:
            bad = {"lambda": list(lam.cover_ids), "reason": "complex mismatch"}
            break
    if bad is None:
        for lam, mu in gsystem.comparable_pairs():
            vm = gsystem.bonds[(lam, mu)]
            induced = flag_map(vm, system.levels[mu].flag, system.levels[lam].flag)
            if induced.vertex_map != bonding_map(system, lam, mu).vertex_map:
                bad = {"lambda": list(lam.cover_ids), "mu": list(mu.cover_ids)}
                break
    return Report("flag_functor", bad is None, counterexample=bad)


def graph_dot(g: CellGraph, name: str) -> str:
    lines = [f"graph {name} {{"]
    for v in range(g.n_vertices):
        lines.append(f"  {v};")
    for e in sorted(sorted(e) for e in g.edges):
        lines.append(f"  {e[0]} -- {e[1]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
