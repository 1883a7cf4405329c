"""Finite ground models of spaces, cover families, and partitions of unity.

A ground model is a finite point set with an optional exact-rational metric.
Covers are families of point subsets; every subset of a finite model counts
as closed.  Partitions of unity are tables of nonnegative rationals whose
per-point sums equal 1 exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Sequence

from .errors import GuardExceeded, InputError
from .report import FORMAT_VERSION, Report, frac_to_str, str_to_frac

PointId = int
ElementId = int
CoverId = int


class Metric(Enum):
    EUCLIDEAN = "euclidean"
    CIRCLE_ARC = "circle_arc"
    HAMMING = "hamming"
    NONE = "none"


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class GroundSpace:
    """A finite point set standing in for a space.

    Points are the dense integers ``0..n_points-1``.  Coordinates, when
    present, are exact rationals.  Under the circle-arc metric a coordinate
    is either ``(angle,)`` on a single circle of circumference 1, or
    ``(circle, angle)`` on a wedge of circles glued at angle 0; distances on
    a wedge are path lengths through the glue point.
    """

    n_points: int
    coords: tuple[tuple[Fraction, ...], ...] | None = None
    metric: Metric = Metric.NONE
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError("a ground space needs at least one point")
        if self.coords is not None and len(self.coords) != self.n_points:
            raise ValueError("one coordinate vector per point required")
        if self.labels is not None and len(self.labels) != self.n_points:
            raise ValueError("one label per point required")

    @property
    def points(self) -> range:
        return range(self.n_points)

    def distance(self, p: PointId, q: PointId) -> Fraction:
        if self.metric is Metric.NONE:
            raise ValueError("space has no metric")
        if self.metric is Metric.HAMMING:
            if self.labels is None:
                raise ValueError("hamming metric needs bitstring labels")
            a, b = self.labels[p], self.labels[q]
            return Fraction(sum(x != y for x, y in zip(a, b)))
        assert self.coords is not None
        a, b = self.coords[p], self.coords[q]
        if self.metric is Metric.CIRCLE_ARC:
            return _arc_distance(a, b)
        if len(a) == 1:
            return abs(a[0] - b[0])
        return _euclidean_distance(a, b)

    def distance_sq(self, p: PointId, q: PointId) -> Fraction:
        """Exact squared distance; preferred for euclidean comparisons."""
        if self.metric is Metric.EUCLIDEAN:
            assert self.coords is not None
            a, b = self.coords[p], self.coords[q]
            return sum(((x - y) ** 2 for x, y in zip(a, b)), Fraction(0))
        return self.distance(p, q) ** 2

    def ball(self, center: PointId, radius: Fraction) -> frozenset[PointId]:
        """Closed metric ball, decided by exact comparisons."""
        r = Fraction(radius)
        if self.metric is Metric.EUCLIDEAN:
            rsq = r * r
            return frozenset(p for p in self.points if self.distance_sq(center, p) <= rsq)
        return frozenset(p for p in self.points if self.distance(center, p) <= r)


def _arc(a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b) % 1
    return min(d, 1 - d)


def _arc_distance(a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> Fraction:
    if len(a) == 1:
        return _arc(a[0], b[0])
    # (circle, angle) pairs; angle 0 is the glue point of every circle, so
    # cross-circle distances run through it.
    ca, xa = a
    cb, xb = b
    if ca == cb:
        return _arc(xa, xb)
    return _arc(xa, Fraction(0)) + _arc(Fraction(0), xb)


def _euclidean_distance(a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> Fraction:
    sq = sum(((x - y) ** 2 for x, y in zip(a, b)), Fraction(0))
    root = _exact_sqrt(sq)
    if root is not None:
        return root
    # No rational root: fall back to the float value.  All shipped space
    # generators are one-dimensional or arc/hamming metric, so this branch
    # only serves imported point clouds.
    return Fraction(math.sqrt(float(sq)))


def _exact_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        raise ValueError("negative squared distance")
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


# --- generators ------------------------------------------------------------


class SpaceKind:
    """Marker base for space generator kinds."""


@dataclass(frozen=True)
class IntervalGrid(SpaceKind):
    pass


@dataclass(frozen=True)
class CircleGrid(SpaceKind):
    pass


@dataclass(frozen=True)
class CantorDepth(SpaceKind):
    pass


@dataclass(frozen=True)
class WedgeOfCircles(SpaceKind):
    count: int


@dataclass(frozen=True)
class PointCloudFile(SpaceKind):
    path: str


def generate_space(kind: SpaceKind, resolution: int) -> GroundSpace:
    """Build a standard ground model at the given resolution.

    IntervalGrid(m) is m+1 equally spaced points on [0,1]; CircleGrid(m) is
    m points on a circle of circumference 1; CantorDepth(d) is all 2**d
    bitstrings; WedgeOfCircles(c) glues c circle grids at one point.
    """
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    if isinstance(kind, IntervalGrid):
        m = resolution
        coords = tuple((Fraction(k, m),) for k in range(m + 1))
        return GroundSpace(m + 1, coords, Metric.EUCLIDEAN)
    if isinstance(kind, CircleGrid):
        m = resolution
        coords = tuple((Fraction(k, m),) for k in range(m))
        return GroundSpace(m, coords, Metric.CIRCLE_ARC)
    if isinstance(kind, CantorDepth):
        d = resolution
        labels = tuple(format(i, f"0{d}b") for i in range(2**d))
        return GroundSpace(2**d, None, Metric.HAMMING, labels)
    if isinstance(kind, WedgeOfCircles):
        c, m = kind.count, resolution
        if c < 1:
            raise ValueError("a wedge needs at least one circle")
        if m < 2:
            raise ValueError("each circle needs at least two points")
        coords: list[tuple[Fraction, ...]] = [(Fraction(0), Fraction(0))]
        for circle in range(c):
            for k in range(1, m):
                coords.append((Fraction(circle), Fraction(k, m)))
        return GroundSpace(len(coords), tuple(coords), Metric.CIRCLE_ARC)
    if isinstance(kind, PointCloudFile):
        return load_space(Path(kind.path))
    raise ValueError(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class CoverElement:
    id: ElementId
    member_of: CoverId
    pointset: frozenset[PointId]

    def __post_init__(self) -> None:
        if not self.pointset:
            raise ValueError("cover elements must be nonempty")


@dataclass(frozen=True)
class Indicator:
    """Weights split evenly among the elements containing each point."""


@dataclass(frozen=True)
class LinearBump:
    """Tent weights max(0, radius - d(x, center)), clamped to the element.

    ``bumps`` lists one (element id, center point, radius) triple per
    element.  Points where every bump vanishes fall back to indicator
    weights so rows always sum to 1.
    """

    bumps: tuple[tuple[ElementId, PointId, Fraction], ...]


WeightSpec = Indicator | LinearBump


@dataclass(frozen=True)
class Cover:
    id: CoverId
    elements: tuple[CoverElement, ...]
    weight_spec: WeightSpec = Indicator()

    def __post_init__(self) -> None:
        ids = [e.id for e in self.elements]
        if ids != list(range(len(ids))):
            raise ValueError("element ids must be 0..k-1 in list order")
        for e in self.elements:
            if e.member_of != self.id:
                raise ValueError("element labelled with the wrong cover id")

    def union(self) -> frozenset[PointId]:
        out: set[PointId] = set()
        for e in self.elements:
            out |= e.pointset
        return frozenset(out)

    def elements_containing(self, x: PointId) -> list[CoverElement]:
        return [e for e in self.elements if x in e.pointset]


def cover_from_pointsets(
    cover_id: CoverId,
    pointsets: Sequence[Iterable[PointId]],
    weight_spec: WeightSpec = Indicator(),
) -> Cover:
    elements = tuple(
        CoverElement(i, cover_id, frozenset(ps)) for i, ps in enumerate(pointsets)
    )
    return Cover(cover_id, elements, weight_spec)


@dataclass(frozen=True)
class CoverFamily:
    covers: tuple[Cover, ...]
    ground: GroundSpace

    def __post_init__(self) -> None:
        if [c.id for c in self.covers] != list(range(len(self.covers))):
            raise ValueError("cover ids must be 0..k-1 in list order")
        all_points = frozenset(self.ground.points)
        for c in self.covers:
            if c.union() != all_points:
                raise ValueError(f"cover {c.id} does not cover the space")


def make_family(space: GroundSpace, pointset_lists: Sequence[Sequence[Iterable[PointId]]]) -> CoverFamily:
    covers = tuple(cover_from_pointsets(i, ps) for i, ps in enumerate(pointset_lists))
    return CoverFamily(covers, space)


# --- cover schemes ----------------------------------------------------------


class CoverScheme:
    """Marker base for cover generator schemes."""


@dataclass(frozen=True)
class DyadicIntervals(CoverScheme):
    depth: int
    overlap: Fraction  # absolute stretch added on each side


@dataclass(frozen=True)
class Arcs(CoverScheme):
    count: int
    overlap: Fraction  # fraction of one arc length added on each side


@dataclass(frozen=True)
class Cylinders(CoverScheme):
    prefix_len: int


@dataclass(frozen=True)
class Balls(CoverScheme):
    radius: Fraction
    stride: int


def generate_cover(space: GroundSpace, scheme: CoverScheme, cover_id: CoverId = 0) -> Cover:
    """Materialize a cover scheme as point subsets of the ground model.

    Raises ValueError when a scheme parameterization produces an empty
    element or fails to cover the space.
    """
    if isinstance(scheme, DyadicIntervals):
        pointsets = _dyadic_pointsets(space, scheme.depth, Fraction(scheme.overlap))
    elif isinstance(scheme, Arcs):
        pointsets = _arc_pointsets(space, scheme.count, Fraction(scheme.overlap))
    elif isinstance(scheme, Cylinders):
        pointsets = _cylinder_pointsets(space, scheme.prefix_len)
    elif isinstance(scheme, Balls):
        pointsets = _ball_pointsets(space, Fraction(scheme.radius), scheme.stride)
    else:
        raise ValueError(f"unknown cover scheme {scheme!r}")
    for ps in pointsets:
        if not ps:
            raise ValueError(f"{scheme!r} produced an empty element")
    covered = set().union(*pointsets)
    if covered != set(space.points):
        raise ValueError(f"{scheme!r} does not cover the space")
    return cover_from_pointsets(cover_id, pointsets)


def _coord1(space: GroundSpace, p: PointId) -> Fraction:
    if space.coords is None:
        raise ValueError("scheme needs coordinates")
    return space.coords[p][-1]


def _dyadic_pointsets(space: GroundSpace, depth: int, overlap: Fraction) -> list[frozenset[PointId]]:
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    n = 2**depth
    cell = Fraction(1, n)
    out = []
    for k in range(n):
        lo, hi = k * cell - overlap, (k + 1) * cell + overlap
        out.append(frozenset(p for p in space.points if lo <= _coord1(space, p) <= hi))
    return out


def _arc_pointsets(space: GroundSpace, count: int, overlap: Fraction) -> list[frozenset[PointId]]:
    if count < 1:
        raise ValueError("need at least one arc")
    out = []
    for k in range(count):
        members = []
        for p in space.points:
            # position of the point in units of arcs, relative to arc k
            t = (_coord1(space, p) * count - k) % count
            if t <= 1 + overlap or t >= count - overlap:
                members.append(p)
        out.append(frozenset(members))
    return out


def _cylinder_pointsets(space: GroundSpace, prefix_len: int) -> list[frozenset[PointId]]:
    if space.labels is None:
        raise ValueError("cylinder scheme needs labelled points")
    if prefix_len < 1 or any(len(lb) < prefix_len for lb in space.labels):
        raise ValueError("prefix length out of range")
    prefixes = sorted({lb[:prefix_len] for lb in space.labels})
    return [
        frozenset(p for p in space.points if space.labels[p].startswith(pref))
        for pref in prefixes
    ]


def _ball_pointsets(space: GroundSpace, radius: Fraction, stride: int) -> list[frozenset[PointId]]:
    if stride < 1:
        raise ValueError("stride must be positive")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return [space.ball(c, radius) for c in range(0, space.n_points, stride)]


# ---------------------------------------------------------------------------
# conditions on a family


def star_union(cover: Cover, x: PointId) -> frozenset[PointId]:
    """Union of the cover elements containing x."""
    out: set[PointId] = set()
    for e in cover.elements:
        if x in e.pointset:
            out |= e.pointset
    return frozenset(out)


def check_local_refinement(
    family: CoverFamily, neighborhoods: Sequence[tuple[PointId, Iterable[PointId]]]
) -> Report:
    """For each (x, U): some cover's star at x must fit inside U.

    The neighborhood list is the finite surrogate for arbitrary open
    neighborhoods; the report records each pair with its witness cover.
    """
    rows = []
    passed = True
    counterexample = None
    for x, nbhd in neighborhoods:
        u = frozenset(nbhd)
        if x not in u:
            raise ValueError(f"neighborhood of point {x} does not contain it")
        witness: CoverId | None = None
        for cover in family.covers:
            if star_union(cover, x) <= u:
                witness = cover.id
                break
        rows.append({"point": x, "neighborhood_size": len(u), "witness_cover": witness})
        if witness is None:
            passed = False
            if counterexample is None:
                counterexample = {"point": x, "neighborhood": sorted(u)}
    return Report(
        "local_refinement",
        passed,
        witness=None if not passed else sorted({r["witness_cover"] for r in rows}),
        counterexample=counterexample,
        details={"pairs": rows},
    )


def singleton_neighborhoods(space: GroundSpace) -> list[tuple[PointId, frozenset[PointId]]]:
    return [(p, frozenset({p})) for p in space.points]


def ball_neighborhoods(
    space: GroundSpace, radii: Sequence[Fraction]
) -> list[tuple[PointId, frozenset[PointId]]]:
    """Metric-ball schedule: one neighborhood per point per radius."""
    return [(p, space.ball(p, Fraction(r))) for r in radii for p in space.points]


SELECTION_GUARD = 10**6


def check_selection_completeness(
    family: CoverFamily,
    mode: str = "exhaustive",
    sample_count: int = 1000,
    seed: int = 0,
) -> Report:
    """One element per cover: small-subfamily intersection must force a
    common point.

    A selection has the finite-intersection surrogate when all its pairs
    and triples intersect; such selections must have nonempty total
    intersection.  Exhaustive mode enumerates every selection (guarded);
    sampled mode only falsifies and says so in the report.
    """
    sizes = [len(c.elements) for c in family.covers]
    total = math.prod(sizes)
    details: dict = {"mode": mode, "selection_space": total}
    pools = [c.elements for c in family.covers]

    if mode == "exhaustive":
        if total > SELECTION_GUARD:
            raise GuardExceeded(
                f"selection space {total} exceeds exhaustive guard {SELECTION_GUARD}"
            )
        selections: Iterable[tuple[CoverElement, ...]] = product(*pools)
        checked = total
    elif mode == "sampled":
        import random

        rng = random.Random(seed)
        selections = (
            tuple(pool[rng.randrange(len(pool))] for pool in pools)
            for _ in range(sample_count)
        )
        checked = sample_count
        details["note"] = "sampled, not a proof"
        details["samples"] = sample_count
        details["seed"] = seed
    else:
        raise ValueError(f"unknown mode {mode!r}")

    counterexample = None
    fip_selections = 0
    for sel in selections:
        sets = [e.pointset for e in sel]
        if not _small_subfamilies_intersect(sets):
            continue
        fip_selections += 1
        full = sets[0]
        for s in sets[1:]:
            full = full & s
            if not full:
                break
        if not full:
            counterexample = [[e.member_of, e.id] for e in sel]
            break
    details["checked"] = checked
    details["with_intersection_property"] = fip_selections
    return Report(
        "selection_completeness",
        counterexample is None,
        counterexample=counterexample,
        details=details,
    )


def _small_subfamilies_intersect(sets: Sequence[frozenset[PointId]]) -> bool:
    for a, b in combinations(sets, 2):
        if not a & b:
            return False
    for a, b, c in combinations(sets, 3):
        if not a & b & c:
            return False
    return True


# ---------------------------------------------------------------------------
# partitions of unity


@dataclass(frozen=True)
class WeightTable:
    """Per-point weights of a cover's elements; every column sums to 1."""

    cover: CoverId
    values: tuple[tuple[tuple[ElementId, PointId], Fraction], ...]

    def weight(self, element: ElementId, point: PointId) -> Fraction:
        return self._index().get((element, point), Fraction(0))

    def _index(self) -> dict[tuple[ElementId, PointId], Fraction]:
        if not hasattr(self, "_cache"):
            object.__setattr__(self, "_cache", dict(self.values))
        return self._cache  # type: ignore[attr-defined]

    def column(self, point: PointId) -> dict[ElementId, Fraction]:
        return {e: w for (e, p), w in self.values if p == point}


def partition_of_unity(cover: Cover, space: GroundSpace | None = None) -> WeightTable:
    """Exact partition of unity subordinated to the cover.

    Indicator spec splits weight evenly among the elements containing a
    point.  LinearBump needs the space's metric and clamps each bump to its
    element so positive weight implies membership.
    """
    points = sorted(cover.union())
    values: list[tuple[tuple[ElementId, PointId], Fraction]] = []
    spec = cover.weight_spec
    if isinstance(spec, LinearBump):
        if space is None or space.metric is Metric.NONE:
            raise ValueError("linear bump weights need a metric")
        bump_of = {eid: (center, Fraction(radius)) for eid, center, radius in spec.bumps}
        for x in points:
            raw: dict[ElementId, Fraction] = {}
            for e in cover.elements:
                if x not in e.pointset or e.id not in bump_of:
                    continue
                center, radius = bump_of[e.id]
                h = radius - space.distance(x, center)
                if h > 0:
                    raw[e.id] = h
            if raw:
                total = sum(raw.values())
                for eid in sorted(raw):
                    values.append(((eid, x), raw[eid] / total))
            else:
                values.extend(_indicator_column(cover, x))
    else:
        for x in points:
            values.extend(_indicator_column(cover, x))
    table = WeightTable(cover.id, tuple(values))
    _check_partition(table, cover, points)
    return table


def _indicator_column(cover: Cover, x: PointId) -> list[tuple[tuple[ElementId, PointId], Fraction]]:
    carriers = [e.id for e in cover.elements if x in e.pointset]
    share = Fraction(1, len(carriers))
    return [((eid, x), share) for eid in carriers]


def _check_partition(table: WeightTable, cover: Cover, points: Sequence[PointId]) -> None:
    by_point: dict[PointId, Fraction] = {x: Fraction(0) for x in points}
    membership = {e.id: e.pointset for e in cover.elements}
    for (eid, x), w in table.values:
        if w < 0:
            raise AssertionError("negative weight")
        if w > 0 and x not in membership[eid]:
            raise AssertionError("positive weight outside the element")
        by_point[x] += w
    for x, s in by_point.items():
        if s != 1:
            raise AssertionError(f"weights at point {x} sum to {s}, not 1")


def partition_tables(family: CoverFamily) -> dict[CoverId, WeightTable]:
    return {c.id: partition_of_unity(c, family.ground) for c in family.covers}


# ---------------------------------------------------------------------------
# restriction


def restrict_family(family: CoverFamily, subset: Iterable[PointId]) -> CoverFamily:
    """Trace the family on a nonempty point subset; empty traces are dropped.

    Points are reindexed densely in their original order.  Linear-bump
    specs survive when every center lies in the subset, otherwise the
    restricted cover falls back to indicator weights.
    """
    keep = sorted(set(subset))
    if not keep:
        raise ValueError("cannot restrict to the empty set")
    if not set(keep) <= set(family.ground.points):
        raise ValueError("subset contains unknown points")
    old_to_new = {old: new for new, old in enumerate(keep)}
    g = family.ground
    space = GroundSpace(
        len(keep),
        tuple(g.coords[p] for p in keep) if g.coords is not None else None,
        g.metric,
        tuple(g.labels[p] for p in keep) if g.labels is not None else None,
    )
    covers = []
    for cover in family.covers:
        traces: list[tuple[ElementId, frozenset[PointId]]] = []
        for e in cover.elements:
            trace = frozenset(old_to_new[p] for p in e.pointset if p in old_to_new)
            if trace:
                traces.append((e.id, trace))
        spec: WeightSpec = Indicator()
        if isinstance(cover.weight_spec, LinearBump):
            surviving = {eid for eid, _ in traces}
            bumps = [b for b in cover.weight_spec.bumps if b[0] in surviving]
            if all(center in old_to_new for _, center, _ in bumps):
                remap = {old: new for new, (old, _) in enumerate(traces)}
                spec = LinearBump(
                    tuple((remap[eid], old_to_new[center], radius) for eid, center, radius in bumps)
                )
        elements = tuple(
            CoverElement(i, cover.id, ps) for i, (_, ps) in enumerate(traces)
        )
        covers.append(Cover(cover.id, elements, spec))
    return CoverFamily(tuple(covers), space)


# ---------------------------------------------------------------------------
# JSON formats


def space_to_json(space: GroundSpace) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "points": space.n_points,
        "coords": None
        if space.coords is None
        else [[frac_to_str(x) for x in vec] for vec in space.coords],
        "metric": space.metric.value,
        "labels": None if space.labels is None else list(space.labels),
    }


def space_from_json(data: dict) -> GroundSpace:
    try:
        coords = data["coords"]
        parsed = (
            None
            if coords is None
            else tuple(tuple(str_to_frac(x) for x in vec) for vec in coords)
        )
        labels = data["labels"]
        return GroundSpace(
            int(data["points"]),
            parsed,
            Metric(data["metric"]),
            None if labels is None else tuple(labels),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed space file: {exc}") from exc


def load_space(path: Path) -> GroundSpace:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read space file {path}: {exc}") from exc
    return space_from_json(data)


def cover_to_json(cover: Cover) -> dict:
    return {
        "cover_id": cover.id,
        "elements": [
            {"id": e.id, "points": sorted(e.pointset)} for e in cover.elements
        ],
    }


def cover_from_json(data: dict, cover_id: CoverId | None = None) -> Cover:
    try:
        cid = int(data["cover_id"]) if cover_id is None else cover_id
        return cover_from_pointsets(
            cid, [set(map(int, e["points"])) for e in data["elements"]]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed cover object: {exc}") from exc


def family_to_json(family: CoverFamily) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "covers": [cover_to_json(c) for c in family.covers],
    }


def family_from_json(data: dict, space: GroundSpace) -> CoverFamily:
    try:
        covers = tuple(
            cover_from_json(obj, cover_id=i) for i, obj in enumerate(data["covers"])
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed covers file: {exc}") from exc
    return CoverFamily(covers, space)


def load_family(path: Path, space: GroundSpace) -> CoverFamily:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read covers file {path}: {exc}") from exc
    return family_from_json(data, space)
