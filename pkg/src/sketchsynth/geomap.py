"""Labeled 2D map and sketch-to-region-sequence parsing.

Coordinates are meters in the map frame. Strokes are resampled to a fixed
spacing before region lookup so the parse does not depend on input device
rate, and brief touches from a finger slipping across a corner are discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import SketchParseError, WorldError
from .knowledge import Domain, World, world_insert

RESAMPLE_STEP = 0.02      # meters between samples after resampling
TRANSIENT_ARC = 0.10      # touches shorter than this are treated as slips
SELF_LOOP_TURN = math.radians(270.0)  # net turning angle of a deliberate loop
TURN_SPACING = 0.10       # chord length for turning measurement (smooths jitter)

Point = tuple[float, float]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    id: str
    label: str
    polygon: tuple[Point, ...]


@dataclass(frozen=True)
class MapModel:
    regions: tuple[Region, ...] = ()
    icons: tuple[tuple[str, Point], ...] = ()  # (entity id, position)

    def region(self, region_id: str) -> Optional[Region]:
        for r in self.regions:
            if r.id == region_id:
                return r
        return None


@dataclass(frozen=True)
class Sketch:
    """One stroke: (x, y, t-milliseconds) samples with nondecreasing time."""

    points: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        times = [p[2] for p in self.points]
        if any(b < a for a, b in zip(times, times[1:])):
            raise SketchParseError("sketch timestamps must be nondecreasing")
        if 0 < len(self.points) < 2:
            raise SketchParseError("a non-empty stroke needs at least 2 points")


@dataclass(frozen=True)
class RegionSequence:
    regions: tuple[str, ...]
    self_loops: frozenset[int] = frozenset()
    attachment: Optional[str] = None  # set only when parsed as an attached recording


# ---------------------------------------------------------------------------
# Polygon primitives
# ---------------------------------------------------------------------------


def polygon_area(polygon: tuple[Point, ...]) -> float:
    total = 0.0
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return abs(total) / 2.0


def _on_segment(p: Point, a: Point, b: Point, eps: float = 1e-9) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > eps:
        return False
    dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    if dot < -eps:
        return False
    sq = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    return dot <= sq + eps

def point_in_polygon(point: Point, polygon: tuple[Point, ...]) -> bool:
    """Crossing-number test; points on the boundary count as inside."""
    n = len(polygon)
    for i in range(n):
        if _on_segment(point, polygon[i], polygon[(i + 1) % n]):
            return True
    x, y = point
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 <= y < y2) or (y2 <= y < y1):
            xi = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xi:
                inside = not inside
    return inside


def _segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if abs(v) < 1e-12:
            return 0
        return 1 if v > 0 else -1

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def polygon_is_simple(polygon: tuple[Point, ...]) -> bool:
    n = len(polygon)
    if n < 3:
        return False
    for i in range(n):
        a, b = polygon[i], polygon[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = polygon[j], polygon[(j + 1) % n]
            if _segments_cross(a, b, c, d):
                return False
    return True


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def region_at(map_model: MapModel, point: Point) -> Optional[str]:
    """Region containing the point; smallest area wins on overlap."""
    best: Optional[Region] = None
    best_area = math.inf
    for region in map_model.regions:
        if point_in_polygon(point, region.polygon):
            area = polygon_area(region.polygon)
            if area < best_area or (area == best_area and (best is None or region.id < best.id)):
                best, best_area = region, area
    return best.id if best else None


def add_region(map_model: MapModel, polygon: tuple[Point, ...], label: str) -> MapModel:
    if not polygon_is_simple(polygon):
        raise SketchParseError(f"region polygon for {label!r} is not a simple polygon")
    if polygon_area(polygon) <= 0:
        raise SketchParseError(f"region polygon for {label!r} is degenerate")
    base = label.strip().lower()
    region_id = base
    n = 2
    while map_model.region(region_id) is not None:
        region_id = f"{base}_{n}"
        n += 1
    region = Region(region_id, label, tuple(polygon))
    return replace(map_model, regions=map_model.regions + (region,))


def place_icon(map_model: MapModel, world: World, domain: Domain,
               entity_type: str, point: Point) -> tuple[MapModel, World, str]:
    region_id = region_at(map_model, point)
    if region_id is None:
        raise WorldError(f"icon at {point} is outside every region")
    new_world, entity_id = world_insert(world, domain, entity_type, region_id, "user")
    new_map = replace(map_model, icons=map_model.icons + ((entity_id, point),))
    return new_map, new_world, entity_id


# ---------------------------------------------------------------------------
# Sketch parsing
# ---------------------------------------------------------------------------


def _resample(points: list[Point], step: float = RESAMPLE_STEP) -> list[Point]:
    if len(points) < 2:
        return list(points)
    out = [points[0]]
    carry = 0.0
    for a, b in zip(points, points[1:]):
        seg = math.dist(a, b)
        if seg == 0:
            continue
        pos = step - carry
        while pos <= seg:
            t = pos / seg
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
            pos += step
        carry = seg - (pos - step)
    if out[-1] != points[-1]:
        out.append(points[-1])
    return out


@dataclass
class _Run:
    region: Optional[str]
    samples: list[Point]

    @property
    def arc(self) -> float:
        return sum(math.dist(a, b) for a, b in zip(self.samples, self.samples[1:]))


def _label_runs(map_model: MapModel, samples: list[Point]) -> list[_Run]:
    runs: list[_Run] = []
    for p in samples:
        rid = region_at(map_model, p)
        if runs and runs[-1].region == rid:
            runs[-1].samples.append(p)
        else:
            runs.append(_Run(rid, [p]))
    return runs


def _coalesce(runs: list[_Run]) -> list[_Run]:
    out: list[_Run] = []
    for run in runs:
        if out and out[-1].region == run.region:
            out[-1].samples.extend(run.samples)
        else:
            out.append(_Run(run.region, list(run.samples)))
    return out


def _drop_transient_touches(runs: list[_Run]) -> list[_Run]:
    # Colored interior runs shorter than the slip threshold are removed;
    # first and last runs always survive (the stroke starts and ends there
    # on purpose).
    changed = True
    while changed:
        changed = False
        for i in range(1, len(runs) - 1):
            run = runs[i]
            if run.region is not None and run.arc < TRANSIENT_ARC:
                del runs[i]
                runs = _coalesce(runs)
                changed = True
                break
    return runs


def _resolve_gaps(runs: list[_Run]) -> list[_Run]:
    # An uncolored excursion that leaves a region and comes right back is a
    # wobble unless it curves like a drawn loop; a wobble merges the two
    # touches into one, a loop keeps them as a deliberate repeat.
    out: list[_Run] = []
    i = 0
    while i < len(runs):
        run = runs[i]
        if run.region is None:
            prev = out[-1] if out else None
            nxt = runs[i + 1] if i + 1 < len(runs) else None
            if (prev is not None and nxt is not None
                    and prev.region == nxt.region and prev.region is not None):
                deliberate = (run.arc >= TRANSIENT_ARC
                              and abs(_net_turning(run.samples)) >= SELF_LOOP_TURN - 1e-6)
                if not deliberate:
                    prev.samples.extend(nxt.samples)
                    i += 2
                    continue
            i += 1
            continue
        out.append(_Run(run.region, list(run.samples)))
        i += 1
    return out


def _chords(samples: list[Point]) -> list[Point]:
    # ~10cm chords; pen jitter at the sampling scale cannot accumulate into
    # phantom turning
    stride = max(1, round(TURN_SPACING / RESAMPLE_STEP))
    pts = list(samples[::stride])
    if samples and (not pts or pts[-1] != samples[-1]):
        pts.append(samples[-1])
    return pts


def _turn_angles(pts: list[Point]) -> list[float]:
    out = []
    for i in range(1, len(pts) - 1):
        ax = pts[i][0] - pts[i - 1][0]
        ay = pts[i][1] - pts[i - 1][1]
        bx = pts[i + 1][0] - pts[i][0]
        by = pts[i + 1][1] - pts[i][1]
        if (ax == 0 and ay == 0) or (bx == 0 and by == 0):
            out.append(0.0)
            continue
        out.append(math.atan2(ax * by - ay * bx, ax * bx + ay * by))
    return out


def _net_turning(samples: list[Point]) -> float:
    return sum(_turn_angles(_chords(samples)))


def _has_closed_curve(samples: list[Point]) -> bool:
    """Does any sub-stroke turn through >= 270 degrees and come back on
    itself? Detects a drawn loop even when the stroke enters the region on a
    curve first."""
    pts = _chords(samples)
    turns = _turn_angles(pts)
    if not turns:
        return False
    cumulative = [0.0]
    for t in turns:
        cumulative.append(cumulative[-1] + t)
    # cumulative[k] is the heading change up to chord point k+1
    n = len(cumulative)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(cumulative[j] - cumulative[i]) < SELF_LOOP_TURN - 1e-6:
                continue
            a, b = pts[i], pts[min(j + 1, len(pts) - 1)]
            arc = (j - i) * TURN_SPACING
            if arc >= TRANSIENT_ARC and math.dist(a, b) <= 0.35 * arc:
                return True
    return False


def parse_sketch(map_model: MapModel, sketch: Sketch, attached: bool = False) -> RegionSequence:
    """Turn a stroke into the ordered regions the robot must visit.

    The first region is dropped for an initial recording so the task is not
    pinned to a start location; for an attached recording it is reported as
    the attachment point instead. A closed curve drawn inside one region, or
    an excursion that leaves and re-enters a region, reads as a self-loop.
    """
    if not sketch.points:
        raise SketchParseError("empty sketch")
    samples = _resample([(x, y) for x, y, _ in sketch.points])
    runs = _label_runs(map_model, samples)
    runs = _drop_transient_touches(runs)
    runs = _resolve_gaps(runs)
    if not runs:
        raise SketchParseError("empty sketch: stroke never enters a colored region")

    entries: list[str] = []
    loop_indices: set[int] = set()
    first_run_has_gesture = False
    for idx, run in enumerate(runs):
        entries.append(run.region)
        if _has_closed_curve(run.samples):
            if idx == 0:
                first_run_has_gesture = True
            loop_indices.add(len(entries) - 1)
            entries.append(run.region)
    # Re-entries through uncolored space also read as self-loops.
    for i in range(len(entries) - 1):
        if entries[i] == entries[i + 1]:
            loop_indices.add(i)

    attachment = None
    drop_first = True
    if attached:
        attachment = entries[0]
        # A self-loop gesture at the anchor region is task content, not
        # anchoring, so it is kept in full.
        drop_first = not (first_run_has_gesture or (len(runs) >= 2 and runs[0].region == runs[1].region))
    if drop_first:
        entries = entries[1:]
        loop_indices = {i - 1 for i in loop_indices if i >= 1}
        loop_indices = {i for i in loop_indices
                        if i + 1 < len(entries) and entries[i] == entries[i + 1]}
    return RegionSequence(tuple(entries), frozenset(loop_indices), attachment)
