"""Planar and spherical helpers on (lon, lat) degrees"""

import math
from typing import Sequence

EARTH_RADIUS_M = 6371008.8
METERS_PER_DEGREE = 111320.0
EPS = 1e-12

Point = Sequence[float]


def haversine(a: Point, b: Point) -> float:
    """Great-circle distance in meters between two (lon, lat) points"""
    lon1, lat1, lon2, lat2 = map(math.radians, (*a, *b))
    h = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def in_crs_bounds(lon: float, lat: float) -> bool:
    return -180 <= lon <= 180 and -90 <= lat <= 90


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def on_segment(p: Point, a: Point, b: Point) -> bool:
    if abs(_cross(a, b, p)) > EPS * max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])):
        return False
    return (min(a[0], b[0]) - EPS <= p[0] <= max(a[0], b[0]) + EPS
            and min(a[1], b[1]) - EPS <= p[1] <= max(a[1], b[1]) + EPS)


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed segments [ab] and [cd] share at least one point"""
    d1, d2 = _cross(c, d, a), _cross(c, d, b)
    d3, d4 = _cross(a, b, c), _cross(a, b, d)
    if ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
            and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0):
        return True
    return (on_segment(a, c, d) or on_segment(b, c, d)
            or on_segment(c, a, b) or on_segment(d, a, b))


def point_in_polygon(point: Point, ring: Sequence[Point]) -> bool:
    """Ray casting. Points on an edge or a vertex are inside"""
    x, y = point
    n = len(ring)
    for i in range(n - 1):
        if on_segment(point, ring[i], ring[i + 1]):
            return True
    inside = False
    for i in range(n - 1):
        (x1, y1), (x2, y2) = ring[i], ring[i + 1]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def winding_number(point: Point, ring: Sequence[Point]) -> int:
    """Signed number of turns of a closed ring around ``point``"""
    x, y = point
    winding = 0
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if a[1] <= y:
            if b[1] > y and _cross(a, b, (x, y)) > 0:
                winding += 1
        elif b[1] <= y and _cross(a, b, (x, y)) < 0:
            winding -= 1
    return winding


def ring_problems(ring: Sequence[Point]) -> list[str]:
    """Why a polygon ring is invalid; empty when it is valid"""
    if len(ring) < 4:
        return [f'ring has {len(ring)} coordinates, at least 4 needed']
    problems = []
    if list(ring[0]) != list(ring[-1]):
        problems.append('ring is not closed')
    n_segments = len(ring) - 1
    for i in range(n_segments):
        for j in range(i + 2, n_segments):
            # first and last segments share the closing vertex
            if i == 0 and j == n_segments - 1:
                continue
            if segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]):
                problems.append(f'segments {i} and {j} intersect')
    return problems


def ring_bbox(ring: Sequence[Point]) -> list[float]:
    lons = [coord[0] for coord in ring]
    lats = [coord[1] for coord in ring]
    return [min(lons), min(lats), max(lons), max(lats)]


def bbox_ring(bbox: Sequence[float]) -> list[list[float]]:
    west, south, east, north = bbox
    return [[west, south], [east, south], [east, north], [west, north], [west, south]]


def buffer_envelope(bbox: Sequence[float], buffer_m: float) -> list[float]:
    """Expands a (W, S, E, N) box by ``buffer_m`` meters on every side. The
    longitude step uses the latitude farthest from the equator, so the result
    covers the whole buffer"""
    west, south, east, north = bbox
    if buffer_m == 0:
        return [west, south, east, north]
    dlat = buffer_m / METERS_PER_DEGREE
    cos_lat = math.cos(math.radians(max(abs(south), abs(north))))
    dlon = 360.0 if cos_lat < EPS else buffer_m / (METERS_PER_DEGREE * cos_lat)
    return [
        max(-180.0, west - dlon),
        max(-90.0, south - dlat),
        min(180.0, east + dlon),
        min(90.0, north + dlat),
    ]


def iou(a: Sequence[float], b: Sequence[float]) -> float:
    """Intersection over union of two (x1, y1, x2, y2) boxes"""
    width = min(a[2], b[2]) - max(a[0], b[0])
    height = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(0.0, width) * max(0.0, height)
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union > 0 else 0.0
