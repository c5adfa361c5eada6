"""Grid box geometry on the sphere: areas and centroid distances."""

import math
from dataclasses import dataclass

from .errors import DataError, ParseError

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GridBox:
    """Latitude-longitude box: west, south, east, north edges in degrees."""

    lon1: float
    lat1: float
    lon2: float
    lat2: float

    def __post_init__(self):
        if not (-180.0 <= self.lon1 < self.lon2 <= 180.0):
            raise DataError(
                f"need -180 <= lon1 < lon2 <= 180, got [{self.lon1}, {self.lon2}]")
        if not (-90.0 <= self.lat1 < self.lat2 <= 90.0):
            raise DataError(
                f"need -90 <= lat1 < lat2 <= 90, got [{self.lat1}, {self.lat2}]")

    @property
    def centroid(self):
        return (0.5 * (self.lon1 + self.lon2), 0.5 * (self.lat1 + self.lat2))


def _box_area(lon1, lat1, lon2, lat2):
    r2 = EARTH_RADIUS_KM * EARTH_RADIUS_KM
    dsin = abs(math.sin(math.radians(lat1)) - math.sin(math.radians(lat2)))
    return (math.pi / 180.0) * r2 * dsin * abs(lon1 - lon2)


def gridbox_area(box):
    """Exact spherical area of the box in square kilometres."""
    return _box_area(box.lon1, box.lat1, box.lon2, box.lat2)


def _haversine(lon_a, lat_a, lon_b, lat_b):
    phi_a = math.radians(lat_a)
    phi_b = math.radians(lat_b)
    dphi = phi_b - phi_a
    dlam = math.radians(lon_b - lon_a)
    s = (math.sin(0.5 * dphi) ** 2
         + math.cos(phi_a) * math.cos(phi_b) * math.sin(0.5 * dlam) ** 2)
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(s)))


def centroid_distance(box_a, box_b):
    """Great-circle distance between box centroids in kilometres."""
    lon_a, lat_a = box_a.centroid
    lon_b, lat_b = box_b.centroid
    return _haversine(lon_a, lat_a, lon_b, lat_b)


def load_gridboxes(path):
    """Read site metadata: columns site_id, lon1, lat1, lon2, lat2.

    Returns site labels (in file order) and the matching GridBox list.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: file is empty")
    header = [h.strip() for h in lines[0].split(",")]
    expected = ["site_id", "lon1", "lat1", "lon2", "lat2"]
    if header != expected:
        raise ParseError(f"{path}: header must be {','.join(expected)}")
    site_ids, boxes = [], []
    for ridx, line in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 5:
            raise ParseError(f"{path}: line {ridx} has {len(fields)} fields, expected 5")
        try:
            nums = [float(f) for f in fields[1:]]
        except ValueError:
            raise ParseError(f"{path}: line {ridx}: non-numeric coordinate") from None
        site_ids.append(fields[0])
        boxes.append(GridBox(nums[0], nums[1], nums[2], nums[3]))
    if len(set(site_ids)) != len(site_ids):
        raise ParseError(f"{path}: duplicate site ids")
    return tuple(site_ids), boxes
