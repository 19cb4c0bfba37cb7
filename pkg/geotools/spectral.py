"""Normalized-difference indices, index change and class statistics"""

from typing import Any

import numpy as np

from models.bundle import GeoBundle, RasterGrid
from models.errors import DomainError, GridMismatch, MissingBand

# index -> (A, B) for (A - B) / (A + B)
INDEX_BANDS = {
    'NDVI': ('nir', 'red'),
    'NBR': ('nir', 'swir2'),
    'NDBI': ('swir1', 'nir'),
}
INDEX_BAND = 'value'
CHANGE_BAND = 'change'
DENOMINATOR_EPS = 1e-12

DEFAULT_CLASSES: dict[str, dict[str, list]] = {
    'NDVI': {'thresholds': [0.2, 0.5], 'labels': ['barren', 'sparse', 'dense']},
    'NBR': {'thresholds': [-0.1, 0.1], 'labels': ['low', 'moderate', 'high']},
    'NDBI': {'thresholds': [-0.1, 0.1], 'labels': ['non_built', 'mixed', 'built']},
    'change': {'thresholds': [-0.1, 0.1], 'labels': ['loss', 'stable', 'gain']},
}


def index_pair(index_kind: str) -> tuple[str, str]:
    kind = index_kind.upper()
    if kind not in INDEX_BANDS:
        raise DomainError(f'Unknown index "{index_kind}" (known: {", ".join(INDEX_BANDS)})')
    return INDEX_BANDS[kind]


def _band(grid: RasterGrid, name: str) -> np.ndarray:
    if name not in grid.bands:
        raise MissingBand(f'Band "{name}" is missing (bands: {", ".join(sorted(grid.bands)) or "none"})',
                          band=name)
    return grid.band(name)


def compute_index(grid: RasterGrid, index_kind: str) -> np.ndarray:
    """Per-pixel (A - B) / (A + B) clipped to [-1, 1]. Pixels where either
    input is nodata, or where |A + B| < 1e-12, are nodata

    :raises MissingBand: The grid lacks one of the two bands
    """
    band_a, band_b = index_pair(index_kind)
    a = _band(grid, band_a)
    b = _band(grid, band_b)
    total = a + b
    invalid = (a == grid.nodata) | (b == grid.nodata) | (np.abs(total) < DENOMINATOR_EPS)
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.clip((a - b) / np.where(invalid, 1.0, total), -1.0, 1.0)
    return np.where(invalid, grid.nodata, values)


def index_grid(grid: RasterGrid, index_kind: str) -> RasterGrid:
    return grid.derived(INDEX_BAND, compute_index(grid, index_kind))


def summarize(values: np.ndarray, nodata: float) -> dict[str, Any]:
    """mean/min/max over valid pixels, plus the sign fractions"""
    valid = values[values != nodata]
    if valid.size == 0:
        return {'mean': None, 'min': None, 'max': None, 'frac_negative': 0.0,
                'frac_positive': 0.0, 'valid_pixels': 0}
    return {
        'mean': float(valid.mean()),
        'min': float(valid.min()),
        'max': float(valid.max()),
        'frac_negative': float(np.count_nonzero(valid < 0) / valid.size),
        'frac_positive': float(np.count_nonzero(valid > 0) / valid.size),
        'valid_pixels': int(valid.size),
    }


def classify(values: np.ndarray, nodata: float, thresholds: list[float],
             labels: list[str]) -> dict[str, dict[str, Any]]:
    """Pixel count and fraction per class. The first class is below the first
    threshold, the middle classes are closed, the last is above the last
    threshold"""
    if len(labels) != len(thresholds) + 1:
        raise DomainError('Class labels must outnumber thresholds by one')
    valid = values[values != nodata]
    index = np.zeros(valid.shape, dtype=int)
    if thresholds:
        index += valid >= thresholds[0]
        for threshold in thresholds[1:]:
            index += valid > threshold
    counts = np.bincount(index, minlength=len(labels))
    return {
        label: {
            'pixels': int(count),
            'fraction': float(count / valid.size) if valid.size else 0.0,
        }
        for label, count in zip(labels, counts)
    }


def classes_for(index_kind: str, table: dict[str, dict[str, list]] | None = None) -> dict[str, list]:
    table = table or DEFAULT_CLASSES
    key = index_kind if index_kind == 'change' else index_kind.upper()
    classes = table.get(key) or DEFAULT_CLASSES.get(key)
    if classes is None:
        raise DomainError(f'No classes for index "{index_kind}" (known: {", ".join(DEFAULT_CLASSES)})')
    return classes


def compute_change(earlier: RasterGrid, later: RasterGrid) -> np.ndarray:
    """later - earlier per pixel; nodata where either side is nodata

    :raises GridMismatch: The two grids do not share their geometry
    """
    if not earlier.same_geometry(later):
        raise GridMismatch('Index layers do not share the same grid')
    before = _band(earlier, INDEX_BAND)
    after = _band(later, INDEX_BAND)
    invalid = (before == earlier.nodata) | (after == later.nodata)
    return np.where(invalid, earlier.nodata, after - before)


def compute_index_change(bundle: GeoBundle, index_kind: str, earlier_layer: str,
                         later_layer: str, layer: str | None = None) -> dict[str, Any]:
    """Stores the change layer in ``bundle`` and returns its statistics

    :raises MissingLayer: One of the index layers is not in the bundle
    :raises GridMismatch: Index layers of different grids
    """
    index_pair(index_kind)
    earlier = bundle.raster(earlier_layer)
    later = bundle.raster(later_layer)
    change = compute_change(earlier, later)
    name = layer or f'{index_kind.lower()}_change'
    bundle.put_raster(name, earlier.derived(CHANGE_BAND, change))
    return {'change_layer': name, 'stats': summarize(change, earlier.nodata)}
