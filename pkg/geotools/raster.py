"""Georeferenced rasters standing in for GeoTIFF files. A GeoTIFF reference
names a fixture directory::

    geotiffs/<name>/meta.json    {crs, width, height, origin, pixel_size, bbox?}
    geotiffs/<name>/bands.json   {band: [values...]}   optional, used for display
"""

from pathlib import Path

from models.bundle import Feature, GeoBundle, RasterGrid
from models.errors import MissingMetadata
from models.utils import read_json
from .context import ToolContext
from .geometry import bbox_ring
from .gis import BOUNDARY


def read_geotiff(path: str | Path) -> tuple[RasterGrid, str]:
    """(grid, crs) of a GeoTIFF fixture directory

    :raises MissingMetadata: No sidecar, or a sidecar lacking georeferencing
    """
    path = Path(path)
    if not (path / 'meta.json').is_file():
        raise MissingMetadata(f'{path.name} has no metadata sidecar')
    meta = read_json(path / 'meta.json')
    if not isinstance(meta, dict):
        raise MissingMetadata(f'{path.name}: sidecar is not an object')
    bands = read_json(path / 'bands.json') if (path / 'bands.json').is_file() else {}
    grid = RasterGrid.from_dict({**meta, 'bands': bands}, path.name)
    return grid, meta.get('crs', GeoBundle.crs)


def geotiff_bbox(grid: RasterGrid) -> list[float]:
    """(W, S, E, N) of a north-up grid: origin is the top-left corner"""
    lon, lat = grid.origin
    dlon, dlat = grid.pixel_size
    return [lon, lat + grid.height * dlat, lon + grid.width * dlon, lat]


def get_bbox_from_geotiff(path: str | Path) -> GeoBundle:
    grid, crs = read_geotiff(path)
    bbox = geotiff_bbox(grid)
    if not (bbox[0] <= bbox[2] and bbox[1] <= bbox[3]):
        # south-up or east-to-west grids
        bbox = grid.bbox()
    bundle = GeoBundle(bbox, crs, provenance=f'geotiff:{Path(path).name}')
    bundle.put_vector(BOUNDARY, [Feature.polygon(bbox_ring(bbox))])
    return bundle


def get_bbox_from_geotiff_tool(context: ToolContext, args: dict) -> dict:
    bundle = get_bbox_from_geotiff(context.fixture_path(args['geotiff']))
    context.commit(args['geopackage'], bundle)
    return {'geopackage': args['geopackage'], 'bbox': bundle.bbox, 'layer': BOUNDARY}
