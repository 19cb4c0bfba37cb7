"""Lightweight stand-in for a GeoPackage: CRS metadata, vector layers and raster
grids, stored as a directory of canonical JSON files::

    <bundle>/meta.json            {crs, bbox, provenance}
    <bundle>/layers/<name>.json   list of features
    <bundle>/rasters/<name>.json  {width, height, origin, pixel_size, nodata, bands}
"""

import copy
import re
import shutil
from pathlib import Path
from typing import Any

import numpy as np

from . import record
from .errors import IoFailure, LayerConflict, MissingLayer, MissingMetadata, PathEscape
from .utils import is_number, read_json, write_json

NODATA = -9999.0
BBOX_SLACK = 1e-9
GEOMETRY_TYPES = ('point', 'polygon', 'linestring')
# Layer names become file names
LAYER_NAME_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$")


def _check_layer_name(name: str) -> None:
    if not isinstance(name, str) or not LAYER_NAME_RE.fullmatch(name):
        raise PathEscape(f'"{name}" is not a valid layer name')


class Feature(record.Record):
    properties: dict = {}
    _fields = ('geometry', 'properties')

    def __init__(self, geometry: dict[str, Any], properties: dict[str, Any] | None = None):
        self.geometry = geometry
        self.properties = dict(properties or {})

    @classmethod
    def point(cls, lon: float, lat: float, **properties: Any) -> "Feature":
        return cls({'type': 'point', 'coordinates': [lon, lat]}, properties)

    @classmethod
    def polygon(cls, ring: list[list[float]], **properties: Any) -> "Feature":
        return cls({'type': 'polygon', 'coordinates': [list(coord) for coord in ring]}, properties)

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = 'feature') -> "Feature":
        geometry = record.require(dict_, 'geometry', record_id, types=dict)
        kind = record.require(geometry, 'type', record_id, 'geometry', str)
        coordinates = record.require(geometry, 'coordinates', record_id, 'geometry', list)
        if kind not in GEOMETRY_TYPES:
            raise MissingMetadata(f'{record_id}: unsupported geometry "{kind}"')
        return cls({'type': kind, 'coordinates': coordinates}, dict_.get('properties'))

    @property
    def kind(self) -> str:
        return self.geometry['type']

    @property
    def coordinates(self) -> list:
        return self.geometry['coordinates']

    def vertices(self) -> list[list[float]]:
        if self.kind == 'point':
            return [self.coordinates]
        return self.coordinates


class RasterGrid(record.Record):
    nodata: float = NODATA
    _fields = ('width', 'height', 'origin', 'pixel_size', 'nodata', 'bands')

    def __init__(self, width: int, height: int, origin: list[float], pixel_size: list[float],
                 bands: dict[str, list[float]], nodata: float = NODATA):
        self.width = width
        self.height = height
        self.origin = list(origin)
        self.pixel_size = list(pixel_size)
        self.nodata = nodata
        self.bands = {name: list(values) for name, values in bands.items()}

    def to_dict(self) -> dict[str, Any]:
        # Rasters always carry their nodata sentinel on disk
        return {key: getattr(self, key) for key in self._fields}

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = 'raster') -> "RasterGrid":
        """Reconstructs a grid from its JSON form

        :raises MissingMetadata: A georeferencing key is missing or inconsistent
        """
        try:
            width = record.require(dict_, 'width', record_id, types=int)
            height = record.require(dict_, 'height', record_id, types=int)
            origin = record.require(dict_, 'origin', record_id, types=list)
            pixel_size = record.require(dict_, 'pixel_size', record_id, types=list)
        except Exception as err:
            raise MissingMetadata(str(err)) from err
        grid = cls(width, height, origin, pixel_size, dict_.get('bands', {}),
                   dict_.get('nodata', cls.nodata))
        grid.check(record_id)
        return grid

    def check(self, name: str = 'raster') -> None:
        if self.width <= 0 or self.height <= 0:
            raise MissingMetadata(f'{name}: width and height must be positive')
        if len(self.origin) != 2 or not all(map(is_number, self.origin)):
            raise MissingMetadata(f'{name}: origin must be a (lon, lat) pair')
        if len(self.pixel_size) != 2 or not all(map(is_number, self.pixel_size)) \
                or 0 in self.pixel_size:
            raise MissingMetadata(f'{name}: pixel_size components must be nonzero numbers')
        for band, values in self.bands.items():
            if len(values) != self.width * self.height:
                raise MissingMetadata(
                    f'{name}: band "{band}" has {len(values)} values, '
                    f'expected {self.width * self.height}')

    def band(self, name: str) -> np.ndarray:
        return np.asarray(self.bands[name], dtype=np.float64)

    def same_geometry(self, other: "RasterGrid") -> bool:
        return (self.width, self.height, self.origin, self.pixel_size) == \
            (other.width, other.height, other.origin, other.pixel_size)

    def bbox(self) -> list[float]:
        """(W, S, E, N) of a north-up grid"""
        lon, lat = self.origin
        dlon, dlat = self.pixel_size
        xs = (lon, lon + self.width * dlon)
        ys = (lat, lat + self.height * dlat)
        return [min(xs), min(ys), max(xs), max(ys)]

    def derived(self, band: str, values: np.ndarray) -> "RasterGrid":
        """Grid of identical geometry holding a single band"""
        return RasterGrid(self.width, self.height, self.origin, self.pixel_size,
                          {band: values.tolist()}, self.nodata)


class GeoBundle(record.Record):
    crs: str = 'EPSG:4326'
    provenance: str = ''
    _fields = ('crs', 'bbox', 'provenance')

    def __init__(self, bbox: list[float], crs: str = 'EPSG:4326', provenance: str = '',
                 vector_layers: dict[str, list[Feature]] | None = None,
                 rasters: dict[str, RasterGrid] | None = None):
        self.crs = crs
        self.bbox = list(bbox)
        self.provenance = provenance
        self.vector_layers: dict[str, list[Feature]] = dict(vector_layers or {})
        self.rasters: dict[str, RasterGrid] = dict(rasters or {})

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = 'bundle') -> "GeoBundle":
        try:
            bbox = record.require(dict_, 'bbox', record_id, types=list)
        except Exception as err:
            raise MissingMetadata(str(err)) from err
        return cls(bbox, dict_.get('crs', cls.crs), dict_.get('provenance', cls.provenance))

    def meta(self) -> dict[str, Any]:
        # meta.json keeps every key, defaults included
        return {'crs': self.crs, 'bbox': self.bbox, 'provenance': self.provenance}

    @property
    def region(self) -> str:
        """Place the bundle was built for, when it came from the gazetteer"""
        kind, _, name = self.provenance.partition(':')
        return name if kind == 'gazetteer' else ''

    def layer_names(self) -> list[str]:
        return sorted([*self.vector_layers, *self.rasters])

    def has_layer(self, name: str) -> bool:
        return name in self.vector_layers or name in self.rasters

    def vector(self, name: str) -> list[Feature]:
        if name not in self.vector_layers:
            raise MissingLayer(f'No vector layer "{name}" (layers: {", ".join(self.layer_names()) or "none"})')
        return self.vector_layers[name]

    def raster(self, name: str) -> RasterGrid:
        if name not in self.rasters:
            raise MissingLayer(f'No raster layer "{name}" (layers: {", ".join(self.layer_names()) or "none"})')
        return self.rasters[name]

    def put_vector(self, name: str, features: list[Feature]) -> None:
        _check_layer_name(name)
        if name in self.rasters:
            raise LayerConflict(f'"{name}" is already a raster layer')
        self.vector_layers[name] = features

    def put_raster(self, name: str, grid: RasterGrid) -> None:
        _check_layer_name(name)
        if name in self.vector_layers:
            raise LayerConflict(f'"{name}" is already a vector layer')
        self.rasters[name] = grid

    def outside_bbox(self) -> list[tuple[str, list[float]]]:
        """Vertices lying outside the bbox expanded by the slack"""
        west, south, east, north = self.bbox
        stray = []
        for name, features in self.vector_layers.items():
            for feature in features:
                for lon, lat in feature.vertices():
                    if not (west - BBOX_SLACK <= lon <= east + BBOX_SLACK
                            and south - BBOX_SLACK <= lat <= north + BBOX_SLACK):
                        stray.append((name, [lon, lat]))
        return stray

    def copy(self) -> "GeoBundle":
        return copy.deepcopy(self)

    def save(self, path: str | Path) -> None:
        """Writes the bundle directory. Layers removed from the bundle are
        removed from disk as well"""
        path = Path(path)
        try:
            write_json(path / 'meta.json', self.meta())
            for folder, layers in (('layers', self.vector_layers), ('rasters', self.rasters)):
                (path / folder).mkdir(parents=True, exist_ok=True)
                for stale in (path / folder).glob('*.json'):
                    if stale.stem not in layers:
                        stale.unlink()
            for name, features in self.vector_layers.items():
                write_json(path / 'layers' / f'{name}.json', [feature.to_dict() for feature in features])
            for name, grid in self.rasters.items():
                write_json(path / 'rasters' / f'{name}.json', grid.to_dict())
        except OSError as err:
            raise IoFailure(f'Cannot write bundle {path.name}: {err.strerror}') from err

    @classmethod
    def load(cls, path: str | Path) -> "GeoBundle":
        """Reads a bundle directory

        :raises MissingMetadata: No meta.json, or a malformed one
        """
        path = Path(path)
        if not (path / 'meta.json').is_file():
            raise MissingMetadata(f'{path.name} has no meta.json')
        bundle = cls.from_dict(read_json(path / 'meta.json'), path.name)
        for layer_file in sorted((path / 'layers').glob('*.json')):
            bundle.vector_layers[layer_file.stem] = [
                Feature.from_dict(item, f'{path.name}/{layer_file.stem}')
                for item in read_json(layer_file)
            ]
        for raster_file in sorted((path / 'rasters').glob('*.json')):
            bundle.rasters[raster_file.stem] = RasterGrid.from_dict(
                read_json(raster_file), f'{path.name}/{raster_file.stem}')
        return bundle

    @staticmethod
    def copy_tree(source: str | Path, destination: str | Path) -> None:
        shutil.copytree(source, destination, dirs_exist_ok=True)
