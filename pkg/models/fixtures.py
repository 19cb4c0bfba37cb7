"""Read-only fixture bundle standing in for the gazetteer, the POI database and
the perception models. Layout of the fixture directory::

    gazetteer.json     {place: ring}
    pois.json          {region: {query: [feature, ...]}}   region "*" matches any bundle
    annotations.json   [{image, label, boxes, masks_px, caption}]
    images.json        {image_id: {width, height, gsd_m_per_px}}
    canned_text.json   {ocr: {image_id: text}, search: {query: [snippet, ...]}}
    scenes.json        {region: {year: raster grid with red/nir/swir1/swir2 bands}}
    bundles/, geotiffs/, images/   files referenced by tasks
"""

from pathlib import Path
from types import MappingProxyType
from typing import Any

from .bundle import Feature, RasterGrid
from .errors import (MissingScene, PlaceNotFound, UnknownImage, UnknownLabel,
                     UnknownPoiQuery, UnknownQuery)
from .utils import contained, read_json


def image_id(ref: str) -> str:
    """``images/cars_01.png`` -> ``cars_01``"""
    return Path(ref).stem


class FixtureStore:
    def __init__(
        self,
        root: str | Path,
        gazetteer: dict[str, list[list[float]]] | None = None,
        poi_db: dict[str, dict[str, list[Feature]]] | None = None,
        annotations: dict[tuple[str, str], dict[str, Any]] | None = None,
        canned_text: dict[str, dict[str, str]] | None = None,
        images: dict[str, dict[str, Any]] | None = None,
        scenes: dict[str, dict[int, RasterGrid]] | None = None,
    ):
        self.root = Path(root)
        self.gazetteer = MappingProxyType(dict(gazetteer or {}))
        self.poi_db = MappingProxyType(dict(poi_db or {}))
        self.annotations = MappingProxyType(dict(annotations or {}))
        self.canned_text = MappingProxyType(dict(canned_text or {}))
        self.images = MappingProxyType(dict(images or {}))
        self.scenes = MappingProxyType(dict(scenes or {}))
        for name, meta in self.images.items():
            gsd = meta.get('gsd_m_per_px')
            if gsd is not None and gsd <= 0:
                raise ValueError(f'Image "{name}" has a non-positive GSD')

    @classmethod
    def load(cls, root: str | Path) -> "FixtureStore":
        """Loads every fixture file of ``root``. Missing files give empty tables"""
        root = Path(root)
        read = lambda name, default: read_json(root / name) if (root / name).is_file() else default

        poi_db = {
            region: {
                query: [Feature.from_dict(item, f'pois/{region}/{query}') for item in features]
                for query, features in queries.items()
            }
            for region, queries in read('pois.json', {}).items()
        }
        annotations = {}
        for entry in read('annotations.json', []):
            annotations[(entry['image'], entry['label'])] = {
                'boxes': entry.get('boxes', []),
                'masks_px': entry.get('masks_px', []),
                'caption': entry.get('caption', ''),
            }
        scenes = {
            region: {int(year): RasterGrid.from_dict(grid, f'scenes/{region}/{year}')
                     for year, grid in years.items()}
            for region, years in read('scenes.json', {}).items()
        }
        return cls(
            root,
            gazetteer=read('gazetteer.json', {}),
            poi_db=poi_db,
            annotations=annotations,
            canned_text=read('canned_text.json', {}),
            images=read('images.json', {}),
            scenes=scenes,
        )

    def resolve(self, ref: str) -> Path:
        """
        :raises PathEscape: ``ref`` leaves the fixture root
        """
        return contained(self.root, ref)

    def place(self, name: str) -> list[list[float]]:
        if name not in self.gazetteer:
            raise PlaceNotFound(f'"{name}" is not in the gazetteer')
        return [list(coord) for coord in self.gazetteer[name]]

    def pois(self, region: str, query: str) -> list[Feature]:
        for key in (region, '*'):
            if query in self.poi_db.get(key, {}):
                return list(self.poi_db[key][query])
        raise UnknownPoiQuery(f'No POI data for "{query}" in "{region or "bbox"}"')

    def image(self, ref: str) -> dict[str, Any]:
        name = image_id(ref)
        if name not in self.images:
            raise UnknownImage(f'Unknown image "{name}"')
        return dict(self.images[name])

    def gsd(self, ref: str) -> float | None:
        return self.image(ref).get('gsd_m_per_px')

    def annotation(self, ref: str, label: str) -> dict[str, Any]:
        name = image_id(ref)
        if name not in self.images:
            raise UnknownImage(f'Unknown image "{name}"')
        key = (name, label.strip().lower())
        if key not in self.annotations:
            raise UnknownLabel(f'No "{label}" annotation on "{name}"')
        return self.annotations[key]

    def labels(self, ref: str) -> list[str]:
        name = image_id(ref)
        if name not in self.images:
            raise UnknownImage(f'Unknown image "{name}"')
        return sorted(label for image, label in self.annotations if image == name)

    def ocr(self, ref: str) -> str:
        name = image_id(ref)
        texts = self.canned_text.get('ocr', {})
        if name not in texts:
            raise UnknownImage(f'No text known for image "{name}"')
        return texts[name]

    def search(self, query: str) -> list[str]:
        results = self.canned_text.get('search', {})
        key = query.strip().lower()
        if key not in results:
            raise UnknownQuery(f'No offline result for "{query}"')
        return list(results[key])

    def scene(self, region: str, year: int) -> RasterGrid:
        try:
            return self.scenes[region][year]
        except KeyError:
            raise MissingScene(f'No scene for "{region or "bbox"}" in {year}') from None
