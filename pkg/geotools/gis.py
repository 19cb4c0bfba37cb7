"""Vector and index operations on geo bundles"""

from typing import Any

from models.bundle import Feature, GeoBundle
from models.errors import DomainError, EmptyLayer, MissingPlace, NoBoundary, NotPointLayer
from models.fixtures import FixtureStore
from . import spectral
from .context import ToolContext
from .geometry import (bbox_ring, buffer_envelope, haversine, point_in_polygon,
                       ring_bbox)

BOUNDARY = 'boundary'


def area_boundary(fixtures: FixtureStore, place: str | None = None,
                  bbox: list[float] | None = None, buffer_m: float = 0) -> GeoBundle:
    """New bundle holding the boundary of a gazetteer place, or of a bbox.
    A positive buffer replaces the boundary by its buffered envelope

    :raises PlaceNotFound: ``place`` is not in the gazetteer
    :raises MissingPlace: Neither a place nor a bbox
    """
    if buffer_m < 0:
        raise DomainError(f'Negative buffer {buffer_m} m')
    if place:
        ring = fixtures.place(place)
        provenance = f'gazetteer:{place}'
    elif bbox is not None:
        ring = bbox_ring(bbox)
        provenance = 'bbox'
    else:
        raise MissingPlace('Give either a place name or a bbox')

    if buffer_m > 0:
        envelope = buffer_envelope(ring_bbox(ring), buffer_m)
        ring = bbox_ring(envelope)
    bundle = GeoBundle(ring_bbox(ring), provenance=provenance)
    bundle.put_vector(BOUNDARY, [Feature.polygon(ring, buffer_m=buffer_m)])
    return bundle


def boundary_ring(bundle: GeoBundle) -> list[list[float]]:
    features = bundle.vector_layers.get(BOUNDARY)
    if not features or features[0].kind != 'polygon':
        raise NoBoundary('The bundle has no boundary polygon; call GetAreaBoundary first')
    return features[0].coordinates


def pois_within(bundle: GeoBundle, fixtures: FixtureStore, query: str) -> list[Feature]:
    """Fixture POIs matching ``query`` inside the boundary, edges included"""
    ring = boundary_ring(bundle)
    return [
        feature for feature in fixtures.pois(bundle.region, query)
        if feature.kind == 'point' and point_in_polygon(feature.coordinates, ring)
    ]


def _points(bundle: GeoBundle, layer: str) -> list[list[float]]:
    features = bundle.vector(layer)
    if not features:
        raise EmptyLayer(f'Layer "{layer}" is empty', layer=layer)
    if any(feature.kind != 'point' for feature in features):
        raise NotPointLayer(f'Layer "{layer}" holds non-point features', layer=layer)
    return [feature.coordinates for feature in features]


def nearest_distances(sources: list[list[float]],
                      targets: list[list[float]]) -> list[tuple[int, float]]:
    """(index of the nearest target, distance in meters) for each source. Ties
    go to the first target"""
    nearest = []
    for source in sources:
        distances = [haversine(source, target) for target in targets]
        best = min(range(len(targets)), key=distances.__getitem__)
        nearest.append((best, distances[best]))
    return nearest


def compute_distance(bundle: GeoBundle, source_layer: str, target_layer: str,
                     links_layer: str | None = None) -> dict[str, Any]:
    """Nearest-target haversine distance of each source point. The
    source-to-target segments are stored as a line layer

    :raises MissingLayer: One of the layers is absent
    :raises EmptyLayer: One of the layers has no feature
    """
    sources = _points(bundle, source_layer)
    targets = _points(bundle, target_layer)
    nearest = nearest_distances(sources, targets)
    links_name = links_layer or f'{source_layer}_to_{target_layer}'
    bundle.put_vector(links_name, [
        Feature({'type': 'linestring', 'coordinates': [source, targets[target]]},
                {'distance_m': distance, 'source': i, 'target': target})
        for i, (source, (target, distance)) in enumerate(zip(sources, nearest))
    ])

    distances = [distance for _, distance in nearest]
    summary = (
        f'{len(sources)} {source_layer} feature(s) to nearest {target_layer}: '
        f'min {min(distances):.1f} m, mean {sum(distances) / len(distances):.1f} m, '
        f'max {max(distances):.1f} m'
    )
    return {'summary': summary, 'links_layer': links_name, 'distances_m': distances}


def add_index_layer(bundle: GeoBundle, fixtures: FixtureStore, index_kind: str, year: int,
                    layer: str, classes: dict[str, Any] | None = None) -> dict[str, Any]:
    """Computes an index over the fixture scene of the bundle's region

    :raises MissingScene: No scene for (region, year)
    """
    spectral.index_pair(index_kind)
    grid = spectral.index_grid(fixtures.scene(bundle.region, year), index_kind)
    bundle.put_raster(layer, grid)
    values = grid.band(spectral.INDEX_BAND)
    table = spectral.classes_for(index_kind, classes)
    stats = spectral.summarize(values, grid.nodata)
    return {
        'layer': layer,
        'classes': spectral.classify(values, grid.nodata, table['thresholds'], table['labels']),
        'stats': {key: stats[key] for key in ('mean', 'min', 'max')},
    }


# Executors
def get_area_boundary_tool(context: ToolContext, args: dict) -> dict:
    bundle = area_boundary(context.fixtures, args.get('place'), args.get('bbox'),
                           args.get('buffer_m') or 0)
    context.commit(args['geopackage'], bundle)
    return {'geopackage': args['geopackage'], 'bbox': bundle.bbox, 'layer': BOUNDARY}


def add_pois_layer_tool(context: ToolContext, args: dict) -> dict:
    bundle = context.bundle(args['geopackage']).copy()
    pois = pois_within(bundle, context.fixtures, args['query'])
    bundle.put_vector(args['layer'], pois)
    context.commit(args['geopackage'], bundle)
    return {'layer': args['layer'], 'count': len(pois)}


def compute_distance_tool(context: ToolContext, args: dict) -> dict:
    bundle = context.bundle(args['geopackage']).copy()
    result = compute_distance(bundle, args['source_layer'], args['target_layer'],
                              args.get('links_layer'))
    context.commit(args['geopackage'], bundle)
    return result


def add_index_layer_tool(context: ToolContext, args: dict) -> dict:
    bundle = context.bundle(args['geopackage']).copy()
    result = add_index_layer(bundle, context.fixtures, args['index_type'], args['year'],
                             args['layer'], context.index_classes)
    context.commit(args['geopackage'], bundle)
    return result


def compute_index_change_tool(context: ToolContext, args: dict) -> dict:
    bundle = context.bundle(args['geopackage']).copy()
    result = spectral.compute_index_change(bundle, args['index_type'], args['earlier_layer'],
                                           args['later_layer'], args.get('layer'))
    context.commit(args['geopackage'], bundle)
    return result
