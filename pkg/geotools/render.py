"""Map, image and chart renderers. Figures are built with the object API on
the Agg canvas, never through pyplot, so that sessions can render from
several threads. PNG files carry no software/date metadata: the same call
writes the same bytes."""

import logging
from typing import Any

import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from models.bundle import Feature, GeoBundle, RasterGrid
from models.errors import IoFailure, MissingBand
from . import spectral
from .context import ToolContext
from .raster import read_geotiff

logger = logging.getLogger(__name__)

FIGSIZE = (6.4, 4.8)
DPI = 100
PNG_METADATA = {'Software': None}
LAYER_COLORS = ('tab:blue', 'tab:orange', 'tab:green', 'tab:red', 'tab:purple', 'tab:brown')
CLASS_COLORS = ('#d7191c', '#ffffbf', '#1a9641', '#2b83ba', '#fdae61')


def _figure() -> tuple[Figure, Any]:
    fig = Figure(figsize=FIGSIZE, dpi=DPI)
    return fig, fig.add_subplot()


def _save(fig: Figure, context: ToolContext, tool: str, args: dict) -> str:
    relative, target = context.render_target(tool, args)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(target, format='png', metadata=PNG_METADATA)
    except OSError as err:
        raise IoFailure(f'Cannot write {relative}: {err.strerror}') from err
    logger.debug("Rendered %s", relative)
    return relative


def _band_image(grid: RasterGrid, band: str) -> np.ma.MaskedArray:
    values = grid.band(band).reshape(grid.height, grid.width)
    return np.ma.masked_equal(values, grid.nodata)


def _draw_features(ax: Any, name: str, features: list[Feature], color: str) -> None:
    first = True
    for feature in features:
        label = name if first else None
        coords = np.asarray(feature.vertices(), dtype=float)
        if feature.kind == 'point':
            ax.scatter(coords[:, 0], coords[:, 1], s=18, color=color, label=label, zorder=3)
        else:
            ax.plot(coords[:, 0], coords[:, 1], color=color, linewidth=1.2, label=label, zorder=2)
        first = False


def _draw_layers(ax: Any, bundle: GeoBundle, layers: list[str]) -> None:
    for i, name in enumerate(layers):
        color = LAYER_COLORS[i % len(LAYER_COLORS)]
        if name in bundle.rasters:
            grid = bundle.raster(name)
            band = sorted(grid.bands)[0]
            west, south, east, north = grid.bbox()
            ax.imshow(_band_image(grid, band), extent=(west, east, south, north),
                      cmap='viridis', interpolation='nearest', zorder=1)
        else:
            _draw_features(ax, name, bundle.vector(name), color)
    if any(name in bundle.vector_layers for name in layers):
        ax.legend(loc='upper right', fontsize='small')


def _image_canvas(context: ToolContext, ref: str) -> tuple[Figure, Any]:
    meta = context.fixtures.image(ref)
    fig, ax = _figure()
    ax.add_patch(Rectangle((0, 0), meta['width'], meta['height'], color='0.85', zorder=0))
    ax.set_xlim(0, meta['width'])
    ax.set_ylim(meta['height'], 0)
    ax.set_aspect('equal')
    ax.set_title(ref, fontsize='small')
    return fig, ax


def draw_box(context: ToolContext, args: dict) -> dict:
    fig, ax = _image_canvas(context, args['image'])
    x1, y1, x2, y2 = args['bbox'][:4]
    ax.add_patch(Rectangle((x1, y1), x2 - x1, y2 - y1, fill=False, edgecolor='red', linewidth=2))
    if args.get('annotation'):
        ax.text(x1, y1, args['annotation'], color='red', va='bottom')
    return {'image_path': _save(fig, context, 'DrawBox', args)}


def add_text(context: ToolContext, args: dict) -> dict:
    fig, ax = _image_canvas(context, args['image'])
    x, y = args['position'][:2]
    ax.text(x, y, args['text'], color=args.get('color') or 'black')
    return {'image_path': _save(fig, context, 'AddText', args)}


def plot(context: ToolContext, args: dict) -> dict:
    fig, ax = _figure()
    values = args['values']
    ax.plot(range(1, len(values) + 1), values, marker='o')
    ax.set_title(args['title'])
    ax.grid(True, alpha=0.3)
    return {'image_path': _save(fig, context, 'Plot', args)}


def display_on_map(context: ToolContext, args: dict) -> dict:
    bundle = context.bundle(args['geopackage'])
    fig, ax = _figure()
    _draw_layers(ax, bundle, args['layers'])
    west, south, east, north = bundle.bbox
    ax.set_xlim(west, east)
    ax.set_ylim(south, north)
    ax.set_xlabel('lon')
    ax.set_ylabel('lat')
    return {'image_path': _save(fig, context, 'DisplayOnMap', args)}


def show_index_layer(context: ToolContext, args: dict) -> dict:
    """Class map of an index (or index change) layer with its class statistics"""
    grid = context.bundle(args['geopackage']).raster(args['layer'])
    if spectral.INDEX_BAND in grid.bands:
        band, kind = spectral.INDEX_BAND, args['index_type']
    elif spectral.CHANGE_BAND in grid.bands:
        band, kind = spectral.CHANGE_BAND, 'change'
    else:
        raise MissingBand(f'Layer "{args["layer"]}" holds no index values')
    table = spectral.classes_for(kind, context.index_classes)
    values = grid.band(band)
    classes = spectral.classify(values, grid.nodata, table['thresholds'], table['labels'])

    fig, ax = _figure()
    cmap = ListedColormap(CLASS_COLORS[:len(table['labels'])])
    norm = BoundaryNorm([-1.0 - 1e-9, *table['thresholds'], 1.0 + 1e-9], cmap.N)
    west, south, east, north = grid.bbox()
    image = ax.imshow(_band_image(grid, band), extent=(west, east, south, north), cmap=cmap,
                      norm=norm, interpolation='nearest')
    colorbar = fig.colorbar(image, ax=ax)
    colorbar.set_label(' / '.join(table['labels']))
    ax.set_title(f"{kind.upper() if kind != 'change' else args['index_type'].upper() + ' change'}"
                 f" - {args['layer']}")
    return {'image_path': _save(fig, context, 'ShowIndexLayer', args), 'classes': classes}


def display_on_geotiff(context: ToolContext, args: dict) -> dict:
    grid, _ = read_geotiff(context.fixture_path(args['geotiff']))
    bundle = context.bundle(args['geopackage'])
    fig, ax = _figure()
    west, south, east, north = grid.bbox()
    if grid.bands:
        ax.imshow(_band_image(grid, sorted(grid.bands)[0]), extent=(west, east, south, north),
                  cmap='gray', interpolation='nearest', zorder=0)
    _draw_layers(ax, bundle, args['layers'])
    ax.set_xlim(west, east)
    ax.set_ylim(south, north)
    return {'image_path': _save(fig, context, 'DisplayOnGeotiff', args)}
