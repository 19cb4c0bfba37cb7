"""Executors of the registry tools, looked up by ``executor_id``.

An executor takes the session's :class:`ToolContext` and the validated
arguments, and returns the observation value. Failures are ``ToolError``s.
"""

from typing import Any, Callable

from models.errors import UnknownExecutor
from . import gis, perception, raster, render, search
from .calculator import calculator
from .context import ToolContext
from .solver import solver

Executor = Callable[[ToolContext, dict], dict]


def terminate(context: ToolContext, args: dict) -> dict:
    return {'answer': args['answer']}


EXECUTORS: dict[str, Executor] = {
    'calculator': calculator,
    'solver': solver,
    'google_search': search.google_search,
    'ocr': perception.ocr,
    'text_to_bbox': perception.text_to_bbox,
    'image_description': perception.image_description,
    'region_attribute_description': perception.region_attribute_description,
    'count_given_object': perception.count_given_object,
    'change_detection': perception.change_detection,
    'segment_object_pixels': perception.segment_object_pixels,
    'object_detection': perception.object_detection,
    'draw_box': render.draw_box,
    'add_text': render.add_text,
    'plot': render.plot,
    'display_on_map': render.display_on_map,
    'show_index_layer': render.show_index_layer,
    'display_on_geotiff': render.display_on_geotiff,
    'get_area_boundary': gis.get_area_boundary_tool,
    'add_pois_layer': gis.add_pois_layer_tool,
    'compute_distance': gis.compute_distance_tool,
    'add_index_layer': gis.add_index_layer_tool,
    'compute_index_change': gis.compute_index_change_tool,
    'get_bbox_from_geotiff': raster.get_bbox_from_geotiff_tool,
    'terminate': terminate,
}

# Executors whose observation is a rendered file
RENDERERS = frozenset({'draw_box', 'add_text', 'plot', 'display_on_map', 'show_index_layer',
                       'display_on_geotiff'})


def execute(executor_id: str, context: ToolContext, args: dict[str, Any]) -> dict:
    """Runs an executor

    :raises UnknownExecutor: No executor has this id
    :raises ToolError: Whatever the executor raises
    """
    if executor_id not in EXECUTORS:
        raise UnknownExecutor(f'No executor "{executor_id}"')
    return EXECUTORS[executor_id](context, args)


__all__ = ['EXECUTORS', 'RENDERERS', 'ToolContext', 'execute']
