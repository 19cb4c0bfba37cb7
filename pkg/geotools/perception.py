"""Perception tools answered from the annotation fixtures. Every detection has
score 1.0. The optional ``flag`` of SegmentObjectPixels is accepted and
ignored."""

from typing import Any

from models.errors import DomainError, UnknownLabel
from .context import ToolContext


def _inside(box: list[float], region: list[float] | None) -> bool:
    """Whether the box center lies in the pixel region (x1, y1, x2, y2)"""
    if region is None:
        return True
    cx, cy = (box[0] + box[2]) / 2, (box[1] + box[3]) / 2
    return region[0] <= cx <= region[2] and region[1] <= cy <= region[3]


def text_to_bbox(context: ToolContext, args: dict) -> dict:
    boxes = context.fixtures.annotation(args['image'], args['text'])['boxes']
    if not boxes:
        raise UnknownLabel(f'No "{args["text"]}" box on {args["image"]}')
    result: dict[str, Any] = {'bbox': boxes[0]}
    if args.get('top1') is False:
        result['candidates'] = boxes
    return result


def object_detection(context: ToolContext, args: dict) -> dict:
    objects = [
        {'label': label, 'bbox': box, 'score': 1.0}
        for label in context.fixtures.labels(args['image'])
        for box in context.fixtures.annotation(args['image'], label)['boxes']
    ]
    objects.sort(key=lambda item: (item['label'], item['bbox']))
    return {'objects': objects}


def count_given_object(context: ToolContext, args: dict) -> dict:
    region = args.get('bbox')
    if region is not None and len(region) != 4:
        raise DomainError(f'A region needs 4 values (x1, y1, x2, y2), got {len(region)}')
    boxes = context.fixtures.annotation(args['image'], args['text'])['boxes']
    return {'count': sum(1 for box in boxes if _inside(box, region))}


def segment_object_pixels(context: ToolContext, args: dict) -> dict:
    masks = context.fixtures.annotation(args['image'], args['text'])['masks_px']
    return {'pixels': sum(masks), 'masks_px': masks}


def image_description(context: ToolContext, args: dict) -> dict:
    image = context.fixtures.image(args['image'])
    return {'text': image.get('caption', '')}


def region_attribute_description(context: ToolContext, args: dict) -> dict:
    return {'text': context.fixtures.annotation(args['image'], args['attribute'])['caption']}


def change_detection(context: ToolContext, args: dict) -> dict:
    # The before image must be known even though the caption sits on the after one
    context.fixtures.image(args['pre_image'])
    return {'text': context.fixtures.annotation(args['post_image'], args['text'])['caption']}


def ocr(context: ToolContext, args: dict) -> dict:
    return {'text': context.fixtures.ocr(args['image'])}
