VERSION = '1.0.0'

from .record import Record
from .registry import ParamSpec, ToolDescriptor, ToolRegistry, ValidationReport
from .bundle import Feature, GeoBundle, RasterGrid
from .fixtures import FixtureStore
from .trajectory import (Action, Call, FormatError, InputRef, Observation, Step, TaskInstance,
                         TrajectoryRecord, WorkingMemory)
from .corpus import CorpusStats
from .report import EvalReport, OrderVerdict, ReplayReport, StepCheck, StepScores, TaskResult
from . import errors, utils

__all__ = [
    'Record',
    'ParamSpec',
    'ToolDescriptor',
    'ToolRegistry',
    'ValidationReport',
    'Feature',
    'GeoBundle',
    'RasterGrid',
    'FixtureStore',
    'Action',
    'Call',
    'FormatError',
    'InputRef',
    'Observation',
    'Step',
    'TaskInstance',
    'TrajectoryRecord',
    'WorkingMemory',
    'CorpusStats',
    'EvalReport',
    'OrderVerdict',
    'ReplayReport',
    'StepCheck',
    'StepScores',
    'TaskResult',
]
