"""Deterministic replay of stored trajectories: every call is re-validated and
re-executed in a fresh session, and its observation compared to the stored one.
Replay is the quality gate a corpus goes through before it is used."""

import logging
import math
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Iterable

import geotools
from geotools import ToolContext
from geotools.geometry import in_crs_bounds, ring_problems
from models.bundle import GeoBundle
from models.errors import GeorchError
from models.fixtures import FixtureStore
from models.registry import ARRAY_RE, ToolRegistry, validate_call
from models.report import ReplayReport, StepCheck
from models.trajectory import TERMINATE, Call, Observation, TrajectoryRecord, WorkingMemory
from models.utils import canonical_dumps, is_number
from .orchestrator import ExecutionCache, step

logger = logging.getLogger(__name__)

EXACT_REL_TOL = 1e-9
TOLERANT_REL_TOL = 1e-6
COORDINATE_KINDS = ('bbox-wsen', 'coordinate-lonlat')
LEVEL_ORDER = {'exact': 0, 'tolerant': 1, 'skipped': 1, 'mismatch': 2}


def _worst(levels: Iterable[str]) -> str:
    return max(levels, key=LEVEL_ORDER.__getitem__, default='exact')


def match_values(stored: Any, replayed: Any) -> str:
    """``exact``, ``tolerant`` or ``mismatch``. Numbers within a relative
    1e-9 are exact and within 1e-6 tolerant; strings are compared without
    their trailing whitespace; containers take their worst member"""
    # bool before number: True is not 1 here
    if isinstance(stored, bool) or isinstance(replayed, bool):
        return 'exact' if stored is replayed else 'mismatch'
    if is_number(stored) and is_number(replayed):
        if stored == replayed:
            return 'exact'
        scale = max(abs(stored), abs(replayed))
        if math.isclose(stored, replayed, rel_tol=EXACT_REL_TOL, abs_tol=1e-12):
            return 'exact'
        if abs(stored - replayed) <= TOLERANT_REL_TOL * scale:
            return 'tolerant'
        return 'mismatch'
    if isinstance(stored, str) and isinstance(replayed, str):
        return 'exact' if stored.rstrip() == replayed.rstrip() else 'mismatch'
    if isinstance(stored, list) and isinstance(replayed, list):
        if len(stored) != len(replayed):
            return 'mismatch'
        return _worst(match_values(a, b) for a, b in zip(stored, replayed))
    if isinstance(stored, dict) and isinstance(replayed, dict):
        if set(stored) != set(replayed):
            return 'mismatch'
        return _worst(match_values(stored[key], replayed[key]) for key in sorted(stored))
    return 'exact' if stored == replayed else 'mismatch'


def _coordinates(kind: str, value: Any) -> list[tuple[float, float]]:
    """(lon, lat) pairs carried by an argument of ``kind``"""
    match = ARRAY_RE.match(kind)
    if match:
        if not isinstance(value, list):
            return []
        return [pair for item in value for pair in _coordinates(match.group(1), item)]
    if not isinstance(value, list) or not all(map(is_number, value)):
        return []
    if kind == 'coordinate-lonlat' and len(value) == 2:
        return [(value[0], value[1])]
    if kind == 'bbox-wsen' and len(value) == 4:
        return [(value[0], value[1]), (value[2], value[3])]
    return []


def coordinate_problems(registry: ToolRegistry, call: Call) -> list[str]:
    """Arguments holding coordinates outside the EPSG:4326 bounds"""
    tool = registry.get(call.tool)
    if tool is None:
        return []
    problems = []
    for param in tool.params:
        base = param.kind
        while ARRAY_RE.match(base):
            base = ARRAY_RE.match(base).group(1)
        if base not in COORDINATE_KINDS or param.name not in call.args:
            continue
        for lon, lat in _coordinates(param.kind, call.args[param.name]):
            if not in_crs_bounds(lon, lat):
                problems.append(f'{param.name}: ({lon}, {lat}) outside lon [-180, 180] / lat [-90, 90]')
    return problems


def argument_format_problems(call: Call) -> list[str]:
    try:
        canonical_dumps(call.args)
    except (TypeError, ValueError) as err:
        return [f'arguments have no canonical JSON form: {err}']
    return []


def geometry_problems(bundle: GeoBundle) -> list[str]:
    """Invalid polygon rings, and vertices outside the bundle bbox"""
    problems = []
    for name, features in sorted(bundle.vector_layers.items()):
        for i, feature in enumerate(features):
            if feature.kind == 'polygon':
                problems.extend(f'{name}[{i}]: {problem}' for problem in ring_problems(feature.coordinates))
    problems.extend(f'{name}: vertex {coord} outside the bundle bbox'
                    for name, coord in bundle.outside_bbox())
    return problems


def _render_exists(context: ToolContext, observation: Observation) -> bool:
    path = observation.value.get('image_path') if isinstance(observation.value, dict) else None
    return isinstance(path, str) and (context.workdir / path).is_file()


def _replay_steps(trajectory: TrajectoryRecord, registry: ToolRegistry,
                  context: ToolContext, report: ReplayReport) -> None:
    memory = WorkingMemory.for_task(trajectory.task)
    cache = ExecutionCache()
    for i, stored in enumerate(trajectory.steps, start=1):
        if stored.thought_only:
            memory.append(stored.as_action(), None)
            report.per_step.append(StepCheck())
            continue

        call = stored.action
        check = StepCheck(observation_match='skipped')
        report.per_step.append(check)
        problems = argument_format_problems(call)
        if problems:
            check.arg_format_ok = check.validation_ok = check.execution_ok = False
            report.fail(i, 'ArgumentFormat', '; '.join(problems))
            continue
        problems = coordinate_problems(registry, call)
        if problems:
            check.arg_format_ok = False
            report.fail(i, 'CoordinateIntegrity', '; '.join(problems))
        validation = validate_call(registry, call.tool, call.args, strict=True)
        if not validation.ok:
            check.validation_ok = False
            report.fail(i, 'ValidationFailed', validation.summary())
        if not (check.arg_format_ok and check.validation_ok):
            check.execution_ok = False
            continue

        observation = step(memory, cache, registry, stored.as_action(), context)
        if observation.ok != stored.observation.ok:
            check.execution_ok = False
            detail = (f"{observation.error['code']}: {observation.error['detail']}"
                      if not observation.ok else 'the call succeeds but was stored as failed')
            report.fail(i, 'ExecutionFailed', detail)
            continue

        bundle_ref = call.args.get('geopackage')
        if observation.ok and isinstance(bundle_ref, str) and context.bundle_path(bundle_ref).is_dir():
            problems = geometry_problems(context.bundle(bundle_ref))
            if problems:
                check.execution_ok = False
                report.fail(i, 'GeometryInvalid', '; '.join(problems))
                continue

        tool = registry[call.tool]
        if observation.ok and tool.executor_id in geotools.RENDERERS:
            if not _render_exists(context, observation):
                check.observation_match = 'mismatch'
                report.fail(i, 'ObservationMismatch', 'rendered file is missing')
            continue

        check.observation_match = match_values(stored.observation.to_dict(), observation.to_dict())
        if check.observation_match == 'mismatch':
            report.fail(i, 'ObservationMismatch', f'stored {stored.observation.wire()[:200]} '
                                                  f'replayed {observation.wire()[:200]}')
        elif call.tool == TERMINATE and observation.ok \
                and observation.value.get('answer') != trajectory.final_answer:
            check.observation_match = 'mismatch'
            report.fail(i, 'FinalAnswerMismatch',
                        f'Terminate answers "{observation.value.get("answer")}", '
                        f'the record says "{trajectory.final_answer}"')


def replay(trajectory: TrajectoryRecord, registry: ToolRegistry, fixtures: FixtureStore,
           settings: dict[str, Any] | None = None) -> ReplayReport:
    """Replays one record in a throwaway work directory. Never raises for a
    broken record: everything lands in the report"""
    report = ReplayReport(trajectory.id)
    with tempfile.TemporaryDirectory(prefix='georch-replay-') as workdir:
        context = ToolContext(fixtures, workdir, settings)
        for ref in trajectory.task.inputs:
            if ref.kind != 'geo_bundle':
                continue
            try:
                context.stage(ref.path)
            except GeorchError as err:
                report.fail(0, err.code, str(err))
        _replay_steps(trajectory, registry, context, report)
    if report.full_chain_executable:
        logger.debug("%s replays cleanly (%s)", trajectory.id, report.counts())
    else:
        logger.info("%s rejected: %s", trajectory.id,
                    ', '.join(sorted({failure['code'] for failure in report.failures})))
    return report


def corpus_gate(records: Iterable[TrajectoryRecord], registry: ToolRegistry, fixtures: FixtureStore,
                settings: dict[str, Any] | None = None,
                workers: int = 1) -> tuple[list[TrajectoryRecord], list[tuple[str, ReplayReport]]]:
    """Splits records into the replay-valid ones and the rejected ones, each
    rejection with its report. Both lists keep the corpus order"""
    records = list(records)
    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda item: replay(item, registry, fixtures, settings), records))
    else:
        reports = [replay(item, registry, fixtures, settings) for item in records]

    accepted: list[TrajectoryRecord] = []
    rejected: list[tuple[str, ReplayReport]] = []
    for trajectory, report in zip(records, reports):
        if report.full_chain_executable:
            accepted.append(trajectory)
        else:
            rejected.append((trajectory.id, report))
    return accepted, rejected


def reports_json(reports: Iterable[ReplayReport]) -> str:
    """Report file: one canonical JSON object keyed by record id"""
    return canonical_dumps({report.record_id: report.to_dict() for report in reports}, indent=2) + '\n'
