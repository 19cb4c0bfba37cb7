"""Unified callable schema of the tools, and validation of calls against it.

A descriptor never knows how its tool is executed: ``executor_id`` is resolved
by :mod:`geotools`.
"""

import json
import logging
import re
from collections.abc import Iterator, Mapping
from types import MappingProxyType
from typing import Any, Iterable

from . import record
from .errors import DuplicateName, InvalidDescriptor, UnknownCategory
from .utils import canonical_dumps, is_number

logger = logging.getLogger(__name__)

CATEGORIES = ('perception', 'operation', 'logic', 'gis')
SCALAR_KINDS = (
    'string', 'number', 'integer', 'boolean', 'image-ref', 'geo-bundle-ref',
    'layer-name', 'bbox-wsen', 'coordinate-lonlat', 'structured-object',
)
PATH_KINDS = ('image-ref', 'geo-bundle-ref')
ARRAY_RE = re.compile(r'^array-of\((.+)\)$')
IDENT_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')

ISSUE_CODES = ('UnknownTool', 'MissingRequired', 'UnknownArg', 'TypeMismatch')


def is_valid_kind(kind: str) -> bool:
    match = ARRAY_RE.match(kind)
    if match:
        return is_valid_kind(match.group(1))
    return kind in SCALAR_KINDS


def conforms(kind: str, value: Any) -> bool:
    """Whether ``value`` is an acceptable argument for a parameter of ``kind``"""
    match = ARRAY_RE.match(kind)
    if match:
        return isinstance(value, list) and all(conforms(match.group(1), item) for item in value)

    match kind:
        case 'string' | 'image-ref' | 'geo-bundle-ref' | 'layer-name':
            return isinstance(value, str)
        case 'number':
            return is_number(value)
        case 'integer':
            return isinstance(value, int) and not isinstance(value, bool)
        case 'boolean':
            return isinstance(value, bool)
        case 'structured-object':
            return isinstance(value, dict)
        case 'bbox-wsen':
            if not (isinstance(value, list) and len(value) == 4 and all(map(is_number, value))):
                return False
            west, south, east, north = value
            return west <= east and south <= north
        case 'coordinate-lonlat':
            if not (isinstance(value, list) and len(value) == 2 and all(map(is_number, value))):
                return False
            lon, lat = value
            return -180 <= lon <= 180 and -90 <= lat <= 90
    return False


class ParamSpec(record.Record):
    required: bool = False
    description: str = ''
    _fields = ('name', 'kind', 'required', 'description')

    def __init__(self, name: str, kind: str, required: bool = False, description: str = ''):
        self.name = name
        self.kind = kind
        self.required = required
        self.description = description

    def to_dict(self) -> dict[str, Any]:
        # Registry files always spell out every key
        return {key: getattr(self, key) for key in self._fields}

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], tool: str = '?') -> "ParamSpec":
        err_msg = f'Parameter of tool "{tool}"'
        if not isinstance(dict_, dict):
            raise InvalidDescriptor(f'{err_msg} is not an object')
        name = dict_.get('name')
        kind = dict_.get('kind')
        if not isinstance(name, str) or not name:
            raise InvalidDescriptor(f'{err_msg} has no name')
        if not isinstance(kind, str) or not is_valid_kind(kind):
            raise InvalidDescriptor(f'{err_msg} "{name}" has an unknown kind "{kind}"')
        return cls(name, kind, bool(dict_.get('required', cls.required)),
                   dict_.get('description', cls.description))


class ToolDescriptor(record.Record):
    description: str = ''
    _fields = ('name', 'category', 'description', 'params', 'output', 'executor_id')

    def __init__(self, name: str, category: str, params: list[ParamSpec], output: str,
                 executor_id: str, description: str = ''):
        if not name or not IDENT_RE.match(name):
            raise InvalidDescriptor(f'Invalid tool name "{name}"')
        if category not in CATEGORIES:
            raise UnknownCategory(f'Tool "{name}" has an unknown category "{category}"')
        if not output:
            raise InvalidDescriptor(f'Tool "{name}" has an empty output contract')
        if not executor_id:
            raise InvalidDescriptor(f'Tool "{name}" has no executor')
        seen: set[str] = set()
        for param in params:
            if param.name in seen:
                raise InvalidDescriptor(f'Tool "{name}" declares "{param.name}" twice')
            seen.add(param.name)
        self.name = name
        self.category = category
        self.description = description
        self.params = tuple(params)
        self.output = output
        self.executor_id = executor_id

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'category': self.category,
            'description': self.description,
            'params': [param.to_dict() for param in self.params],
            'output': self.output,
            'executor_id': self.executor_id,
        }

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "ToolDescriptor":
        if not isinstance(dict_, dict):
            raise InvalidDescriptor('Tool descriptor is not an object')
        name = dict_.get('name', '')
        params = [ParamSpec.from_dict(param, name) for param in dict_.get('params', [])]
        return cls(
            name=name,
            category=dict_.get('category', ''),
            params=params,
            output=dict_.get('output', ''),
            executor_id=dict_.get('executor_id', ''),
            description=dict_.get('description', cls.description),
        )

    def param(self, name: str) -> ParamSpec | None:
        for param in self.params:
            if param.name == name:
                return param
        return None

    @property
    def required(self) -> list[str]:
        return [param.name for param in self.params if param.required]

    def with_category(self, category: str) -> "ToolDescriptor":
        return ToolDescriptor(self.name, category, list(self.params), self.output,
                              self.executor_id, self.description)

    def render(self) -> str:
        """One entry of the tool list shown to the policy"""
        params = ', '.join(
            f"{param.name}: {param.kind}{'' if param.required else ' (optional)'}"
            for param in self.params
        )
        return f"- {self.name}({params}): {self.description} Returns: {self.output}"


class ToolRegistry(Mapping):
    """Read-only mapping name -> descriptor. Safe to share between workers"""
    __slots__ = ('_tools',)

    def __init__(self, tools: dict[str, ToolDescriptor]):
        object.__setattr__(self, '_tools', MappingProxyType(dict(sorted(tools.items()))))

    def __setattr__(self, key: str, value: Any) -> None:
        raise AttributeError('ToolRegistry is immutable')

    def __getitem__(self, name: str) -> ToolDescriptor:
        return self._tools[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tools)

    def __len__(self) -> int:
        return len(self._tools)

    def __repr__(self) -> str:
        return f"ToolRegistry({list(self._tools)})"

    def to_json(self) -> str:
        """Canonical registry file: one object per tool, sorted by name"""
        return canonical_dumps([tool.to_dict() for tool in self._tools.values()], indent=2) + '\n'

    @classmethod
    def from_json(cls, content: str | list[dict[str, Any]]) -> "ToolRegistry":
        data = json.loads(content) if isinstance(content, str) else content
        if not isinstance(data, list):
            raise InvalidDescriptor('A registry file holds a list of tool descriptors')
        return build_registry([ToolDescriptor.from_dict(item) for item in data])

    def with_categories(self, mapping: dict[str, str]) -> "ToolRegistry":
        """New registry whose categories are overridden by ``mapping``. Names
        absent from the registry are ignored with a warning"""
        unknown = sorted(set(mapping) - set(self._tools))
        if unknown:
            logger.warning("Category map names unregistered tools: %s", ', '.join(unknown))
        return build_registry([
            tool.with_category(mapping[name]) if name in mapping else tool
            for name, tool in self._tools.items()
        ])

    def categories(self) -> dict[str, str]:
        return {name: tool.category for name, tool in self._tools.items()}


class ValidationReport(record.Record):
    _fields = ('ok', 'issues', 'warnings')
    warnings: list = []

    def __init__(self, issues: list[dict[str, Any]] | None = None,
                 warnings: list[dict[str, Any]] | None = None):
        self.issues = issues or []
        self.warnings = warnings or []

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict[str, Any]:
        vals = {'ok': self.ok, 'issues': self.issues}
        if self.warnings:
            vals['warnings'] = self.warnings
        return vals

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "ValidationReport":
        return cls(list(dict_.get('issues', [])), list(dict_.get('warnings', [])))

    def codes(self) -> list[str]:
        return [issue['code'] for issue in self.issues]

    def summary(self) -> str:
        return '; '.join(
            f"{issue['code']}({issue['param']})" if issue.get('param') else issue['code']
            for issue in self.issues
        )


def _issue(code: str, param: str | None, detail: str) -> dict[str, Any]:
    issue: dict[str, Any] = {'code': code, 'detail': detail}
    if param is not None:
        issue['param'] = param
    return issue


def build_registry(descriptors: Iterable[ToolDescriptor]) -> ToolRegistry:
    """Freezes the descriptors into a registry

    :raises DuplicateName: Two descriptors share a name
    """
    tools: dict[str, ToolDescriptor] = {}
    for descriptor in descriptors:
        if descriptor.name in tools:
            raise DuplicateName(descriptor.name)
        tools[descriptor.name] = descriptor
    return ToolRegistry(tools)


def validate_call(registry: ToolRegistry, name: str, args: Any,
                  strict: bool = True) -> ValidationReport:
    """Checks a call against the tool's schema. Never raises: every problem is
    an issue of the report.

    :param strict: When False, unknown arguments are warnings instead of issues
    """
    tool = registry.get(name) if isinstance(name, str) else None
    if tool is None:
        return ValidationReport([_issue('UnknownTool', None, f'"{name}" is not a registered tool')])
    if not isinstance(args, dict):
        return ValidationReport([_issue('TypeMismatch', None, 'arguments must be an object')])

    issues: list[dict[str, Any]] = []
    warnings: list[dict[str, Any]] = []
    for param in tool.params:
        # A null optional argument is the same as an absent one
        if args.get(param.name) is None:
            if param.required:
                issues.append(_issue('MissingRequired', param.name,
                                     f'"{param.name}" is required by {tool.name}'))
            continue
        if not conforms(param.kind, args[param.name]):
            issues.append(_issue('TypeMismatch', param.name,
                                 f'"{param.name}" expects {param.kind}'))

    for key in sorted(args):
        if tool.param(key) is None:
            unknown = _issue('UnknownArg', key, f'{tool.name} has no parameter "{key}"')
            if strict:
                issues.append(unknown)
            else:
                logger.warning("Ignoring unknown argument %s of %s", key, tool.name)
                warnings.append(unknown)

    return ValidationReport(issues, warnings)


def list_by_category(registry: ToolRegistry, category: str) -> list[str]:
    """Names of the tools of ``category``, sorted"""
    if category not in CATEGORIES:
        raise UnknownCategory(f'Unknown category "{category}"')
    return sorted(name for name, tool in registry.items() if tool.category == category)
