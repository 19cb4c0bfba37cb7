"""Every error georch raises on purpose. The ``code`` attribute is what ends up
in observations and reports, so it must stay stable."""

from typing import Any


class GeorchError(Exception):
    code: str = ''

    def __init__(self, message: str = '', **details: Any):
        super().__init__(message)
        self.details = details
        if not self.code:
            self.code = self.__class__.__name__


class ConfigError(GeorchError, ValueError):
    pass


# Registry
class RegistryError(GeorchError, ValueError):
    pass

class DuplicateName(RegistryError):
    def __init__(self, name: str):
        super().__init__(f'Tool "{name}" is declared more than once', name=name)
        self.name = name

class UnknownCategory(RegistryError):
    pass

class InvalidDescriptor(RegistryError):
    pass


# Tool executors
class ToolError(GeorchError):
    pass

class ParseError(ToolError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f'{message} (position {position})', position=position)
        self.position = position

class DivisionByZero(ToolError, ZeroDivisionError):
    pass

class UnknownFunction(ToolError):
    pass

class DomainError(ToolError, ValueError):
    pass

class SingularEquation(ToolError):
    pass

class MissingBand(ToolError):
    pass

class GridMismatch(ToolError):
    pass

class MissingLayer(ToolError):
    pass

class LayerConflict(ToolError):
    pass

class PlaceNotFound(ToolError):
    pass

class MissingPlace(ToolError):
    pass

class NoBoundary(ToolError):
    pass

class UnknownPoiQuery(ToolError):
    pass

class EmptyLayer(ToolError):
    pass

class NotPointLayer(ToolError):
    pass

class MissingMetadata(ToolError):
    pass

class MissingScene(ToolError):
    pass

class UnknownImage(ToolError):
    pass

class UnknownLabel(ToolError):
    pass

class UnknownQuery(ToolError):
    pass

class IoFailure(ToolError):
    pass

class PathEscape(ToolError):
    pass

class SearchUnavailable(ToolError):
    pass

class UnknownExecutor(ToolError):
    pass


# Corpus
class CorpusError(GeorchError, ValueError):
    pass

class CorpusParseError(CorpusError):
    code = 'ParseError'

    def __init__(self, message: str, line: int):
        super().__init__(f'line {line}: {message}', line=line)
        self.line = line

class SchemaViolation(CorpusError):
    def __init__(self, record_id: str, field: str, message: str = 'missing or invalid'):
        super().__init__(f'record "{record_id}", field "{field}": {message}',
                         record_id=record_id, field=field)
        self.record_id = record_id
        self.field = field

class BuildError(CorpusError):
    pass


# Policies & evaluation
class PolicyError(GeorchError):
    pass

class ScriptExhausted(PolicyError):
    pass

class TransportError(PolicyError):
    pass

class PolicyFailure(GeorchError):
    pass

class JudgeUnavailable(GeorchError):
    pass
