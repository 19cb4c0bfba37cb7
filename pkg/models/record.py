from abc import abstractmethod
from typing import Any, Callable

from .errors import SchemaViolation

_MISSING = object()


def require(dict_: dict[str, Any], key: str, record_id: str, path: str = '',
            types: type | tuple[type, ...] | None = None) -> Any:
    """Fetches a mandatory key, reporting the record id and field path when it
    is absent or of the wrong type

    :param dict_: Dictionary being decoded
    :param key: Key to fetch
    :param record_id: Id of the enclosing record, for the error message
    :param path: Path of ``dict_`` inside the record
    :param types: Accepted python types for the value
    :raises SchemaViolation: Key missing, or value of the wrong type
    """
    field = f"{path}.{key}" if path else key
    if not isinstance(dict_, dict):
        raise SchemaViolation(record_id, path or '(root)', 'expected an object')
    value = dict_.get(key, _MISSING)
    if value is _MISSING or value is None:
        raise SchemaViolation(record_id, field)
    # bool is an int subclass, never let it pass as a number
    if types is not None and (not isinstance(value, types)
                              or (isinstance(value, bool) and bool not in _as_tuple(types))):
        raise SchemaViolation(record_id, field, f'expected {_type_names(types)}')
    return value


def _as_tuple(types: type | tuple[type, ...]) -> tuple[type, ...]:
    return types if isinstance(types, tuple) else (types,)


def _type_names(types: type | tuple[type, ...]) -> str:
    return '/'.join(t.__name__ for t in _as_tuple(types))


class Record:
    """Base of every serializable model.

    Subclasses list their keys in ``_fields``, in output order. Attributes
    whose value equals the class default are omitted from ``to_dict``, which is
    how optional keys stay out of the canonical JSON.
    """
    _fields: tuple[str, ...] = ()

    def _class_defaults(self) -> dict[str, Any]:
        """Gathers the default ATTRIBUTES of the class hierarchy. Prunes methods & stuff"""
        defaults: dict[str, Any] = {}
        for klass in reversed(type(self).__mro__):
            for key, val in vars(klass).items():
                private = key.startswith('_')
                callable_ = isinstance(val, (Callable, classmethod, staticmethod, property))
                if not private and not callable_:
                    defaults[key] = val
        return defaults

    def to_dict(self) -> dict[str, Any]:
        """Transforms the record into a dictionary, omitting as many values as
        possible (values that are the same as the defaults are skipped)"""
        class_defaults = self._class_defaults()
        vals: dict[str, Any] = {}
        for key in self._fields:
            val = getattr(self, key, _MISSING)
            if val is _MISSING:
                continue
            if key in class_defaults and val == class_defaults[key]:
                continue
            vals[key] = _dump(val)
        return vals

    @classmethod
    @abstractmethod
    def from_dict(cls, dict_: dict[str, Any], *args: Any) -> "Record":
        """Reconstructs a record from a dictionary, checking what must be there"""

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_dict()!r})"


def _dump(val: Any) -> Any:
    if isinstance(val, Record):
        return val.to_dict()
    if isinstance(val, (list, tuple)):
        return [_dump(item) for item in val]
    if isinstance(val, dict):
        return {key: _dump(item) for key, item in val.items()}
    return val
