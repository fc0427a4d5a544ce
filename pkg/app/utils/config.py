import dataclasses
import os
import typing
from enum import Enum

from dotenv import dotenv_values

from app.utils.logger import logger

ENV_PREFIX = "MERGE_LAB_"
TRUE_VALUES = {'true', 'yes', '1', 't', 'y', 'on'}
FALSE_VALUES = {'false', 'no', '0', 'f', 'n', 'off'}


def read_key_values(path=None):
    """Read a key-value config file and apply environment overrides

    Keys use dotted section prefixes (``road.main_length=150``). Environment variables
    named ``MERGE_LAB_<SECTION>__<KEY>`` override the file, e.g.
    ``MERGE_LAB_EXPERIMENT__SEEDS=0,1,2``.

    Args:
        path (str|None): Config file path; None reads only the environment

    Returns:
        dict: section name -> {key: raw string value}
    """
    raw = {}
    if path is not None:
        if not os.path.exists(path):
            logger.error(f"Config file not found: {path}")
            raise ValueError(f"Config file not found: {path}")
        raw.update({k: v for k, v in dotenv_values(path).items() if v is not None})

    for name, value in os.environ.items():
        if name.startswith(ENV_PREFIX) and "__" in name:
            section, key = name[len(ENV_PREFIX):].split("__", 1)
            raw[f"{section.lower()}.{key.lower()}"] = value

    sections = {}
    for dotted, value in raw.items():
        if "." not in dotted:
            raise ValueError(f"Config key '{dotted}' has no section prefix")
        section, key = dotted.split(".", 1)
        sections.setdefault(section.strip().lower(), {})[key.strip().lower()] = value.strip()
    return sections


def parse_value(raw, annotation):
    """Convert one raw string to the annotated field type"""
    origin = typing.get_origin(annotation)
    if origin is typing.Union:
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if raw.lower() in ('', 'none', 'null'):
            return None
        return parse_value(raw, args[0])
    if origin in (tuple, list):
        item_type = typing.get_args(annotation)[0] if typing.get_args(annotation) else str
        items = [parse_value(part.strip(), item_type) for part in raw.split(",") if part.strip()]
        return tuple(items) if origin is tuple else items
    if annotation is bool:
        lowered = raw.lower()
        if lowered in TRUE_VALUES:
            return True
        if lowered in FALSE_VALUES:
            return False
        raise ValueError(f"Cannot read '{raw}' as a boolean")
    if isinstance(annotation, type) and issubclass(annotation, Enum):
        return annotation(raw.lower())
    if annotation is int:
        return int(float(raw)) if float(raw).is_integer() else int(raw)
    if annotation is float:
        return float(raw)
    return raw


def build_dataclass(cls, raw_section, section_name=None):
    """Instantiate a config dataclass from raw string values

    Args:
        cls: Dataclass type with defaults for every field
        raw_section (dict|None): key -> raw string
        section_name (str|None): Used in error messages

    Returns:
        An instance of ``cls``; unknown keys raise ValueError
    """
    raw_section = raw_section or {}
    hints = typing.get_type_hints(cls)
    names = {field.name for field in dataclasses.fields(cls)}
    unknown = sorted(set(raw_section) - names)
    if unknown:
        label = section_name or cls.__name__
        logger.error(f"Unknown config keys in section '{label}': {unknown}")
        raise ValueError(f"Unknown config keys in section '{label}': {', '.join(unknown)}")

    kwargs = {}
    for key, value in raw_section.items():
        try:
            kwargs[key] = parse_value(value, hints[key])
        except ValueError as e:
            raise ValueError(f"Invalid value for {section_name or cls.__name__}.{key}: {str(e)}")
    return cls(**kwargs)


def dataclass_to_dict(instance):
    """Flatten a config dataclass into JSON-friendly primitives"""
    out = {}
    for field in dataclasses.fields(instance):
        value = getattr(instance, field.name)
        if isinstance(value, Enum):
            value = value.value
        elif dataclasses.is_dataclass(value):
            value = dataclass_to_dict(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[field.name] = value
    return out


def dataclass_from_dict(cls, values):
    """Inverse of dataclass_to_dict for flat config dataclasses"""
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for field in dataclasses.fields(cls):
        if field.name not in values:
            continue
        value = values[field.name]
        annotation = hints[field.name]
        if isinstance(annotation, type) and issubclass(annotation, Enum):
            value = annotation(value)
        elif typing.get_origin(annotation) is tuple and value is not None:
            value = tuple(value)
        kwargs[field.name] = value
    return cls(**kwargs)
