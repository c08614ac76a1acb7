from __future__ import annotations

import copy
import logging
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
from dbetto import utils

from .coupling import ConnectionTarget
from .system import format_rational, to_rational

log = logging.getLogger(__name__)

DEFAULT_FORMAT = "text"
DEFAULT_SWEEP = {"n_systems": 1000, "seed": None, "grid": 64, "selective_fraction": "1/2"}
"""Settings of ``couplecheck sweep`` unless the config says otherwise."""
#: top-level keys that have an effect; anything else is dropped with a warning.
_KNOWN_KEYS = ("format", "scenario_parameters", "sweep")


def config_dir() -> Path:
    """Directory holding the schemas and defaults shipped with this package."""
    return Path(str(resources.files("couplecheck") / "configs"))


def schema_file() -> Path:
    """The JSON schema the config files are validated against."""
    return config_dir() / "runtime_config_schema.yaml"


def targets_schema_file() -> Path:
    return config_dir() / "targets_schema.yaml"


def load_config(filename: str | Path | None) -> dict:
    """Load a config file (YAML or JSON) and validate it against the schema."""
    if filename is None:
        return {}

    config = utils.load_dict(str(filename))
    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    """Validate a config against the packaged JSON schema.

    Unknown keys pass the schema, only the values of the keys it knows about are validated.

    Raises
    ------
    jsonschema.ValidationError
        if a known key holds a value of the wrong type or shape.
    """
    jsonschema.validate(instance=config, schema=utils.load_dict(str(schema_file())))


def resolve_config(config: dict | None = None, **cli_overrides: Any) -> dict:
    """Resolve a config into one that explicitly contains every setting.

    The returned dict is itself a valid config file, with the scenario parameters of every
    preset and every sweep setting filled in. Resolving it again is a no-op.

    Parameters
    ----------
    config
        the config as read from file (or constructed programmatically).
    cli_overrides
        values that take precedence over the config file, e.g. ``format=...``. Sweep settings are
        given by their name within ``sweep`` (``seed=...``). ``None`` means "not specified on the
        command line".

    Raises
    ------
    ~couplecheck.errors.UnknownScenario
        if parameters are given for a scenario that does not exist.
    """
    from . import scenarios  # noqa: PLC0415

    config = dict(config or {})
    validate_config(config)

    for key in sorted(set(config) - set(_KNOWN_KEYS)):
        log.warning("config key '%s' has no effect, ignoring it", key)
        del config[key]

    sweep = deep_merge(DEFAULT_SWEEP, config.get("sweep", {}))
    for key, value in cli_overrides.items():
        if value is None:
            continue
        if key in DEFAULT_SWEEP:
            sweep[key] = value
        else:
            config[key] = value
    sweep["selective_fraction"] = format_rational(to_rational(sweep["selective_fraction"]))

    overrides = config.get("scenario_parameters", {})
    for scenario in overrides:
        scenarios.parse_scenario_id(scenario)

    resolved = {
        "format": config.get("format", DEFAULT_FORMAT),
        "scenario_parameters": deep_merge(scenarios.default_parameters(), overrides),
        "sweep": sweep,
    }
    validate_config(resolved)
    return resolved


def deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge ``override`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def write_config(config: dict, filename: str | Path) -> None:
    """Write a resolved config to a YAML/JSON file that can be fed back in via ``--config``."""
    utils.write_dict(resolve_config(config), str(filename))


def load_targets(filename: str | Path) -> list[ConnectionTarget]:
    """Read a targets file, a mapping of content ids to required equality probabilities.

    Raises
    ------
    jsonschema.ValidationError
        if the file is not such a mapping.
    ~couplecheck.errors.BadParameter
        if a probability lies outside ``[0, 1]``.
    """
    targets = utils.load_dict(str(filename))
    jsonschema.validate(instance=targets, schema=utils.load_dict(str(targets_schema_file())))
    return [ConnectionTarget(str(content), to_rational(p)) for content, p in sorted(targets.items())]
