"""Scenario configuration files.

Plain-text key-value format with # comments and three mandatory sections:

    [system]   physical parameters (SystemParams fields)
    [drive]    pump drive (DriveConfig fields)
    [task]     what to compute: name = bistability | spectrum |
               switch-metrics | hysteresis | sweep, plus task options

plus optional [sweep] (only with task name = sweep) and [output].
Unknown sections or keys are rejected with their line number.  The
serializer writes every field explicitly, so parse(serialize(c)) == c.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dataclass_fields

from .errors import ConfigError
from .params import DriveConfig, SystemParams

SYSTEM_KEYS = tuple(f.name for f in dataclass_fields(SystemParams))
DRIVE_KEYS = tuple(f.name for f in dataclass_fields(DriveConfig))

# task name -> {option: (type, default)}
TASK_SCHEMAS = {
    "bistability": {
        "input_min": (float, 0.01),
        "input_max": (float, 1.0),
        "input_points": (int, 400),
    },
    "spectrum": {
        "omega_min": (float, 0.0),
        "omega_max": (float, 2.5),
        "omega_points": (int, 2000),
        "branch": (str, "upper"),       # lower | upper stable branch
        "backend": (str, "matrix"),     # matrix | closed-form
    },
    "switch-metrics": {
        "transient_periods": (int, 50),
        "measure_periods": (int, 10),
        "bandwidth_min": (float, 0.0),
        "bandwidth_max": (float, 0.0),
        "bandwidth_points": (int, 0),   # 0: skip the bandwidth scan
    },
    "hysteresis": {
        "input_min": (float, 0.01),
        "input_max": (float, 1.0),
        "input_points": (int, 400),
        "rate": (float, 0.0),           # 0: default gamma_m/20
    },
}

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class TaskSpec:
    name: str
    options: tuple  # sorted ((key, value), ...)

    def option(self, key):
        for k, v in self.options:
            if k == key:
                return v
        raise KeyError(key)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str  # "system.<field>" or "drive.<field>"
    values: tuple


@dataclass(frozen=True)
class OutputSpec:
    directory: str = ""
    formats: tuple = FORMATS


@dataclass(frozen=True)
class ScenarioConfig:
    params: SystemParams
    drive: DriveConfig
    task: TaskSpec
    sweep: SweepSpec | None = None
    output: OutputSpec = OutputSpec()


def _parse_scalar(raw, line):
    raw = raw.strip()
    if not raw:
        raise ConfigError("empty value", line)
    return raw


def _to_float(raw, key, line):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {raw!r}", line) from None


def _to_int(raw, key, line):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}", line) from None
    if value != int(value):
        raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}", line)
    return int(value)


def _split_sections(text):
    """-> {section: {key: (raw_value, line)}}, {section: line}."""
    sections: dict[str, dict] = {}
    section_lines: dict[str, int] = {}
    current = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip()
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno)
            sections[name] = {}
            section_lines[name] = lineno
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside of any section", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = (_parse_scalar(value, lineno), lineno)
    return sections, section_lines


def parse_config(text: str) -> ScenarioConfig:
    sections, section_lines = _split_sections(text)

    for required in ("system", "drive", "task"):
        if required not in sections:
            raise ConfigError(f"missing required section [{required}]")
    known = {"system", "drive", "task", "sweep", "output"}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]", section_lines[name])

    sys_kwargs = {}
    for key, (raw, line) in sections["system"].items():
        if key not in SYSTEM_KEYS:
            raise ConfigError(f"unknown [system] key {key!r}", line)
        sys_kwargs[key] = _to_float(raw, key, line)
    try:
        params = SystemParams(**sys_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [system] values: {exc}",
                          section_lines["system"]) from exc

    drive_kwargs = {}
    for key, (raw, line) in sections["drive"].items():
        if key not in DRIVE_KEYS:
            raise ConfigError(f"unknown [drive] key {key!r}", line)
        drive_kwargs[key] = _to_float(raw, key, line)
    try:
        drive = DriveConfig(**drive_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [drive] values: {exc}",
                          section_lines["drive"]) from exc

    task = _parse_task(sections["task"], section_lines["task"])
    sweep = None
    if task.name == "sweep":
        if "sweep" not in sections:
            raise ConfigError("task 'sweep' requires a [sweep] section",
                              section_lines["task"])
        sweep = _parse_sweep(sections["sweep"], section_lines["sweep"])
    elif "sweep" in sections:
        raise ConfigError("[sweep] section is only valid with task name = sweep",
                          section_lines["sweep"])

    output = _parse_output(sections.get("output", {}), section_lines.get("output"))
    return ScenarioConfig(params=params, drive=drive, task=task, sweep=sweep,
                          output=output)


def _parse_task(entries, section_line) -> TaskSpec:
    entries = dict(entries)
    if "name" not in entries:
        raise ConfigError("[task] needs a 'name' key", section_line)
    name_raw, name_line = entries.pop("name")
    if name_raw == "sweep":
        if "task" not in entries:
            raise ConfigError("task 'sweep' needs 'task = <inner task name>'",
                              name_line)
        inner_raw, inner_line = entries.pop("task")
        if inner_raw not in TASK_SCHEMAS:
            raise ConfigError(f"unknown inner task {inner_raw!r}", inner_line)
        inner = _collect_options("sweep", inner_raw, entries)
        return TaskSpec(name="sweep", options=(("task", inner_raw),) + inner)
    if name_raw not in TASK_SCHEMAS:
        raise ConfigError(f"unknown task {name_raw!r}", name_line)
    return TaskSpec(name=name_raw, options=_collect_options(name_raw, name_raw, entries))


def _collect_options(outer, schema_name, entries):
    schema = TASK_SCHEMAS[schema_name]
    options = {}
    for key, (raw, line) in entries.items():
        if key not in schema:
            raise ConfigError(f"unknown [task] key {key!r} for task {outer!r}", line)
        typ, _ = schema[key]
        if typ is float:
            options[key] = _to_float(raw, key, line)
        elif typ is int:
            options[key] = _to_int(raw, key, line)
        else:
            options[key] = raw
    for key, (typ, default) in schema.items():
        options.setdefault(key, default)
    _validate_task_options(schema_name, options)
    return tuple(sorted(options.items()))


def _validate_task_options(name, options):
    if name == "bistability" or name == "hysteresis":
        if not options["input_max"] > options["input_min"] >= 0.0:
            raise ConfigError(f"task {name!r}: need input_max > input_min >= 0")
        if options["input_points"] < 2:
            raise ConfigError(f"task {name!r}: input_points must be >= 2")
    if name == "spectrum":
        if options["omega_points"] < 2:
            raise ConfigError("task 'spectrum': omega_points must be >= 2")
        if not options["omega_max"] > options["omega_min"]:
            raise ConfigError("task 'spectrum': need omega_max > omega_min")
        if options["branch"] not in ("lower", "upper"):
            raise ConfigError("task 'spectrum': branch must be lower or upper")
        if options["backend"] not in ("matrix", "closed-form"):
            raise ConfigError("task 'spectrum': backend must be matrix or closed-form")
    if name == "switch-metrics":
        if options["transient_periods"] < 0 or options["measure_periods"] < 1:
            raise ConfigError("task 'switch-metrics': bad transient/measure periods")
        if options["bandwidth_points"] not in (0, 1) and \
                not options["bandwidth_max"] > options["bandwidth_min"] > 0.0:
            raise ConfigError("task 'switch-metrics': need bandwidth_max > bandwidth_min > 0")
        if options["bandwidth_points"] == 1:
            raise ConfigError("task 'switch-metrics': bandwidth_points must be 0 or >= 2")


def _parse_sweep(entries, section_line) -> SweepSpec:
    entries = dict(entries)
    if "parameter" not in entries:
        raise ConfigError("[sweep] needs a 'parameter' key", section_line)
    param_raw, param_line = entries.pop("parameter")
    prefix, _, field = param_raw.partition(".")
    if prefix == "system" and field in SYSTEM_KEYS:
        pass
    elif prefix == "drive" and field in DRIVE_KEYS:
        pass
    else:
        raise ConfigError(f"unknown sweep parameter {param_raw!r} "
                          "(use system.<field> or drive.<field>)", param_line)
    if "values" not in entries:
        raise ConfigError("[sweep] needs a 'values' key", section_line)
    values_raw, values_line = entries.pop("values")
    if entries:
        key, (_, line) = next(iter(entries.items()))
        raise ConfigError(f"unknown [sweep] key {key!r}", line)
    try:
        values = tuple(float(v) for v in values_raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad sweep values {values_raw!r}", values_line) from None
    if not values:
        raise ConfigError("sweep values must be a non-empty comma list", values_line)
    return SweepSpec(parameter=param_raw, values=values)


def _parse_output(entries, section_line) -> OutputSpec:
    entries = dict(entries)
    directory = ""
    formats = FORMATS
    if "dir" in entries:
        directory, _ = entries.pop("dir")
    if "formats" in entries:
        raw, line = entries.pop("formats")
        formats = tuple(f.strip() for f in raw.split(",") if f.strip())
        bad = [f for f in formats if f not in FORMATS]
        if bad or not formats:
            raise ConfigError(f"formats must be a subset of {{csv,json}}, got {raw!r}", line)
    if entries:
        key, (_, line) = next(iter(entries.items()))
        raise ConfigError(f"unknown [output] key {key!r}", line)
    return OutputSpec(directory=directory, formats=formats)


def serialize_config(config: ScenarioConfig) -> str:
    lines = ["[system]"]
    for key in SYSTEM_KEYS:
        lines.append(f"{key} = {getattr(config.params, key)!r}")
    lines.append("")
    lines.append("[drive]")
    for key in DRIVE_KEYS:
        lines.append(f"{key} = {getattr(config.drive, key)!r}")
    lines.append("")
    lines.append("[task]")
    lines.append(f"name = {config.task.name}")
    for key, value in config.task.options:
        lines.append(f"{key} = {value!r}" if not isinstance(value, str)
                     else f"{key} = {value}")
    if config.sweep is not None:
        lines.append("")
        lines.append("[sweep]")
        lines.append(f"parameter = {config.sweep.parameter}")
        lines.append("values = " + ",".join(repr(v) for v in config.sweep.values))
    lines.append("")
    lines.append("[output]")
    if config.output.directory:
        lines.append(f"dir = {config.output.directory}")
    lines.append("formats = " + ",".join(config.output.formats))
    return "\n".join(lines) + "\n"


def apply_sweep_value(config: ScenarioConfig, value: float) -> ScenarioConfig:
    """Scenario with the swept parameter replaced by ``value``."""
    assert config.sweep is not None
    prefix, _, field = config.sweep.parameter.partition(".")
    if prefix == "system":
        params = config.params.with_(**{field: value})
        return ScenarioConfig(params=params, drive=config.drive, task=config.task,
                              sweep=config.sweep, output=config.output)
    drive = config.drive.with_(**{field: value})
    return ScenarioConfig(params=config.params, drive=drive, task=config.task,
                          sweep=config.sweep, output=config.output)
