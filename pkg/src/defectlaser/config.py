"""Human-editable parameter files.

The format is INI-like sections of ``key = value`` pairs where every value
carries a unit tag, e.g.::

    [optical]
    cavity_freq   = 193 2pi.THz
    cavity_loss   = 6.43 MHz
    coupling      = 73.513272 MHz
    radius        = 34.5 um
    pump_power    = 10 uW
    pump_detuning = 73.513272 MHz

    [mechanical]
    mech_freq = 23.4 2pi.MHz
    mech_loss = 0.24 MHz
    eff_mass  = 50 ng

    [tls]
    tls_freq = 23.4 2pi.MHz
    tls_loss = 6.43 MHz
    coupling = 1 MHz

A ``[material]`` section (deformation_potential, tunnel_splitting,
asymmetry, youngs_modulus, mode_volume, tls_loss) may replace ``[tls]``;
the defect coupling is then derived from material data.  ``#`` and ``;``
start comments.  Parse errors report the key, line number and expected
unit class.
"""

from __future__ import annotations

from .errors import ConfigError, InvalidParameterError, UnitError
from .params import (MaterialParams, MechanicalParams, OpticalParams,
                     SystemParams, TlsParams)
from .units import format_si, parse_quantity

# section -> key -> unit class
SCHEMA: dict[str, dict[str, str]] = {
    "optical": {
        "cavity_freq": "angular_rate",
        "cavity_loss": "angular_rate",
        "coupling": "angular_rate",
        "radius": "length",
        "pump_power": "power",
        "pump_detuning": "angular_rate",
    },
    "mechanical": {
        "mech_freq": "angular_rate",
        "mech_loss": "angular_rate",
        "eff_mass": "mass",
    },
    "tls": {
        "tls_freq": "angular_rate",
        "tls_loss": "angular_rate",
        "coupling": "angular_rate",
    },
    "material": {
        "deformation_potential": "energy",
        "tunnel_splitting": "angular_rate",
        "asymmetry": "angular_rate",
        "youngs_modulus": "pressure",
        "mode_volume": "volume",
        "tls_loss": "angular_rate",
    },
}


def parse_config_text(text: str) -> dict[str, dict[str, float]]:
    """Parse config text into {section: {key: SI value}} with line errors."""
    sections: dict[str, dict[str, float]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in SCHEMA:
                raise ConfigError(
                    f"unknown section [{current}] (known: "
                    f"{', '.join(sorted(SCHEMA))})", line=lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        if current is None:
            raise ConfigError("key outside any [section]", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in SCHEMA[current]:
            raise ConfigError(
                f"not a [{current}] key (known: "
                f"{', '.join(sorted(SCHEMA[current]))})",
                key=key, line=lineno)
        unit_class = SCHEMA[current][key]
        try:
            sections[current][key] = parse_quantity(value, unit_class)
        except UnitError as err:
            raise ConfigError(f"{err} (expected unit class: {unit_class})",
                              key=key, line=lineno) from err
    return sections


def _build(cls, section: str, data: dict[str, dict[str, float]],
           *, drop: tuple[str, ...] = ()):
    if section not in data:
        raise ConfigError(f"missing required section [{section}]")
    given = dict(data[section])
    for key in drop:
        given.pop(key, None)
    missing = sorted(set(SCHEMA[section]) - set(given) - set(drop))
    if missing:
        raise ConfigError(
            f"section [{section}] is missing: {', '.join(missing)}")
    try:
        return cls(**given)
    except InvalidParameterError as err:
        raise ConfigError(f"invalid [{section}] block: {err}") from err


def params_from_config(text: str) -> SystemParams:
    """Build a validated SystemParams from config text."""
    data = parse_config_text(text)
    optical = _build(OpticalParams, "optical", data)
    mechanical = _build(MechanicalParams, "mechanical", data)
    has_tls = "tls" in data
    has_material = "material" in data
    if has_tls == has_material:
        raise ConfigError("exactly one of [tls] / [material] must be present")
    try:
        if has_tls:
            tls = _build(TlsParams, "tls", data)
            return SystemParams(optical=optical, mechanical=mechanical, tls=tls)
        if "tls_loss" not in data["material"]:
            raise ConfigError("section [material] is missing: tls_loss")
        material = _build(MaterialParams, "material", data, drop=("tls_loss",))
        return SystemParams(optical=optical, mechanical=mechanical,
                            material=material,
                            material_tls_loss=data["material"]["tls_loss"])
    except InvalidParameterError as err:
        raise ConfigError(str(err)) from err


def load_config(path) -> SystemParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_config(fh.read())


def params_to_config(params: SystemParams) -> str:
    """Serialize to config text in exact (round-trippable) SI values."""
    lines = []

    def block(name, obj, keys, unit_classes):
        lines.append(f"[{name}]")
        for key, uc in zip(keys, unit_classes):
            lines.append(f"{key} = {format_si(getattr(obj, key), uc)}")
        lines.append("")

    o = SCHEMA["optical"]
    block("optical", params.optical, list(o), [o[k] for k in o])
    m = SCHEMA["mechanical"]
    block("mechanical", params.mechanical, list(m), [m[k] for k in m])
    t = SCHEMA["tls"]
    block("tls", params.tls, list(t), [t[k] for k in t])
    return "\n".join(lines)


def save_config(params: SystemParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(params_to_config(params))


def apply_override(params: SystemParams, assignment: str) -> SystemParams:
    """Apply one ``group.key=value`` override (CLI --set).

    Values may carry unit tags exactly as in config files; bare numbers
    are taken as SI.
    """
    from .params import with_value

    path, sep, value = assignment.partition("=")
    if not sep:
        raise ConfigError("override must look like group.key=value",
                          key=assignment)
    path = path.strip()
    group, _, key = path.partition(".")
    group, key = group.strip().lower(), key.strip().lower()
    if group not in SCHEMA or key not in SCHEMA[group]:
        raise ConfigError(f"unknown parameter path {path!r}", key=path)
    try:
        si = parse_quantity(value.strip(), SCHEMA[group][key])
    except UnitError as err:
        raise ConfigError(str(err), key=path) from err
    try:
        return with_value(params, f"{group}.{key}", si)
    except InvalidParameterError as err:
        raise ConfigError(str(err), key=path) from err
