"""Plain-text scenario configuration: flat ``key = value`` with unit suffixes.

Lengths accept m/mm/um/nm/pm, detector distances additionally accept LT
(multiples of the Talbot distance, resolved at run time).  Exactly one of
speed / wavenumber / wavelength fixes the beam together with the mass.
Unknown keys are rejected with the offending line number.  Serialization
emits a canonical form (SI units, 17 significant digits) whose parse is
idempotent.
"""

from __future__ import annotations

from .beamgrating import GratingSpec, ParticleBeam
from .errors import ConfigError
from .presets import OUTPUT_KINDS, Scenario, presets

__all__ = ["parse_config", "parse_config_file", "scenario_to_config"]

_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12}

_KEYS = {
    "name",
    "preset",
    "n",
    "d",
    "delta",
    "window",
    "a",
    "mass",
    "speed",
    "wavenumber",
    "wavelength",
    "y",
    "n_traj",
    "n_grid",
    "k_points",
    "bins",
    "seed",
    "outputs",
    "carpet_ny",
}

_BEAM_KEYS = ("speed", "wavenumber", "wavelength")


def _number(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"expected a number, got {tok!r}", line) from None


def _integer(tok, line):
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"expected an integer, got {tok!r}", line) from None


def _length(value, line):
    parts = value.split()
    if len(parts) != 2 or parts[1] not in _LENGTH:
        raise ConfigError(
            f"expected '<number> <unit>' with unit in {sorted(_LENGTH)}, got {value!r}",
            line,
        )
    return _number(parts[0], line) * _LENGTH[parts[1]]


def _with_unit(value, units, line):
    parts = value.split()
    if len(parts) != 2 or parts[1] not in units:
        raise ConfigError(f"expected '<number> {'/'.join(units)}', got {value!r}", line)
    return _number(parts[0], line)


def _y_entry(tok, line):
    parts = tok.split()
    if len(parts) != 2:
        raise ConfigError(f"y entries need a unit (LT or a length), got {tok!r}", line)
    val = _number(parts[0], line)
    if parts[1] == "LT":
        return (val, "LT")
    if parts[1] in _LENGTH:
        return (val * _LENGTH[parts[1]], "m")
    raise ConfigError(f"unknown y unit {parts[1]!r}", line)


def parse_config(text):
    """Parse configuration text into a Scenario."""
    raw = {}
    lines = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {rawline.strip()!r}", lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        raw[key] = value
        lines[key] = lineno

    base = None
    if "preset" in raw:
        try:
            base = presets()[raw["preset"]]
        except KeyError:
            raise ConfigError(
                f"unknown preset {raw['preset']!r}", lines["preset"]
            ) from None

    grating_keys = {"n", "d", "delta", "window", "a"}
    if base is not None and not (grating_keys & raw.keys()):
        grating = base.grating
    else:
        missing = {"n", "d", "delta"} - raw.keys()
        if missing and base is None:
            raise ConfigError(f"missing grating keys: {sorted(missing)}")
        n = _integer(raw["n"], lines.get("n")) if "n" in raw else base.grating.n
        d = _length(raw["d"], lines.get("d")) if "d" in raw else base.grating.d
        delta = (
            _length(raw["delta"], lines.get("delta"))
            if "delta" in raw
            else base.grating.delta
        )
        window = raw.get("window", base.grating.window if base else "square")
        if window not in ("square", "gaussian"):
            raise ConfigError(f"unknown window {window!r}", lines.get("window"))
        a = _length(raw["a"], lines.get("a")) if "a" in raw else None
        try:
            grating = GratingSpec(n=n, d=d, delta=delta, window=window, a=a)
        except ValueError as exc:
            raise ConfigError(str(exc), lines.get("n")) from None

    given = [k for k in _BEAM_KEYS if k in raw]
    if base is not None and not given and "mass" not in raw:
        beam = base.beam
        beam_given = base.beam_given
    else:
        if "mass" not in raw:
            raise ConfigError("missing beam mass")
        if len(given) != 1:
            raise ConfigError(
                f"exactly one of {_BEAM_KEYS} must be given, got {given or 'none'}"
            )
        mass = _with_unit(raw["mass"], ("kg",), lines["mass"])
        beam_given = given[0]
        try:
            if beam_given == "speed":
                beam = ParticleBeam.from_mass_speed(
                    mass, _with_unit(raw["speed"], ("m/s",), lines["speed"])
                )
            elif beam_given == "wavenumber":
                beam = ParticleBeam.from_mass_wavenumber(
                    mass, _with_unit(raw["wavenumber"], ("1/m",), lines["wavenumber"])
                )
            else:
                beam = ParticleBeam.from_mass_wavelength(
                    mass, _length(raw["wavelength"], lines["wavelength"])
                )
        except ValueError as exc:
            raise ConfigError(str(exc), lines["mass"]) from None

    if "y" in raw:
        y_spec = tuple(_y_entry(tok.strip(), lines["y"]) for tok in raw["y"].split(","))
    elif base is not None:
        y_spec = base.y_spec
    else:
        raise ConfigError("missing y targets")

    if "outputs" in raw:
        outputs = tuple(tok.strip() for tok in raw["outputs"].split(","))
        for out in outputs:
            if out not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output {out!r}", lines["outputs"])
    elif base is not None:
        outputs = base.outputs
    else:
        outputs = ("intensity",)

    def opt_int(key, default):
        if key in raw:
            val = _integer(raw[key], lines[key])
            if val <= 0:
                raise ConfigError(f"{key} must be positive", lines[key])
            return val
        return default

    defaults = base if base is not None else Scenario(
        name="", beam=beam, grating=grating, beam_given=beam_given
    )
    try:
        return Scenario(
            name=raw.get("name", base.name if base else "custom"),
            beam=beam,
            grating=grating,
            beam_given=beam_given,
            y_spec=y_spec,
            n_traj=opt_int("n_traj", defaults.n_traj),
            n_grid=opt_int("n_grid", defaults.n_grid),
            k_points=opt_int("k_points", defaults.k_points),
            bins=opt_int("bins", defaults.bins),
            seed=opt_int("seed", defaults.seed),
            outputs=outputs,
            carpet_ny=opt_int("carpet_ny", defaults.carpet_ny),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(x):
    return f"{x:.17g}"


def scenario_to_config(sc):
    """Canonical configuration text for a scenario (parse round-trips)."""
    g = sc.grating
    lines = [
        f"name = {sc.name}",
        f"n = {g.n}",
        f"d = {_fmt(g.d)} m",
        f"delta = {_fmt(g.delta)} m",
        f"window = {g.window}",
    ]
    if g.window == "gaussian":
        lines.append(f"a = {_fmt(g.a)} m")
    lines.append(f"mass = {_fmt(sc.beam.mass)} kg")
    if sc.beam_given == "speed":
        lines.append(f"speed = {_fmt(sc.beam.speed)} m/s")
    elif sc.beam_given == "wavenumber":
        lines.append(f"wavenumber = {_fmt(sc.beam.wavenumber)} 1/m")
    else:
        lines.append(f"wavelength = {_fmt(sc.beam.wavelength)} m")
    y_parts = [
        f"{_fmt(v)} LT" if unit == "LT" else f"{_fmt(v)} m" for v, unit in sc.y_spec
    ]
    lines.append(f"y = {', '.join(y_parts)}")
    lines.append(f"n_traj = {sc.n_traj}")
    lines.append(f"n_grid = {sc.n_grid}")
    lines.append(f"k_points = {sc.k_points}")
    lines.append(f"bins = {sc.bins}")
    lines.append(f"seed = {sc.seed}")
    lines.append(f"outputs = {', '.join(sc.outputs)}")
    lines.append(f"carpet_ny = {sc.carpet_ny}")
    return "\n".join(lines) + "\n"
