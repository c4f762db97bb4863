"""Flat ``section.key = value`` configuration files.

Example::

    # 4x4 URA, 20 degree cluster spread
    array.kind = URA
    array.n_h = 4
    array.n_v = 4
    scenario.model = Simplified
    scenario.sigma_deg = 20
    experiment.users = 4
    experiment.snr_db = 0, 10, 20
    experiment.strategies = PerfectCDI, JointFull, JointLowDim(2,2)

Blank lines and ``#`` comments are ignored. Every key must be listed in
:data:`SCHEMA`. Angles are written in degrees; they are converted to radians
where rays are drawn. Lists are comma separated (commas inside parentheses do
not split).

:func:`parse` returns only the keys present in the text, typed;
:func:`serialize` writes them back in canonical form so that
``parse(serialize(parse(text))) == parse(text)``.
"""

import re

from .channel import MODELS, SIMPLIFIED, UMI3D, ScenarioConfig
from .errors import ConfigError
from .geometry import UCCA, URA, ArrayGeometry
from .mumimo import ExperimentConfig, parse_strategy

INT = "int"
FLOAT = "float"
STR = "str"
FLOATS = "float list"
STRS = "str list"

VALIDATE_SUITES = ("lemma1", "lemma3", "theorem1", "kronecker")

SCHEMA = {
    "array.kind": STR,
    "array.n_h": INT,
    "array.n_v": INT,
    "array.d_h": FLOAT,
    "array.d_v": FLOAT,
    "array.n_rings": INT,
    "array.n_per_ring": INT,
    "array.radii": FLOATS,
    "array.spacing": FLOAT,
    "scenario.model": STR,
    "scenario.sigma_deg": FLOAT,
    "scenario.n_clusters": INT,
    "scenario.n_rays": INT,
    "scenario.offset_rms_deg": FLOAT,
    "scenario.azimuth_mean_range_deg": FLOAT,
    "scenario.elevation_mean_range_deg": FLOAT,
    "scenario.log_as_mean": FLOAT,
    "scenario.log_as_var": FLOAT,
    "scenario.log_es_mean": FLOAT,
    "scenario.log_es_var": FLOAT,
    "scenario.log_ds_mean": FLOAT,
    "scenario.log_ds_var": FLOAT,
    "scenario.distance_m": FLOAT,
    "scenario.user_height_m": FLOAT,
    "experiment.seed": INT,
    "experiment.users": INT,
    "experiment.bits": INT,
    "experiment.snr_db": FLOATS,
    "experiment.realizations": INT,
    "experiment.strategies": STRS,
    "experiment.stats_samples": INT,
    "experiment.user_pool": INT,
    "experiment.energy_threshold": FLOAT,
    "experiment.dft_bits": INT,
    "experiment.coupling_bits": INT,
    "experiment.max_redraws": INT,
    "validate.suite": STR,
    "validate.samples": INT,
    "validate.sigma_deg": FLOATS,
    "validate.users": INT,
    "validate.threshold": FLOAT,
    "validate.trials": INT,
}

_LIST_SPLIT = re.compile(r",(?![^()]*\))")
_KEY = re.compile(r"^[A-Za-z_]\w*(\.[A-Za-z_]\w*)+$")


def _convert(key, kind, raw, where):
    try:
        if kind == INT:
            return int(raw)
        if kind == FLOAT:
            return float(raw)
        if kind == STR:
            if not raw:
                raise ValueError("empty value")
            return raw
        items = [s.strip() for s in _LIST_SPLIT.split(raw)] if raw else []
        if any(not s for s in items):
            raise ValueError("empty list item")
        if kind == FLOATS:
            return tuple(float(s) for s in items)
        return tuple(items)
    except ValueError as e:
        raise ConfigError(f"{where}: {key}: expected {kind}, got {raw!r} ({e})") from None


def parse(text, source="<config>"):
    """Typed ``{key: value}`` for the keys present in ``text``.

    Raises
    ------
    ConfigError
        With the offending line number and key.
    """
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        where = f"{source}:{lineno}"
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'section.key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"{where}: malformed key {key!r}; keys look like 'section.name'")
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        out[key] = _convert(key, SCHEMA[key], raw, where)
    return out


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse(text, str(path))


def _fmt_value(kind, value):
    if kind == FLOAT:
        return repr(float(value))
    if kind == FLOATS:
        return ", ".join(repr(float(v)) for v in value)
    if kind == STRS:
        return ", ".join(value)
    return str(value)


def serialize(values):
    """Canonical text: schema order, one key per line."""
    unknown = set(values) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    return "".join(f"{k} = {_fmt_value(SCHEMA[k], values[k])}\n" for k in SCHEMA if k in values)


# ---------------------------------------------------------------------------
# typed objects
# ---------------------------------------------------------------------------

def _section(values, prefix):
    n = len(prefix) + 1
    return {k[n:]: v for k, v in values.items() if k.startswith(prefix + ".")}


def _wrap(section, fn):
    try:
        return fn()
    except (ValueError, TypeError) as e:
        raise ConfigError(f"[{section}] {e}") from None


def array_geometry(values):
    a = _section(values, "array")
    kind = a.get("kind", URA)
    if kind == URA:
        extra = {"n_rings", "n_per_ring", "radii", "spacing"} & set(a)
        if extra:
            raise ConfigError(f"array.{sorted(extra)[0]} does not apply to a URA")
        return _wrap("array", lambda: ArrayGeometry.ura(a.get("n_h", 4), a.get("n_v", 4),
                                                        a.get("d_h", 0.5), a.get("d_v", 0.5)))
    if kind == UCCA:
        extra = {"n_h", "n_v", "d_h", "d_v"} & set(a)
        if extra:
            raise ConfigError(f"array.{sorted(extra)[0]} does not apply to a UCCA")
        return _wrap("array", lambda: ArrayGeometry.ucca(a.get("n_rings", 4), a.get("n_per_ring", 4),
                                                         a.get("radii"), a.get("spacing", 0.5)))
    raise ConfigError(f"array.kind: unknown array {kind!r}; expected {URA} or {UCCA}")


def scenario_config(values):
    s = _section(values, "scenario")
    model = s.pop("model", SIMPLIFIED)
    if model not in MODELS:
        raise ConfigError(f"scenario.model: unknown model {model!r}; expected one of {MODELS}")
    if model == SIMPLIFIED:
        return _wrap("scenario", lambda: ScenarioConfig.simplified(s.pop("sigma_deg", 5.0), **s))
    if "sigma_deg" in s:
        raise ConfigError(f"scenario.sigma_deg does not apply to {model}; spreads are log-normal")
    factory = ScenarioConfig.umi3d if model == UMI3D else ScenarioConfig.uma3d
    return _wrap("scenario", lambda: factory(**s))


_EXPERIMENT_FIELDS = {
    "users": "K",
    "bits": "bits_B",
    "snr_db": "snr_grid_db",
    "realizations": "n_realizations",
    "strategies": "strategies",
    "stats_samples": "stats_samples",
    "seed": "master_seed",
    "user_pool": "user_pool",
    "energy_threshold": "energy_threshold",
    "dft_bits": "dft_bits",
    "coupling_bits": "coupling_bits",
    "max_redraws": "max_redraws",
}


def experiment_config(values, seed=None):
    """:class:`ExperimentConfig` from parsed values; ``seed`` overrides ``experiment.seed``."""
    geom = array_geometry(values)
    scen = scenario_config(values)
    e = _section(values, "experiment")
    kw = {_EXPERIMENT_FIELDS[k]: v for k, v in e.items()}
    if seed is not None:
        kw["master_seed"] = int(seed)
    for s in kw.get("strategies", ()):
        try:
            parse_strategy(s)
        except ValueError as err:
            raise ConfigError(f"experiment.strategies: {err}") from None
    return _wrap("experiment", lambda: ExperimentConfig(geom, scen, **kw))


def validate_params(values):
    v = _section(values, "validate")
    suite = v.get("suite")
    if suite is not None and suite not in VALIDATE_SUITES:
        raise ConfigError(f"validate.suite: unknown suite {suite!r}; expected one of {VALIDATE_SUITES}")
    for k in ("samples", "users", "trials"):
        if k in v and v[k] < 1:
            raise ConfigError(f"validate.{k} must be >= 1")
    return v
