"""Run configuration: a single JSON document, optionally overridden by ``key=value`` flags."""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .benchmarks import get_benchmark

log = logging.getLogger(__name__)

# largest stable CFL numbers (v_max dt / h_min) of the 3-level SSP multistep
# with upwind DG are about 0.14 (k=1) and 0.045 (k=2); defaults keep a margin
DEFAULT_CFL = {0: 0.2, 1: 0.1, 2: 0.04}
FALLBACK_CFL = 0.02


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class SolverConfig:
    benchmark: str = "weak_landau_1d"
    mode: str | None = None
    x_domain: tuple[float, float] | None = None
    v_domain: tuple[float, float] | None = None
    nx: int = 32
    nv: int = 64
    k: int = 2
    eps: float | None = None
    criterion: str = "relative"
    wm_kind: str = "maxwellian"
    wm_temperature: float | None = None
    cfl: float | None = None
    dt: float | None = None
    dt_rule: str = "cfl"
    t_end: float | None = None
    output_every: int = 1
    snapshot_times: list[float] = field(default_factory=list)
    perturb: float = 0.0
    seed: int = 0
    rank_cap: int = 64
    manufactured_source: bool = True
    momentum_source: str = "flux"
    params: dict = field(default_factory=dict)
    output_dir: str | None = None

    def __post_init__(self):
        try:
            bench = get_benchmark(self.benchmark)
        except KeyError as exc:
            raise ConfigError(f"benchmark: {exc.args[0]}") from None
        if self.mode is None:
            self.mode = bench.mode
        if self.mode not in ("vp1d1v", "advect2d"):
            raise ConfigError(f"mode: expected 'vp1d1v' or 'advect2d', got {self.mode!r}")
        if self.mode != bench.mode:
            raise ConfigError(f"mode: benchmark {self.benchmark!r} runs in mode {bench.mode!r}")
        self.x_domain = tuple(map(float, self.x_domain or bench.x_domain))
        self.v_domain = tuple(map(float, self.v_domain or bench.v_domain))
        for name in ("x_domain", "v_domain"):
            a, b = getattr(self, name)
            if not a < b:
                raise ConfigError(f"{name}: need lower < upper bound, got {(a, b)}")
        for name in ("nx", "nv", "output_every", "rank_cap"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, int) or val < 1:
                raise ConfigError(f"{name}: must be a positive integer, got {val!r}")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or not 0 <= self.k <= 8:
            raise ConfigError(f"k: polynomial degree must be an integer in [0, 8], got {self.k!r}")
        if self.eps is None:
            self.eps = bench.eps
            log.info("eps not given; using the %s default %.1e", self.benchmark, self.eps)
        if self.eps < 0:
            raise ConfigError(f"eps: must be >= 0, got {self.eps}")
        if self.criterion not in ("relative", "absolute"):
            raise ConfigError(f"criterion: expected 'relative' or 'absolute', got {self.criterion!r}")
        if self.wm_kind not in ("maxwellian", "uniform"):
            raise ConfigError(f"wm_kind: expected 'maxwellian' or 'uniform', got {self.wm_kind!r}")
        if self.wm_temperature is None:
            self.wm_temperature = bench.wm_temperature
        if self.wm_temperature <= 0:
            raise ConfigError("wm_temperature: must be positive")
        if self.cfl is None:
            self.cfl = DEFAULT_CFL.get(self.k, FALLBACK_CFL)
        if self.cfl <= 0:
            raise ConfigError("cfl: must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt: must be positive")
        if self.dt_rule not in ("cfl", "advection"):
            raise ConfigError(f"dt_rule: expected 'cfl' or 'advection', got {self.dt_rule!r}")
        if self.t_end is None:
            self.t_end = bench.t_end
        if not self.t_end > 0:
            raise ConfigError(f"t_end: must be > 0, got {self.t_end}")
        if not 0 <= self.perturb < 0.5:
            raise ConfigError(f"perturb: must lie in [0, 0.5), got {self.perturb}")
        if self.momentum_source not in ("flux", "product"):
            raise ConfigError(f"momentum_source: expected 'flux' or 'product', got {self.momentum_source!r}")
        self.snapshot_times = sorted(float(t) for t in self.snapshot_times)
        unknown = set(self.params) - set(bench.params)
        if unknown:
            raise ConfigError(f"params: unknown parameter(s) {sorted(unknown)} for {self.benchmark!r}")
        self.params = {**bench.params, **self.params}

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}


def _coerce(key: str, raw: str):
    """Parse an override value: JSON if possible, else the bare string."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config(source: str | Path | dict | None = None, overrides: list[str] | None = None) -> SolverConfig:
    """Build a validated config from a JSON file path, a dict, or nothing (defaults).

    Overrides are ``key=value`` strings; values are parsed as JSON when they
    can be (``nx=64``, ``x_domain=[0,1]``), else kept as strings.
    ``params.alpha=0.1`` sets a benchmark parameter.
    """
    if source is None:
        data: dict = {}
    elif isinstance(source, dict):
        data = dict(source)
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    data.setdefault("params", {})
    data["params"] = dict(data["params"])
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key.startswith("params."):
            data["params"][key[len("params."):]] = _coerce(key, raw)
        else:
            data[key] = _coerce(key, raw)
    unknown = set(data) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        return SolverConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
