"""Built-in test problems: initial data as separable terms, exact solutions, sources."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SQPI = np.sqrt(np.pi)
Term = tuple[float, Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Benchmark:
    name: str
    mode: str
    x_domain: tuple[float, float]
    v_domain: tuple[float, float]
    eps: float
    t_end: float
    params: dict = field(default_factory=dict)
    wm_temperature: float = 1.0
    initial_terms: Callable[[dict], list[Term]] | None = None
    exact: Callable | None = None
    kinetic_source: Callable[[float], list[Term]] | None = None
    macro_source: Callable | None = None


def _landau_terms(p: dict) -> list[Term]:
    a, k = p["alpha"], p["wavenumber"]
    maxw = lambda v: np.exp(-v**2 / 2)
    return [
        (1.0 / np.sqrt(2 * np.pi), np.ones_like, maxw),
        (a / np.sqrt(2 * np.pi), lambda x: np.cos(k * x), maxw),
    ]


def _bump_terms(p: dict) -> list[Term]:
    a, k = p["alpha"], p["wavenumber"]
    npl, nb, u, vt = p["n_p"], p["n_b"], p["u"], p["v_t"]
    prof = lambda v: npl * np.exp(-v**2 / 2) + nb * np.exp(-(v - u) ** 2 / (2 * vt))
    return [(1.0, np.ones_like, prof), (a, lambda x: np.cos(k * x), prof)]


def _maxwellian_terms(p: dict) -> list[Term]:
    return [(1.0 / np.sqrt(2 * np.pi), np.ones_like, lambda v: np.exp(-v**2 / 2))]


def _zero_terms(p: dict) -> list[Term]:
    return [(0.0, np.ones_like, np.ones_like)]


# forced Vlasov-Poisson with a manufactured solution on [-pi, pi]
def _forced_g(v):
    return np.exp(-((4 * v - 1) ** 2) / 4)


def forced_exact_f(x, v, t):
    return (2 - np.cos(2 * x - 2 * np.pi * t)) * _forced_g(v)


def forced_exact_E(x, t):
    return -SQPI / 4 * np.sin(2 * x - 2 * np.pi * t)


def _forced_terms_at(t: float) -> list[Term]:
    return [
        (2.0, np.ones_like, _forced_g),
        (-1.0, lambda x: np.cos(2 * x - 2 * np.pi * t), _forced_g),
    ]


def _forced_kinetic_source(t: float) -> list[Term]:
    g1 = lambda v: ((4 * SQPI + 2) * v - (2 * np.pi + SQPI)) * _forced_g(v)
    g2 = lambda v: SQPI * (0.25 - v) * _forced_g(v)
    return [
        (1.0, lambda x: np.sin(2 * x - 2 * np.pi * t), g1),
        (1.0, lambda x: np.sin(4 * x - 4 * np.pi * t), g2),
    ]


def forced_macro_source(x, t):
    """Sources of the (rho, J, e) equations beyond ``rho E``, with the exact field inserted."""
    s2 = np.sin(2 * x - 2 * np.pi * t)
    s4 = np.sin(4 * x - 4 * np.pi * t)
    c2 = np.cos(2 * x - 2 * np.pi * t)
    E = forced_exact_E(x, t)
    s_rho = SQPI / 4 * (1 - 4 * np.pi) * s2
    s_J = SQPI / 16 * (3 + 4 * SQPI - 4 * np.pi) * s2 - np.pi / 16 * s4
    s_e = (
        SQPI / 128 * (7 + 8 * SQPI - 12 * np.pi) * s2
        - np.pi / 64 * s4
        + SQPI / 8 * (2 - (1 - 4 * np.pi) * c2) * E
    )
    return np.vstack([s_rho, s_J, s_e])


def advection_exact(x1, x2, t):
    return np.sin(x1 + x2 - 2 * t)


def _advection_terms(p: dict) -> list[Term]:
    return [(1.0, np.sin, np.cos), (1.0, np.cos, np.sin)]


_LX_LANDAU = (0.0, 4 * np.pi)

REGISTRY: dict[str, Benchmark] = {
    "weak_landau_1d": Benchmark(
        "weak_landau_1d", "vp1d1v", _LX_LANDAU, (-6.0, 6.0), 1e-5, 40.0,
        params={"alpha": 0.01, "wavenumber": 0.5}, initial_terms=_landau_terms,
    ),
    "strong_landau_1d": Benchmark(
        "strong_landau_1d", "vp1d1v", _LX_LANDAU, (-6.0, 6.0), 1e-3, 40.0,
        params={"alpha": 0.5, "wavenumber": 0.5}, initial_terms=_landau_terms,
    ),
    "bump_on_tail": Benchmark(
        "bump_on_tail", "vp1d1v", (0.0, 2 * np.pi / 0.3), (-13.0, 13.0), 1e-5, 30.0,
        params={
            "alpha": 0.04, "wavenumber": 0.3,
            "n_p": 9 / (10 * np.sqrt(2 * np.pi)), "n_b": 2 / (10 * np.sqrt(2 * np.pi)),
            "u": 4.5, "v_t": 0.5,
        },
        wm_temperature=3.5, initial_terms=_bump_terms,
    ),
    "forced_vp": Benchmark(
        "forced_vp", "vp1d1v", (-np.pi, np.pi), (-4.0, 4.0), 1e-3, 1.0,
        initial_terms=lambda p: _forced_terms_at(0.0),
        exact=forced_exact_f, kinetic_source=_forced_kinetic_source, macro_source=forced_macro_source,
    ),
    "maxwellian": Benchmark(
        "maxwellian", "vp1d1v", _LX_LANDAU, (-6.0, 6.0), 1e-5, 1.0, initial_terms=_maxwellian_terms,
    ),
    "zero": Benchmark("zero", "vp1d1v", _LX_LANDAU, (-6.0, 6.0), 1e-5, 1.0, initial_terms=_zero_terms),
    "linear_advection_2d": Benchmark(
        "linear_advection_2d", "advect2d", (0.0, 2 * np.pi), (0.0, 2 * np.pi), 1e-4, 1.0,
        initial_terms=_advection_terms, exact=advection_exact,
    ),
}


def get_benchmark(name: str) -> Benchmark:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(sorted(REGISTRY))}") from None
