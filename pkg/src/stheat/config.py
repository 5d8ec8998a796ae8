"""Experiment configuration: strict flat key-value files with sections.

The file format is INI-style (configparser), one section per module; every
key is validated and unknown sections or keys are hard errors so typos
cannot silently fall back to defaults.  `default_config(name)` returns the
built-in configuration of each experiment at its verification-suite scale.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

from .multiplicative import GSpec
from .noise import QSpec, TimeGrid
from .solver import LoadSpec, OperatorSpec
from .spectral import build_basis, mode_vector

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "default_config"]

EXPERIMENTS = (
    "energy",
    "regularity",
    "mild-equiv",
    "infsup",
    "lemma-constants",
    "multiplicative",
    "noise-dump",
)


class ConfigError(ValueError):
    """Invalid, unknown, or inconsistent configuration entry."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters.

    Field groups mirror the config file sections; `ns` and the infsup sweep
    lists parametrize refinement studies.  All positivity and range
    constraints of the downstream modules are validated at construction.
    """

    name: str
    out: str | None = "results"
    quiet: bool = False
    # grid / spectral
    T: float = 1.0
    N: int = 128
    J: int = 16
    # noise
    rho: float | None = 2.0
    gammas: tuple | None = None
    beta: float = 0.0
    # operator
    A_min: float = 1.0
    A_max: float = 1.0
    law: str = "constant"
    kappa: float | None = None
    # load
    u0: str = "mode:1"
    f: str = "zero"
    psi: str = "identity"
    # multiplicative
    g0: float = 0.5
    p: float = 4.0
    kappa_bound: float | None = None
    M_colloc: int | None = None
    tol: float = 1e-8
    max_iter: int = 100
    profile: str = "constant"
    # monte carlo
    paths: int = 1000
    seed: int = 20260810
    chunk: int = 2000
    # refinement controls
    ns: tuple = ()
    js: tuple = ()
    kappas: tuple = (0.5, 1.0, 2.0)
    betas: tuple = (0.0, 1.0)
    sizes: tuple = ((8, 32), (16, 64), (32, 128))

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}")
        if self.T <= 0 or self.N < 1 or self.J < 1:
            raise ConfigError("need T > 0, N >= 1, J >= 1")
        if self.gammas is None and self.rho is None:
            raise ConfigError("specify either rho or gammas")
        if self.paths < 2:
            raise ConfigError("paths must be >= 2")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")

    # -- domain-object builders -------------------------------------------
    def grid(self):
        return TimeGrid(T=self.T, N=self.N)

    def basis(self, J=None):
        return build_basis(self.J if J is None else J)

    def qspec(self, J=None):
        J = self.J if J is None else J
        if self.gammas is not None:
            g = np.asarray(self.gammas, dtype=float)
            if g.size < J:
                raise ConfigError("explicit gammas shorter than J")
            return QSpec(gammas=g[:J])
        return QSpec.from_decay(J, self.rho)

    def operator(self):
        return OperatorSpec(
            A_min=self.A_min, A_max=self.A_max, law=self.law, value=self.kappa
        )

    def loadspec(self, basis):
        return LoadSpec(
            U0=_vector(self.u0, basis),
            f=_vector(self.f, basis),
            psi_diag=_vector(self.psi, basis),
        )

    def gspec(self):
        return GSpec(
            g0=self.g0,
            p=self.p,
            kappa_bound=self.kappa_bound,
            M_colloc=self.M_colloc,
            space_profile=None if self.profile == "constant" else self.profile,
        )

    def summary(self):
        """Plain-dict echo of the resolved configuration."""
        out = {}
        for key, val in self.__dict__.items():
            if isinstance(val, tuple):
                val = list(val)
            out[key] = val
        return out


def _vector(spec, basis):
    """Parse a load vector spec: zero | identity | mode:<j>[:amp] | csv."""
    J = basis.J
    if spec == "zero":
        return np.zeros(J)
    if spec == "identity":
        return np.ones(J)
    if spec.startswith("mode:"):
        parts = spec.split(":")
        j = int(parts[1])
        amp = float(parts[2]) if len(parts) > 2 else 1.0
        return mode_vector(basis, j, amp)
    try:
        vals = np.array([float(x) for x in spec.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse vector spec {spec!r}") from exc
    if vals.size != J:
        raise ConfigError(f"vector spec {spec!r} has length {vals.size}, need {J}")
    return vals


# section -> {key: (attribute, parser)}
def _float_or_none(s):
    return None if s.lower() in ("", "none") else float(s)


def _int_or_none(s):
    return None if s.lower() in ("", "none") else int(s)


def _floats(s):
    return tuple(float(x) for x in s.split(","))


def _ints(s):
    return tuple(int(x) for x in s.split(","))


def _sizes(s):
    out = []
    for item in s.split(","):
        j, n = item.lower().split("x")
        out.append((int(j), int(n)))
    return tuple(out)


_SCHEMA = {
    "experiment": {
        "name": ("name", str),
        "out": ("out", str),
        "quiet": ("quiet", lambda s: s.lower() in ("1", "true", "yes")),
    },
    "grid": {"t": ("T", float), "n": ("N", int)},
    "spectral": {"j": ("J", int)},
    "noise": {
        "rho": ("rho", _float_or_none),
        "gammas": ("gammas", _floats),
        "beta": ("beta", float),
    },
    "operator": {
        "a_min": ("A_min", float),
        "a_max": ("A_max", float),
        "law": ("law", str),
        "kappa": ("kappa", _float_or_none),
    },
    "load": {"u0": ("u0", str), "f": ("f", str), "psi": ("psi", str)},
    "multiplicative": {
        "g0": ("g0", float),
        "p": ("p", float),
        "kappa_bound": ("kappa_bound", _float_or_none),
        "m_colloc": ("M_colloc", _int_or_none),
        "tol": ("tol", float),
        "max_iter": ("max_iter", int),
        "profile": ("profile", str),
    },
    "mc": {
        "paths": ("paths", int),
        "seed": ("seed", int),
        "chunk": ("chunk", int),
    },
    "refine": {
        "ns": ("ns", _ints),
        "js": ("js", _ints),
        "kappas": ("kappas", _floats),
        "betas": ("betas", _floats),
        "sizes": ("sizes", _sizes),
    },
}


def load_config(path, overrides=None):
    """Parse a config file; unknown sections or keys are hard errors."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    values = {}
    for section in parser.sections():
        key_map = _SCHEMA.get(section.lower())
        if key_map is None:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            entry = key_map.get(key.lower())
            if entry is None:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            attr, parse = entry
            try:
                values[attr] = parse(raw)
            except ConfigError:
                raise
            except Exception as exc:
                raise ConfigError(
                    f"invalid value {raw!r} for {section}.{key}: {exc}"
                ) from exc
    if "name" not in values:
        raise ConfigError("config must set experiment.name")
    if overrides:
        values.update(overrides)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def default_config(name, **overrides):
    """Built-in configuration of each experiment at verification scale."""
    presets = {
        "energy": dict(
            N=64, J=8, rho=2.0, paths=400, u0="mode:1", f="zero", psi="identity"
        ),
        "regularity": dict(
            N=128, J=32, rho=4.0, beta=1.0, paths=300, u0="zero", psi="identity"
        ),
        "mild-equiv": dict(
            N=64, J=16, rho=3.0, paths=1000, ns=(64, 128, 256, 512), u0="mode:1"
        ),
        "infsup": dict(),
        "lemma-constants": dict(N=128, J=16, rho=2.0, paths=10000),
        "multiplicative": dict(
            T=0.25,
            N=512,
            J=1,
            gammas=(1.0,),
            rho=None,
            paths=10000,
            u0="mode:1",
            psi="zero",
            g0=0.5,
            profile="inverse-mode-1",
        ),
        "noise-dump": dict(N=16, J=4, rho=2.0, paths=4),
    }
    if name not in presets:
        raise ConfigError(f"unknown experiment {name!r}")
    params = dict(presets[name])
    params.update(overrides)
    return ExperimentConfig(name=name, **params)
