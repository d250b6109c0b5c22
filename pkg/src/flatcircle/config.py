"""Experiment configuration: plain INI files, validated and hashable.

Example::

    [map]
    a = 0.0
    b = 0.1
    c = 0.5

    [run]
    ells = 2, 3
    target = golden
    target_length = 20
    n_max = 10
    depth = 15
    precision = 512

    [output]
    dir = out

    [thresholds]
    r2 = 0.9
    stabilization = 0.2

``target`` is a preset name (golden, silver, doubling, ten) or an explicit
comma-separated list of partial quotients like ``1,2,2,1,...``.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

from .errors import ConfigError
from .rotation import ContinuedFraction, preset

_PRESETS = ("golden", "silver", "doubling", "ten")


@dataclass(frozen=True)
class ExperimentConfig:
    a: str = "0.0"
    b: str = "0.1"
    c: str = "0.5"
    ells: tuple[str, ...] = ("2", "3")
    target: str = "golden"
    target_length: int = 20
    n_max: int = 10
    depth: int = 15
    precision: int = 512
    out_dir: str = "out"
    r2_threshold: float = 0.9
    stabilization_threshold: float = 0.2

    def validate(self):
        if self.precision < 64:
            raise ConfigError("precision must be at least 64 bits")
        if self.n_max < 2:
            raise ConfigError("n_max must be at least 2")
        if self.depth < self.n_max + 2:
            raise ConfigError("depth must be at least n_max + 2")
        if not self.ells:
            raise ConfigError("at least one ell value required")
        for e in self.ells:
            try:
                if float(e) <= 1:
                    raise ConfigError(f"ell must exceed 1, got {e}")
            except ValueError:
                raise ConfigError(f"unparseable ell {e!r}") from None
        cf = self.continued_fraction()
        if len(cf) < self.depth:
            raise ConfigError("target prefix shorter than tuning depth")

    def continued_fraction(self) -> ContinuedFraction:
        t = self.target.strip()
        if t in _PRESETS:
            return preset(t, self.target_length)
        try:
            return ContinuedFraction.parse(t)
        except Exception as exc:
            raise ConfigError(f"bad rotation target {t!r}: {exc}") from exc

    def hash(self) -> str:
        canon = repr((self.a, self.b, self.c, self.ells, self.target,
                      self.target_length, self.n_max, self.depth,
                      self.precision))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        m = parser["map"] if parser.has_section("map") else {}
        r = parser["run"] if parser.has_section("run") else {}
        o = parser["output"] if parser.has_section("output") else {}
        t = parser["thresholds"] if parser.has_section("thresholds") else {}
        d = ExperimentConfig()
        cfg = ExperimentConfig(
            a=m.get("a", d.a), b=m.get("b", d.b), c=m.get("c", d.c),
            ells=tuple(s.strip() for s in
                       r.get("ells", ",".join(d.ells)).split(",")),
            target=r.get("target", d.target),
            target_length=int(r.get("target_length", d.target_length)),
            n_max=int(r.get("n_max", d.n_max)),
            depth=int(r.get("depth", d.depth)),
            precision=int(r.get("precision", d.precision)),
            out_dir=o.get("dir", d.out_dir),
            r2_threshold=float(t.get("r2", d.r2_threshold)),
            stabilization_threshold=float(
                t.get("stabilization", d.stabilization_threshold)),
        )
    except (ValueError, configparser.Error) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    cfg.validate()
    return cfg
