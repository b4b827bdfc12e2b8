"""
Simulation configuration.

A run is described by a JSON file with nested sections (see
``data/configs/README.md`` for units).  ``SimulationConfig.from_dict``
validates the values and ``to_dict`` echoes every default back, so the run
manifest records the full configuration actually used.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..errors import ConfigError
from ..fields.grid import Grid

MIN_QUADRATURE_NODES = 200


@dataclass
class ForcingSpec:
    """Random single-shell force."""

    k_f: int = 2
    shell: str = "band"  # "band": k_f ≤ |k| < k_f+1, "sphere": |k| = k_f
    mode: str = "gr"  # "gr": target is the periodic Grashof number, "norm": target is ‖f‖
    target: float = 1.0e4
    seed: int = 0


@dataclass
class InitialSpec:
    """Initial velocity before spin-up."""

    kind: str = "random"  # "random" or "zero"
    amplitude: float = 0.1  # rms velocity (length/time)
    k_max: float = 4.0
    seed: int = 1


@dataclass
class SimulationConfig:
    """Everything the solver needs to produce a trajectory."""

    N: int = 32
    L: float = 2.0 * math.pi
    nu: float = 0.05  # length²/time
    dt: Optional[float] = None  # None → CFL-controlled
    cfl: float = 0.4
    dt_max: float = 0.05
    T: float = 10.0
    spin_up: float = 5.0
    max_spin_up: Optional[float] = None  # None → 4·spin_up
    snapshot_every: float = 0.05
    log_every: int = 500
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    agmon: Optional[float] = None  # None → certified split-sum value
    theorem_checks: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.forcing, dict):
            self.forcing = ForcingSpec(**self.forcing)
        if isinstance(self.initial, dict):
            self.initial = InitialSpec(**self.initial)
        self.validate()

    @property
    def grid(self) -> Grid:
        return Grid(int(self.N), float(self.L))

    @property
    def R0(self) -> float:
        return self.L / 4.0

    @property
    def spin_up_cap(self) -> float:
        return self.max_spin_up if self.max_spin_up is not None else 4.0 * self.spin_up

    @property
    def snapshot_count(self) -> int:
        return int(math.floor(self.T / self.snapshot_every + 1e-9)) + 1

    def validate(self) -> None:
        """
        Raise ConfigError on values the solver cannot run with.
        """
        try:
            Grid(int(self.N), float(self.L))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl <= 1.5:
            raise ConfigError(f"cfl must lie in (0, 1.5], got {self.cfl}")
        if not self.T > 0 or self.spin_up < 0:
            raise ConfigError("T must be positive and spin_up nonnegative")
        if not 0 < self.snapshot_every <= self.T:
            raise ConfigError("snapshot_every must lie in (0, T]")
        if self.spin_up_cap < self.spin_up:
            raise ConfigError("max_spin_up must not be smaller than spin_up")
        f = self.forcing
        if f.shell not in ("band", "sphere"):
            raise ConfigError(f"forcing.shell must be 'band' or 'sphere', got {f.shell!r}")
        if f.mode not in ("gr", "norm"):
            raise ConfigError(f"forcing.mode must be 'gr' or 'norm', got {f.mode!r}")
        if f.target < 0:
            raise ConfigError("forcing.target must be nonnegative (0 disables forcing)")
        if f.target > 0 and not 1 <= f.k_f <= self.N / 3.0:
            raise ConfigError(f"forcing.k_f must lie in [1, N/3], got {f.k_f}")
        if self.initial.kind not in ("random", "zero"):
            raise ConfigError(f"initial.kind must be 'random' or 'zero', got {self.initial.kind!r}")
        if self.agmon is not None and not self.agmon > 0:
            raise ConfigError("agmon must be positive when given")
        if self.theorem_checks:
            if self.T < self.R0 ** 2 / self.nu:
                raise ConfigError(
                    f"theorem checks need T >= R0^2/nu = {self.R0 ** 2 / self.nu:.4g}, got T={self.T}"
                )
            if self.snapshot_count < MIN_QUADRATURE_NODES:
                raise ConfigError(
                    f"theorem checks need >= {MIN_QUADRATURE_NODES} snapshots, "
                    f"T/snapshot_every gives {self.snapshot_count}"
                )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationConfig":
        """
        Build from the nested sections of a run configuration.

        Sections: grid {N, L}, flow {nu}, time {...}, forcing {...},
        initial {...}, constants {agmon}, checks {theorem_checks}.
        """
        grid = data.get("grid", {})
        flow = data.get("flow", {})
        time = data.get("time", {})
        constants = data.get("constants", {})
        kwargs: Dict[str, Any] = {}
        kwargs.update({k: grid[k] for k in ("N", "L") if k in grid})
        if "nu" in flow:
            kwargs["nu"] = flow["nu"]
        for key in ("dt", "cfl", "dt_max", "T", "spin_up", "max_spin_up", "snapshot_every", "log_every"):
            if key in time:
                kwargs[key] = time[key]
        if "agmon" in constants:
            kwargs["agmon"] = constants["agmon"]
        if "theorem_checks" in data.get("checks", {}):
            kwargs["theorem_checks"] = bool(data["checks"]["theorem_checks"])
        try:
            kwargs["forcing"] = ForcingSpec(**data.get("forcing", {}))
            kwargs["initial"] = InitialSpec(**data.get("initial", {}))
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigError(f"unknown configuration key: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": {"N": self.N, "L": self.L},
            "flow": {"nu": self.nu},
            "time": {
                "dt": self.dt,
                "cfl": self.cfl,
                "dt_max": self.dt_max,
                "T": self.T,
                "spin_up": self.spin_up,
                "max_spin_up": self.spin_up_cap,
                "snapshot_every": self.snapshot_every,
                "log_every": self.log_every,
            },
            "forcing": asdict(self.forcing),
            "initial": asdict(self.initial),
            "constants": {"agmon": self.agmon},
            "checks": {"theorem_checks": self.theorem_checks},
        }


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a JSON run configuration into a dict."""
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"configuration file not found: {p}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"configuration file {p} is not valid JSON: {e}") from e


def load_config(path: Union[str, Path]) -> SimulationConfig:
    return SimulationConfig.from_dict(read_config_file(path))
