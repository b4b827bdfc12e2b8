"""
Analysis configuration.

Read from the ``analysis`` section of a run configuration and overridden
by ``analyze`` flags.  Every value is echoed into the analysis manifest so
the theorem constants used for a report are on record.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from ..errors import ConfigError
from ..localization.cutoffs import DEFAULT_DELTA

THEOREM_IDS = (1, 2, 3, 4, 6)


@dataclass
class AnalysisConfig:
    delta: float = DEFAULT_DELTA
    ramp: float = 0.25  # η ramp fraction ρ
    scales: Optional[List[float]] = None  # None → R0, R0/2, ... down to 4 dx
    coverings: int = 3  # per scale: one lattice plus jittered replicas
    jitter: float = 0.25
    theorems: List[int] = field(default_factory=lambda: list(THEOREM_IDS))
    K_threshold: Optional[float] = None  # None → 0.1·2√2/θ_f
    C: Optional[float] = None  # None → K_meas·θ_f clamped into (0, 2^{3/2})
    alpha_margin: float = 0.5
    K1: Optional[int] = None  # None → largest measured minimum, rounded to a power of two
    K2: Optional[int] = None
    lemma_K: Optional[float] = None  # None → smallest K the dissipation hypothesis admits
    balance_tol: float = 1e-2  # relative tolerance of the time-localized energy inequality
    telescoping: bool = True
    quadrature: str = "snapshots"
    seed: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not 0.5 < self.delta < 1.0:
            raise ConfigError(f"analysis.delta must lie in (1/2, 1), got {self.delta}")
        if not 0 < self.ramp <= 0.5:
            raise ConfigError(f"analysis.ramp must lie in (0, 1/2], got {self.ramp}")
        if self.coverings < 1:
            raise ConfigError("analysis.coverings must be at least 1")
        if not 0 <= self.jitter < 0.5:
            raise ConfigError(f"analysis.jitter must lie in [0, 1/2), got {self.jitter}")
        unknown = set(self.theorems) - set(THEOREM_IDS)
        if unknown:
            raise ConfigError(f"unknown theorem ids {sorted(unknown)}; choose from {THEOREM_IDS}")
        if not 0 < self.alpha_margin < 1:
            raise ConfigError(f"analysis.alpha_margin must lie in (0, 1), got {self.alpha_margin}")
        if self.C is not None and not 0 < self.C < 2.0 ** 1.5:
            raise ConfigError(f"analysis.C must lie in (0, 2^(3/2)), got {self.C}")
        if self.scales is not None and any(not R > 0 for R in self.scales):
            raise ConfigError("analysis.scales must be positive")
        if self.quadrature not in ("snapshots", "series"):
            raise ConfigError(f"analysis.quadrature must be 'snapshots' or 'series', got {self.quadrature!r}")

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "AnalysisConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown analysis keys: {sorted(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides: Any) -> "AnalysisConfig":
        """Copy with every non-None override applied (CLI flags)."""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return AnalysisConfig.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
