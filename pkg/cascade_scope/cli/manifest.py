"""
Run manifests and the on-disk layout of a simulation run.

    <run>/manifest.json      RunManifest
    <run>/config.json        full configuration with defaults echoed
    <run>/force.bin          static force (same binary layout as snapshots)
    <run>/series.csv         per-step t, energy, enstrophy, force_work
    <run>/snapshots/*.bin    one file per snapshot
    <run>/analysis/          written by ``analyze`` only
"""

import json
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .. import __version__
from ..errors import SnapshotIOError
from ..solver import DiskSnapshotStore, ForceProfile, Trajectory, snapshot_io
from ..solver.settings_solver import SimulationConfig

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    config: Dict[str, Any]
    version: str = __version__
    seeds: Dict[str, int] = field(default_factory=dict)
    files: Dict[str, Any] = field(default_factory=dict)
    times: List[float] = field(default_factory=list)
    spin_up_time: float = 0.0
    attractor_proximity: bool = False
    wall: Dict[str, Any] = field(default_factory=dict)

    def write(self, directory: Union[str, Path], name: str = MANIFEST_NAME) -> Path:
        p = Path(directory) / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(asdict(self), indent=2, sort_keys=True), encoding="utf-8")
        return p

    @classmethod
    def read(cls, directory: Union[str, Path], name: str = MANIFEST_NAME) -> "RunManifest":
        p = Path(directory) / name
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise SnapshotIOError(f"no run manifest at {p}") from e
        except json.JSONDecodeError as e:
            raise SnapshotIOError(f"run manifest {p} is not valid JSON: {e}") from e
        return cls(**data)


def _relative(paths, root: Path) -> List[str]:
    return [str(Path(p).relative_to(root)) for p in paths]


def save_run(traj: Trajectory, config: SimulationConfig, directory: Union[str, Path],
             analysis: Optional[Dict[str, Any]] = None) -> RunManifest:
    """
    Write force, series, config and manifest next to the snapshots of ``traj``.

    The snapshots must already live under ``directory/snapshots`` (``run``
    with ``out_dir``). ``analysis`` is stored as the ``analysis`` section of
    the recorded configuration.
    """
    root = Path(directory)
    if not isinstance(traj.store, DiskSnapshotStore):
        raise SnapshotIOError("save_run needs a disk-backed trajectory; run with out_dir")
    snapshot_io.write_force(root / "force.bin", traj.force.f, traj.nu)
    snapshot_io.write_time_series(root / "series.csv", traj.series)
    cfg = config.to_dict()
    if analysis is not None:
        cfg["analysis"] = dict(analysis)
    (root / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True), encoding="utf-8")
    manifest = RunManifest(
        config=cfg,
        seeds={"forcing": config.forcing.seed, "initial": config.initial.seed},
        files={
            "config": "config.json",
            "force": "force.bin",
            "series": "series.csv",
            "snapshots": _relative(traj.store.paths, root),
        },
        times=[float(t) for t in traj.times],
        spin_up_time=float(traj.spin_up_time),
        attractor_proximity=bool(traj.attractor_proximity),
        wall={
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "host_python": platform.python_version(),
            **traj.info,
        },
    )
    manifest.write(root)
    return manifest


def load_run(directory: Union[str, Path]) -> Trajectory:
    """
    Reopen a saved run as a lazily loaded trajectory.

    Raises:
        SnapshotIOError: manifest or a declared file is missing.
    """
    root = Path(directory)
    manifest = RunManifest.read(root)
    files = manifest.files
    snapshots = [root / p for p in files.get("snapshots", [])]
    missing = [str(p) for p in snapshots if not p.exists()]
    if missing:
        raise SnapshotIOError(f"{len(missing)} snapshot files missing, first: {missing[0]}")
    config = SimulationConfig.from_dict(manifest.config)
    f = snapshot_io.read_force(root / files["force"])
    series = snapshot_io.read_time_series(root / files["series"])
    if config.forcing.target == 0:
        force = ForceProfile.zero(config.grid)
    else:
        force = ForceProfile.from_field(f, k_f=config.forcing.k_f, seed=config.forcing.seed)
    return Trajectory(
        grid=config.grid,
        nu=config.nu,
        force=force,
        times=np.asarray(manifest.times, dtype=float),
        store=DiskSnapshotStore(root / "snapshots", config.nu, paths=snapshots),
        series=series,
        attractor_proximity=manifest.attractor_proximity,
        spin_up_time=manifest.spin_up_time,
        info={"manifest": str(root / MANIFEST_NAME)},
    )
