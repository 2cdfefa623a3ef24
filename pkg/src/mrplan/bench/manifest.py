"""Benchmark manifests: everything needed to reproduce a suite, hash-pinned."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

MANIFEST_VERSION = 1


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class ScenarioRef:
    kind: str                   # "file" (scenario schema) or "movingai"
    path: str                   # scenario file, or .map path for movingai
    scen_path: str = ""         # .scen path for movingai
    tile_side_m: float = 1.0
    sha256: str = ""            # pinned content hash ("" = pin at run time)

    def resolve_hash(self) -> str:
        h = hashlib.sha256()
        for p in filter(None, (self.path, self.scen_path)):
            with open(p, "rb") as f:
                h.update(f.read())
        return h.hexdigest()


@dataclass(frozen=True)
class PlannerRef:
    id: str
    budget_s: float = 60.0


@dataclass(frozen=True)
class BenchmarkManifest:
    suite: str
    scenarios: tuple
    planners: tuple
    representations: tuple = ("grid",)
    agent_counts: tuple = (2,)
    seeds: tuple = (0,)
    roadmap_n_samples: int = 120
    roadmap_connection_radius: float = 1.0
    grid_connectivity: int = 4
    tick_rate_hz: float = 60.0
    substeps: int = 4
    format_version: int = MANIFEST_VERSION

    def cells(self):
        """Deterministic enumeration of suite cells."""
        for s_idx, sref in enumerate(self.scenarios):
            for rep in self.representations:
                for pref in self.planners:
                    for n in self.agent_counts:
                        for seed in self.seeds:
                            yield (s_idx, sref, rep, pref, n, seed)


def manifest_from_dict(doc: dict, base_dir: str = ".") -> BenchmarkManifest:
    if doc.get("format_version") != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {doc.get('format_version')!r}")
    try:
        scenarios = []
        for s in doc["scenarios"]:
            kind = s.get("kind", "file")
            if kind not in ("file", "movingai"):
                raise ManifestError(f"unknown scenario kind {kind!r}")
            ref = ScenarioRef(
                kind=kind,
                path=os.path.join(base_dir, s["path"]),
                scen_path=os.path.join(base_dir, s["scen_path"]) if s.get("scen_path") else "",
                tile_side_m=float(s.get("tile_side_m", 1.0)),
                sha256=s.get("sha256", ""),
            )
            if kind == "movingai" and not ref.scen_path:
                raise ManifestError("movingai scenario needs scen_path")
            scenarios.append(ref)
        planners = tuple(PlannerRef(id=p["id"], budget_s=float(p.get("budget_s", 60.0)))
                         for p in doc["planners"])
        m = BenchmarkManifest(
            suite=str(doc.get("suite", "suite")),
            scenarios=tuple(scenarios),
            planners=planners,
            representations=tuple(doc.get("representations", ["grid"])),
            agent_counts=tuple(int(n) for n in doc.get("agent_counts", [2])),
            seeds=tuple(int(s) for s in doc.get("seeds", [0])),
            roadmap_n_samples=int(doc.get("roadmap_n_samples", 120)),
            roadmap_connection_radius=float(doc.get("roadmap_connection_radius", 1.0)),
            grid_connectivity=int(doc.get("grid_connectivity", 4)),
            tick_rate_hz=float(doc.get("tick_rate_hz", 60.0)),
            substeps=int(doc.get("substeps", 4)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"bad manifest: {e}") from e
    for rep in m.representations:
        if rep not in ("grid", "road", "cont"):
            raise ManifestError(f"unknown representation {rep!r}")
    if not m.planners:
        raise ManifestError("manifest lists no planners")
    return m


def load_manifest(path) -> BenchmarkManifest:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise ManifestError(str(e)) from e
    except json.JSONDecodeError as e:
        raise ManifestError(f"invalid JSON: {e}") from e
    m = manifest_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))
    # verify pinned hashes
    for ref in m.scenarios:
        if ref.sha256:
            actual = ref.resolve_hash()
            if actual != ref.sha256:
                raise ManifestError(
                    f"hash mismatch for {ref.path}: pinned {ref.sha256[:12]}.., "
                    f"actual {actual[:12]}..")
    return m
