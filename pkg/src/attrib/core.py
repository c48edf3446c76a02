"""Domain types shared by every other module: regions, counts, hypotheses.

Region geometry (centroids on the unit sphere, border adjacency) is a data
concern and comes in from CSV files; nothing geodetic is computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class RegionSet:
    """Region identifiers, unit-sphere centroids and a border-adjacency graph."""

    ids: list[str]
    centroids: np.ndarray  # (M, 3), unit norm
    adjacency: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        cent = np.asarray(self.centroids, dtype=float)
        if cent.shape != (len(self.ids), 3):
            raise DataError(f"centroids must be ({len(self.ids)}, 3), got {cent.shape}")
        norms = np.linalg.norm(cent, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise DataError("centroids must lie on the unit sphere (|norm - 1| <= 1e-9)")
        object.__setattr__(self, "centroids", cent)
        adj = self.adjacency or [[] for _ in self.ids]
        if len(adj) != len(self.ids):
            raise DataError("adjacency must have one neighbor list per region")
        for i, nbrs in enumerate(adj):
            for j in nbrs:
                if j == i:
                    raise DataError(f"region {self.ids[i]} is its own neighbor")
                if i not in adj[j]:
                    raise DataError("adjacency is not symmetric")
        object.__setattr__(self, "adjacency", [sorted(n) for n in adj])

    @property
    def m(self) -> int:
        return len(self.ids)

    def degrees(self) -> np.ndarray:
        return np.array([len(n) for n in self.adjacency])

    def require_connected(self) -> None:
        """Raise unless every region has a neighbor and the graph is connected."""
        if any(len(n) == 0 for n in self.adjacency):
            raise DataError("every region needs at least one neighbor")
        seen = {0}
        stack = [0]
        while stack:
            for j in self.adjacency[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != self.m:
            raise DataError("adjacency graph is disconnected")

    def pairwise_distances(self) -> np.ndarray:
        """Euclidean (chordal) distances between centroids in R^3."""
        diff = self.centroids[:, None, :] - self.centroids[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))


@dataclass(frozen=True)
class ScenarioCounts:
    """Per-region exceedance counts and ensemble sizes for both scenarios."""

    z_f: np.ndarray
    n_f: np.ndarray
    z_c: np.ndarray
    n_c: np.ndarray

    def __post_init__(self):
        for name in ("z_f", "n_f", "z_c", "n_c"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=int))
        if not (self.z_f.shape == self.n_f.shape == self.z_c.shape == self.n_c.shape):
            raise DataError("count vectors must share one length")
        for z, n, tag in ((self.z_f, self.n_f, "factual"), (self.z_c, self.n_c, "counterfactual")):
            if np.any(n <= 0):
                raise DataError(f"{tag} ensemble sizes must be positive")
            if np.any(z < 0) or np.any(z > n):
                raise DataError(f"{tag} counts must satisfy 0 <= z <= n")

    @property
    def m(self) -> int:
        return len(self.z_f)


@dataclass(frozen=True)
class HypothesisSpec:
    """Null hypothesis on the risk ratio RR = p_F / p_C.

    kind "ratio-leq": null is RR <= c; "ratio-geq": null is RR >= c;
    "ratio-outside-interval": null is RR <= l or RR >= u (an "absence of
    effect" null whose rejection is evidence for no change).
    """

    kind: str
    c: float | None = None
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind in ("ratio-leq", "ratio-geq"):
            if self.c is None or self.c <= 0:
                raise ValueError("threshold c must be positive")
        elif self.kind == "ratio-outside-interval":
            if self.interval is None:
                raise ValueError("interval kind needs (l, u) bounds")
            lo, hi = self.interval
            if not (0 < lo < 1 < hi):
                raise ValueError("interval bounds must satisfy 0 < l < 1 < u")
        else:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")

    def null_mask(self, rr: np.ndarray) -> np.ndarray:
        """Boolean mask: True where rr lies in the null region."""
        rr = np.asarray(rr, dtype=float)
        if np.any(rr <= 0):
            raise ValueError("risk ratios must be positive")
        if self.kind == "ratio-leq":
            return rr <= self.c
        if self.kind == "ratio-geq":
            return rr >= self.c
        lo, hi = self.interval
        return (rr <= lo) | (rr >= hi)


def parse_hypothesis(text: str) -> HypothesisSpec:
    """Parse strings like "rr<=5", "rr>=1" or "rr outside (0.5, 2)"."""
    s = text.strip().lower().replace(" ", "")
    if s.startswith("rr<="):
        return HypothesisSpec("ratio-leq", c=float(s[4:]))
    if s.startswith("rr>="):
        return HypothesisSpec("ratio-geq", c=float(s[4:]))
    if s.startswith("rroutside(") and s.endswith(")"):
        lo, hi = (float(v) for v in s[len("rroutside(") : -1].split(","))
        return HypothesisSpec("ratio-outside-interval", interval=(lo, hi))
    raise ValueError(f"cannot parse hypothesis {text!r}")


@dataclass(frozen=True)
class EnsembleField:
    """Monthly ensemble members per region for one scenario-month.

    values[i] holds the member values for region i; every region must have
    the same ensemble size. direction is "exceed" (hot/wet) or "fall-below"
    (cold/dry).
    """

    values: np.ndarray  # (M, n_ens)
    direction: str = "exceed"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise DataError("ensemble field must be a (regions, members) array")
        if self.direction not in ("exceed", "fall-below"):
            raise ValueError(f"unknown event direction {self.direction!r}")
        object.__setattr__(self, "values", vals)


def compute_counts(field: EnsembleField, thresholds: np.ndarray) -> np.ndarray:
    """Count ensemble members strictly beyond the per-region threshold."""
    thr = np.asarray(thresholds, dtype=float)
    if thr.shape != (field.values.shape[0],):
        raise DataError(
            f"need one threshold per region: {thr.shape} vs {field.values.shape[0]} regions"
        )
    if field.direction == "exceed":
        return (field.values > thr[:, None]).sum(axis=1)
    return (field.values < thr[:, None]).sum(axis=1)


def event_thresholds(history: np.ndarray, q: float) -> np.ndarray:
    """Per-region empirical q-quantile (type-7 linear interpolation).

    history is (M, years); pooled values per region define the threshold.
    """
    hist = np.asarray(history, dtype=float)
    if hist.ndim != 2 or hist.shape[1] < 2:
        raise DataError("need at least two historical values per region")
    if not 0 < q < 1:
        raise ValueError("quantile level must be in (0, 1)")
    return np.quantile(hist, q, axis=1, method="linear")


def null_indicator(spec: HypothesisSpec, rr: float) -> int:
    """1 iff the risk ratio lies in the null region of the hypothesis."""
    return int(spec.null_mask(np.array([rr]))[0])


# ---------------------------------------------------------------------------
# file formats


def read_regions(regions_csv: str, adjacency_csv: str | None = None) -> RegionSet:
    """Load regions.csv (region_id,x,y,z) and optional adjacency.csv."""
    df = pd.read_csv(regions_csv, dtype={"region_id": str})
    for col in ("region_id", "x", "y", "z"):
        if col not in df.columns:
            raise DataError(f"{regions_csv}: missing column {col!r}")
    ids = df["region_id"].tolist()
    index = {r: i for i, r in enumerate(ids)}
    adjacency = [[] for _ in ids]
    if adjacency_csv is not None:
        edges = pd.read_csv(adjacency_csv, dtype=str)
        for col in ("region_id", "neighbor_id"):
            if col not in edges.columns:
                raise DataError(f"{adjacency_csv}: missing column {col!r}")
        for a, b in edges.itertuples(index=False):
            if a not in index or b not in index:
                raise DataError(f"adjacency references unknown region {a!r} or {b!r}")
            i, j = index[a], index[b]
            if j not in adjacency[i]:
                adjacency[i].append(j)
                adjacency[j].append(i)
    return RegionSet(ids=ids, centroids=df[["x", "y", "z"]].to_numpy(), adjacency=adjacency)


def write_regions(regions: RegionSet, regions_csv: str, adjacency_csv: str | None = None) -> None:
    df = pd.DataFrame(
        {
            "region_id": regions.ids,
            "x": regions.centroids[:, 0],
            "y": regions.centroids[:, 1],
            "z": regions.centroids[:, 2],
        }
    )
    df.to_csv(regions_csv, index=False, float_format="%.12g")
    if adjacency_csv is not None:
        rows = [
            (regions.ids[i], regions.ids[j])
            for i in range(regions.m)
            for j in regions.adjacency[i]
            if i < j
        ]
        pd.DataFrame(rows, columns=["region_id", "neighbor_id"]).to_csv(adjacency_csv, index=False)


def read_counts(counts_csv: str) -> tuple[list[str], ScenarioCounts]:
    """Load counts.csv (region_id,z_f,n_f,z_c,n_c)."""
    df = pd.read_csv(counts_csv, dtype={"region_id": str})
    for col in ("region_id", "z_f", "n_f", "z_c", "n_c"):
        if col not in df.columns:
            raise DataError(f"{counts_csv}: missing column {col!r}")
    counts = ScenarioCounts(
        z_f=df["z_f"].to_numpy(),
        n_f=df["n_f"].to_numpy(),
        z_c=df["z_c"].to_numpy(),
        n_c=df["n_c"].to_numpy(),
    )
    return df["region_id"].tolist(), counts


def write_counts(ids: list[str], counts: ScenarioCounts, counts_csv: str) -> None:
    pd.DataFrame(
        {
            "region_id": ids,
            "z_f": counts.z_f,
            "n_f": counts.n_f,
            "z_c": counts.z_c,
            "n_c": counts.n_c,
        }
    ).to_csv(counts_csv, index=False)


def fibonacci_sphere_regions(m: int, n_neighbors: int = 4, cap_fraction: float = 1.0) -> RegionSet:
    """Deterministic synthetic region set: Fibonacci-lattice centroids with
    mutual-k-nearest-neighbor adjacency (symmetrized). Stands in for the
    real region files in tests and the desk-scale study.

    cap_fraction < 1 confines the lattice to a polar cap covering that
    fraction of the sphere. Real analysis regions tile land only (roughly
    0.29 of the globe), which packs them far closer together than a
    full-sphere lattice of the same size.
    """
    if not 0.0 < cap_fraction <= 1.0:
        raise ValueError("cap_fraction must be in (0, 1]")
    i = np.arange(m, dtype=float)
    golden = (1 + np.sqrt(5)) / 2
    zc = 1 - 2 * cap_fraction * (i + 0.5) / m
    theta = 2 * np.pi * i / golden
    rad = np.sqrt(1 - zc**2)
    cent = np.column_stack([rad * np.cos(theta), rad * np.sin(theta), zc])
    cent /= np.linalg.norm(cent, axis=1, keepdims=True)
    dist = np.sqrt(((cent[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    adjacency = [[] for _ in range(m)]
    for a in range(m):
        for b in np.argsort(dist[a])[:n_neighbors]:
            b = int(b)
            if b not in adjacency[a]:
                adjacency[a].append(b)
            if a not in adjacency[b]:
                adjacency[b].append(a)
    ids = [f"R{j:03d}" for j in range(m)]
    return RegionSet(ids=ids, centroids=cent, adjacency=adjacency)
