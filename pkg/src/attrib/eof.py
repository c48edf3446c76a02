"""Empirical orthogonal function basis from historical region-year counts.

Historical exceedance counts are smoothed with a conjugate beta-binomial
step (so logits stay finite even for zero counts), turned into an empirical
covariance on the logit scale, and eigendecomposed. Columns of the basis
are unit eigenvectors with a deterministic sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .core import DataError
from .distributions import beta_binomial_posterior


@dataclass(frozen=True)
class EofBasis:
    """Orthonormal (M, p) basis and its eigenvalues, sorted descending."""

    h: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        w = np.asarray(self.eigenvalues, dtype=float)
        if h.ndim != 2 or w.shape != (h.shape[1],):
            raise DataError("basis must be (M, p) with p eigenvalues")
        if np.any(np.diff(w) > 0) or np.any(w < 0):
            raise DataError("eigenvalues must be non-negative and descending")
        gram = h.T @ h
        if not np.allclose(gram, np.eye(h.shape[1]), atol=1e-8):
            raise DataError("basis columns must be orthonormal within 1e-8")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "eigenvalues", w)

    @property
    def p(self) -> int:
        return self.h.shape[1]

    def truncated(self, p: int) -> "EofBasis":
        if p > self.p:
            raise DataError(f"cannot truncate basis of {self.p} columns to {p}")
        return EofBasis(h=self.h[:, :p], eigenvalues=self.eigenvalues[:p])


def estimate_historical_probs(z: np.ndarray, n: np.ndarray, a: float = 1.0, b: float = 1.0) -> np.ndarray:
    """Logit posterior-mean probabilities, entrywise, for (M, T) count
    matrices. The conjugate mean (z+a)/(n+a+b) is never 0 or 1."""
    z = np.asarray(z, dtype=float)
    n = np.asarray(n, dtype=float)
    if z.shape != n.shape:
        raise DataError("z and n must have the same shape")
    if np.any(z < 0) or np.any(z > n):
        raise DataError("need 0 <= z <= n")
    beta_binomial_posterior(0, 1, a, b)  # validate the prior
    mean = (z + a) / (n + a + b)
    return np.log(mean) - np.log1p(-mean)


def empirical_logit_cov(m: np.ndarray) -> np.ndarray:
    """Row-centered sample covariance (divisor T-1) of an (M, T) matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] < 2:
        raise DataError("need an (M, T) matrix with T >= 2")
    centered = m - m.mean(axis=1, keepdims=True)
    return centered @ centered.T / (m.shape[1] - 1)


def compute_eofs(s: np.ndarray, p: int | None = None) -> EofBasis:
    """Top-p unit eigenvectors of a symmetric PSD matrix.

    Eigenvalues below 1e-12 * max are clipped to zero; each eigenvector is
    flipped so its maximum-magnitude entry is positive (reproducible sign).
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DataError("covariance must be square")
    if not np.allclose(s, s.T, atol=1e-8):
        raise DataError("covariance must be symmetric within 1e-8")
    m = s.shape[0]
    p = m if p is None else p
    if not 1 <= p <= m:
        raise DataError(f"need 1 <= p <= {m}")
    w, v = np.linalg.eigh((s + s.T) / 2.0)
    w = w[::-1][:p].copy()
    v = v[:, ::-1][:, :p].copy()
    w[w < 1e-12 * max(w[0], 0.0)] = 0.0
    w = np.maximum(w, 0.0)
    for j in range(p):
        k = np.argmax(np.abs(v[:, j]))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return EofBasis(h=v, eigenvalues=w)


# ---------------------------------------------------------------------------
# file formats


def read_historical(historical_csv: str) -> pd.DataFrame:
    """Load historical.csv (region_id,year,month,scenario,z,n)."""
    df = pd.read_csv(historical_csv, dtype={"region_id": str, "scenario": str})
    for col in ("region_id", "year", "month", "scenario", "z", "n"):
        if col not in df.columns:
            raise DataError(f"{historical_csv}: missing column {col!r}")
    return df


def historical_logit_matrix(
    df: pd.DataFrame, month: int, scenario: str, a: float = 1.0, b: float = 1.0
) -> tuple[list[str], np.ndarray]:
    """Pivot one (month, scenario) slice into an (M, T) logit matrix."""
    sel = df[(df["month"] == month) & (df["scenario"] == scenario)]
    if sel.empty:
        raise DataError(f"no historical rows for month={month}, scenario={scenario!r}")
    z = sel.pivot_table(index="region_id", columns="year", values="z", sort=True)
    n = sel.pivot_table(index="region_id", columns="year", values="n", sort=True)
    if z.isna().any().any() or n.isna().any().any():
        raise DataError("historical data has missing region/year combinations")
    ids = [str(r) for r in z.index]
    return ids, estimate_historical_probs(z.to_numpy(), n.to_numpy(), a, b)


def write_basis(basis: EofBasis, ids: list[str], eof_csv: str, eigenvalues_csv: str) -> None:
    cols = {"region_id": ids}
    for j in range(basis.p):
        cols[f"eof{j + 1}"] = basis.h[:, j]
    pd.DataFrame(cols).to_csv(eof_csv, index=False, float_format="%.12g")
    pd.DataFrame(
        {"component": np.arange(1, basis.p + 1), "eigenvalue": basis.eigenvalues}
    ).to_csv(eigenvalues_csv, index=False, float_format="%.12g")


def read_basis(eof_csv: str, eigenvalues_csv: str | None = None) -> tuple[list[str], EofBasis]:
    df = pd.read_csv(eof_csv, dtype={"region_id": str})
    cols = [c for c in df.columns if c.startswith("eof")]
    if "region_id" not in df.columns or not cols:
        raise DataError(f"{eof_csv}: expected region_id plus eof1.. columns")
    h = df[cols].to_numpy()
    if eigenvalues_csv is not None:
        w = pd.read_csv(eigenvalues_csv)["eigenvalue"].to_numpy()
    else:
        w = np.zeros(h.shape[1])
    return df["region_id"].tolist(), EofBasis(h=h, eigenvalues=np.maximum(w, 0.0))
