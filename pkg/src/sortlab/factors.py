"""Exploratory factor analysis by principal components.

Works on an ``n x p`` observation matrix (rows are benchmark runs, columns
the decision variables): descriptive statistics, Pearson correlations,
Bartlett's sphericity test, KMO sampling adequacy, Jacobi eigen-decomposition,
loadings, communalities, Kaiser retention, varimax/promax rotation,
regression-method score coefficients, per-observation factor contributions
and eigenvalue percentages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chi2 as _chi2

from .bench import VARIABLES, MetricsMatrix
from .errors import (
    DegenerateInput,
    NegativeEigenvalue,
    ShapeMismatch,
    SingularMatrix,
    SingularTransform,
    ZeroCommunalityRow,
    ZeroVariance,
)
from .linalg import jacobi_eigh

EIG_CLAMP = 1e-9
MIN_ROWS_CORRELATION = 4
SCORE_MODES = ("zscore", "paper_literal")


def as_data(m) -> np.ndarray:
    if isinstance(m, MetricsMatrix):
        return m.values()
    x = np.asarray(m, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


def _column_names(x: np.ndarray, names: Optional[Sequence[str]]) -> list[str]:
    if names is not None:
        return list(names)
    if x.shape[1] == len(VARIABLES):
        return list(VARIABLES)
    return [f"var{j}" for j in range(x.shape[1])]


# --------------------------------------------------------------------------
# descriptive statistics and correlation
# --------------------------------------------------------------------------


@dataclass
class DescriptiveStats:
    mean: np.ndarray
    sd: np.ndarray
    n: int


def descriptive_stats(m) -> DescriptiveStats:
    """Column means and sample (n-1) standard deviations."""
    x = as_data(m)
    n = x.shape[0]
    if n < 2:
        raise DegenerateInput(f"descriptive statistics need at least 2 rows, got {n}")
    mean = x.mean(axis=0)
    sd = np.sqrt(((x - mean) ** 2).sum(axis=0) / (n - 1))
    # exactly constant columns get sd 0 regardless of rounding in the mean
    sd[np.all(x == x[0], axis=0)] = 0.0
    return DescriptiveStats(mean=mean, sd=sd, n=n)


def correlation_matrix(m, names: Optional[Sequence[str]] = None) -> np.ndarray:
    """Pearson correlations between the columns of `m`."""
    x = as_data(m)
    n = x.shape[0]
    if n < MIN_ROWS_CORRELATION:
        raise DegenerateInput(f"insufficient rows: correlation needs at least {MIN_ROWS_CORRELATION}, got {n}")
    names = _column_names(x, names)
    d = x - x.mean(axis=0)
    ss = (d * d).sum(axis=0)
    for j in range(x.shape[1]):
        if ss[j] == 0.0 or np.all(x[:, j] == x[0, j]):
            raise ZeroVariance(names[j])
    scale = np.sqrt(ss)
    r = (d.T @ d) / np.outer(scale, scale)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    return np.clip(r, -1.0, 1.0)


# --------------------------------------------------------------------------
# adequacy tests
# --------------------------------------------------------------------------


@dataclass
class BartlettResult:
    chi2: float
    df: int
    p_value: float


def bartlett_test(r, n: int) -> BartlettResult:
    """Bartlett's test that the population correlation matrix is the identity."""
    r = np.asarray(r, dtype=np.float64)
    p = r.shape[0]
    if n <= p:
        raise DegenerateInput(f"Bartlett's test needs n > p, got n={n}, p={p}")
    det = float(np.linalg.det(r))
    if not det > 0.0:
        raise SingularMatrix(f"correlation determinant is {det:g}")
    stat = -(n - 1 - (2 * p + 5) / 6) * math.log(det) + 0.0
    df = p * (p - 1) // 2
    return BartlettResult(chi2=stat, df=df, p_value=float(_chi2.sf(stat, df)))


@dataclass
class KMOResult:
    overall: float
    per_variable: np.ndarray
    # set when there are no off-diagonal correlations at all (0/0)
    degenerate: bool = False


def _inverse(r: np.ndarray, what: str) -> np.ndarray:
    try:
        inv = np.linalg.inv(r)
    except np.linalg.LinAlgError:
        raise SingularMatrix(f"{what}: correlation matrix is singular") from None
    if not np.all(np.isfinite(inv)):
        raise SingularMatrix(f"{what}: correlation matrix is singular")
    return inv


def partial_correlations(r) -> np.ndarray:
    s = _inverse(np.asarray(r, dtype=np.float64), "partial correlations")
    d = np.sqrt(np.diag(s))
    q = -s / np.outer(d, d)
    np.fill_diagonal(q, 1.0)
    return q


def kmo(r) -> KMOResult:
    """Kaiser-Meyer-Olkin measure, overall and per variable."""
    r = np.asarray(r, dtype=np.float64)
    q = partial_correlations(r)
    off = ~np.eye(r.shape[0], dtype=bool)
    r2 = np.where(off, r * r, 0.0)
    q2 = np.where(off, q * q, 0.0)
    row_r = r2.sum(axis=1)
    row_q = q2.sum(axis=1)
    den_rows = row_r + row_q
    per = np.divide(row_r, den_rows, out=np.zeros_like(row_r), where=den_rows > 0)
    tot_r, tot_q = float(r2.sum()), float(q2.sum())
    if tot_r + tot_q == 0.0:
        return KMOResult(overall=0.0, per_variable=per, degenerate=True)
    return KMOResult(overall=tot_r / (tot_r + tot_q), per_variable=per)


# --------------------------------------------------------------------------
# extraction
# --------------------------------------------------------------------------


def pca_eigen(r):
    """Eigenvalues (descending) and orthonormal eigenvectors of `r`."""
    return jacobi_eigh(r)


def loadings(eigenvalues, eigenvectors) -> np.ndarray:
    """Component matrix: eigenvector j scaled by the square root of eigenvalue j."""
    w = np.asarray(eigenvalues, dtype=np.float64).copy()
    if np.any(w < -EIG_CLAMP):
        raise NegativeEigenvalue(f"eigenvalue {w.min():g} below -{EIG_CLAMP:g}")
    w[w < 0] = 0.0
    return np.asarray(eigenvectors, dtype=np.float64) * np.sqrt(w)


def communalities(a, m: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if not 1 <= m <= a.shape[1]:
        raise ValueError(f"retained count must be in [1, {a.shape[1]}], got {m}")
    return (a[:, :m] ** 2).sum(axis=1)


def extract_factors(eigenvalues) -> int:
    """Kaiser criterion: count eigenvalues strictly above 1, keeping at least one."""
    return max(1, int(sum(1 for e in eigenvalues if e > 1.0)))


def eigen_percent(eigenvalues, p: Optional[int] = None):
    """Percentage of total variance per component and its running total."""
    e = np.asarray(eigenvalues, dtype=np.float64)
    p = len(e) if p is None else p
    percent = 100.0 * e / p
    return percent, np.cumsum(percent)


# --------------------------------------------------------------------------
# rotation
# --------------------------------------------------------------------------

VARIMAX_TOL = 1e-10
VARIMAX_MAX_ITER = 1000


def varimax_criterion(a) -> float:
    """Sum over columns of the population variance of the squared loadings."""
    a2 = np.asarray(a, dtype=np.float64) ** 2
    p = a2.shape[0]
    return float(np.sum(p * (a2 * a2).sum(axis=0) - a2.sum(axis=0) ** 2) / p**2)


def _row_norms(a: np.ndarray) -> np.ndarray:
    h = np.sqrt((a * a).sum(axis=1))
    if np.any(h == 0.0):
        rows = [int(i) for i in np.flatnonzero(h == 0.0)]
        raise ZeroCommunalityRow(f"rows {rows} have zero communality")
    return h


def varimax_rotation(a, kaiser: bool = True, tol: float = VARIMAX_TOL, max_iter: int = VARIMAX_MAX_ITER):
    """Varimax by successive planar rotations of column pairs.

    Returns the rotated loadings and the orthogonal matrix T with
    ``rotated = a @ T``.
    """
    a = np.array(a, dtype=np.float64)
    p, m = a.shape
    t = np.eye(m)
    if m < 2:
        return a, t
    h = _row_norms(a) if kaiser else np.ones(p)
    x = a / h[:, None]
    crit = varimax_criterion(x)
    for _ in range(max_iter):
        for j in range(m - 1):
            for k in range(j + 1, m):
                u = x[:, j] ** 2 - x[:, k] ** 2
                v = 2.0 * x[:, j] * x[:, k]
                A, B = u.sum(), v.sum()
                C = (u * u - v * v).sum()
                D = 2.0 * (u * v).sum()
                phi = 0.25 * math.atan2(D - 2.0 * A * B / p, C - (A * A - B * B) / p)
                if phi == 0.0:
                    continue
                c, s = math.cos(phi), math.sin(phi)
                xj, xk = x[:, j].copy(), x[:, k].copy()
                x[:, j] = c * xj + s * xk
                x[:, k] = -s * xj + c * xk
                tj, tk = t[:, j].copy(), t[:, k].copy()
                t[:, j] = c * tj + s * tk
                t[:, k] = -s * tj + c * tk
        new = varimax_criterion(x)
        gain = new - crit
        crit = new
        if gain < tol:
            break
    return x * h[:, None], t


def varimax(a, kaiser: bool = True) -> np.ndarray:
    return varimax_rotation(a, kaiser=kaiser)[0]


@dataclass
class PromaxResult:
    pattern: np.ndarray
    factor_correlation: np.ndarray
    # pattern = loadings @ rotation
    rotation: np.ndarray


def promax(a, kappa: float = 4.0, kaiser: bool = True) -> PromaxResult:
    """Oblique promax rotation of a loading matrix.

    A varimax solution is raised elementwise to the power `kappa` (sign
    kept) to form a target, the varimax loadings are fitted to it by least
    squares, and the transform's columns are rescaled so each factor has
    unit variance.
    """
    a = np.array(a, dtype=np.float64)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    m = a.shape[1]
    if m < 2:
        return PromaxResult(pattern=a, factor_correlation=np.ones((1, 1)), rotation=np.eye(m))
    x, t_vm = varimax_rotation(a, kaiser=kaiser)
    target = np.sign(x) * np.abs(x) ** kappa
    try:
        u = np.linalg.solve(x.T @ x, x.T @ target)
        d = np.diag(np.linalg.inv(u.T @ u))
    except np.linalg.LinAlgError:
        raise SingularTransform("promax normal equations are singular") from None
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise SingularTransform("promax transform has non-positive factor variances")
    u = u * np.sqrt(d)
    t = t_vm @ u
    try:
        phi = np.linalg.inv(t.T @ t)
    except np.linalg.LinAlgError:
        raise SingularTransform("promax transform is singular") from None
    phi = (phi + phi.T) / 2
    np.fill_diagonal(phi, 1.0)
    return PromaxResult(pattern=a @ t, factor_correlation=phi, rotation=t)


# --------------------------------------------------------------------------
# scores
# --------------------------------------------------------------------------


def score_coefficients(r, pattern, factor_correlation=None) -> np.ndarray:
    """Regression-method coefficients W = R^-1 S, S the structure matrix."""
    r = np.asarray(r, dtype=np.float64)
    pattern = np.asarray(pattern, dtype=np.float64)
    if pattern.ndim == 1:
        pattern = pattern.reshape(-1, 1)
    if pattern.shape[0] != r.shape[0]:
        raise ShapeMismatch(f"pattern has {pattern.shape[0]} rows, correlation is {r.shape[0]}x{r.shape[0]}")
    structure = pattern if factor_correlation is None else pattern @ np.asarray(factor_correlation)
    return _inverse(r, "score coefficients") @ structure


def standard_scores(m, mode: str = "zscore", minimum: float = 1.0, names: Optional[Sequence[str]] = None) -> np.ndarray:
    """Standardize each column.

    ``zscore`` gives (x - mean) / sd. ``paper_literal`` gives
    ``minimum + (x + mean) / sd``, an offset variant that adds the mean;
    it exists only so results can be compared against that convention.
    """
    x = as_data(m)
    names = _column_names(x, names)
    st = descriptive_stats(x)
    for j, s in enumerate(st.sd):
        if s == 0.0:
            raise ZeroVariance(names[j])
    if mode == "zscore":
        return (x - st.mean) / st.sd
    if mode == "paper_literal":
        return minimum + (x + st.mean) / st.sd
    raise ValueError(f"unknown score mode {mode!r}")


def assessor_contribution(w, s) -> np.ndarray:
    """Contribution of each observation to each factor: C = S @ W."""
    w = np.asarray(w, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if w.ndim == 1:
        w = w.reshape(-1, 1)
    if s.ndim != 2 or s.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"scores {s.shape} do not match coefficients {w.shape}")
    return s @ w


# --------------------------------------------------------------------------
# full pipeline
# --------------------------------------------------------------------------


@dataclass
class FactorModel:
    technique: Optional[str]
    n: int
    variables: list[str]
    descriptives: DescriptiveStats
    correlation: np.ndarray
    bartlett: BartlettResult
    kmo: KMOResult
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    percent: np.ndarray
    cumulative_percent: np.ndarray
    loadings: np.ndarray
    retained: int
    initial_communalities: np.ndarray
    communalities: np.ndarray
    pattern: np.ndarray
    factor_correlation: np.ndarray
    structure: np.ndarray
    rotation_ssl: np.ndarray
    score_coefficients: np.ndarray
    contributions: np.ndarray
    score_mode: str = "zscore"
    kappa: float = 4.0

    def to_json_dict(self) -> dict:
        def arr(a):
            return np.asarray(a, dtype=np.float64).tolist()

        return {
            "technique": self.technique,
            "n": self.n,
            "variables": list(self.variables),
            "score_mode": self.score_mode,
            "kappa": float(self.kappa),
            "retained": self.retained,
            "eigenvalues": arr(self.eigenvalues),
            "percent": arr(self.percent),
            "cumulative_percent": arr(self.cumulative_percent),
            "rotation_ssl": arr(self.rotation_ssl),
            "loadings": arr(self.loadings),
            "pattern": arr(self.pattern),
            "factor_correlation": arr(self.factor_correlation),
            "score_coefficients": arr(self.score_coefficients),
            "communalities": {
                "initial": arr(self.initial_communalities),
                "extraction": arr(self.communalities),
            },
            "correlation": arr(self.correlation),
            "bartlett": {"chi2": float(self.bartlett.chi2), "df": int(self.bartlett.df), "p": float(self.bartlett.p_value)},
            "kmo": {
                "overall": float(self.kmo.overall),
                "per_variable": arr(self.kmo.per_variable),
                "degenerate": bool(self.kmo.degenerate),
            },
            "descriptives": {"mean": arr(self.descriptives.mean), "sd": arr(self.descriptives.sd), "n": self.descriptives.n},
            "contributions": arr(self.contributions),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, allow_nan=False) + "\n"


def analyze(
    m,
    score_mode: str = "zscore",
    kappa: float = 4.0,
    names: Optional[Sequence[str]] = None,
    technique: Optional[str] = None,
) -> FactorModel:
    """Run the whole principal-components factor analysis on one matrix."""
    if score_mode not in SCORE_MODES:
        raise ValueError(f"unknown score mode {score_mode!r}")
    if technique is None and isinstance(m, MetricsMatrix):
        technique = m.technique
    x = as_data(m)
    names = _column_names(x, names)
    p = x.shape[1]

    r = correlation_matrix(x, names)
    desc = descriptive_stats(x)
    bart = bartlett_test(r, x.shape[0])
    adequacy = kmo(r)
    evals, evecs = pca_eigen(r)
    a = loadings(evals, evecs)
    retained = extract_factors(evals)
    pct, cum = eigen_percent(evals, p)

    rot = promax(a[:, :retained], kappa=kappa)
    structure = rot.pattern @ rot.factor_correlation
    w = score_coefficients(r, rot.pattern, rot.factor_correlation)
    s = standard_scores(x, score_mode, names=names)

    return FactorModel(
        technique=technique,
        n=x.shape[0],
        variables=names,
        descriptives=desc,
        correlation=r,
        bartlett=bart,
        kmo=adequacy,
        eigenvalues=evals,
        eigenvectors=evecs,
        percent=pct,
        cumulative_percent=cum,
        loadings=a,
        retained=retained,
        initial_communalities=communalities(a, p),
        communalities=communalities(a, retained),
        pattern=rot.pattern,
        factor_correlation=rot.factor_correlation,
        structure=structure,
        rotation_ssl=(structure**2).sum(axis=0),
        score_coefficients=w,
        contributions=assessor_contribution(w, s),
        score_mode=score_mode,
        kappa=kappa,
    )
