"""Ordinary Kriging surrogate of the cost function.

Samples live in the normalised search space ``[0, 1]^K``. The correlation
between two samples is ``exp(-sum_k theta_k |a_k - b_k|**nu)``; ``theta`` and
the shared exponent ``nu`` are chosen by maximising the concentrated
likelihood with a multi-start compass search in ``log10(theta)``.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy.stats import qmc

logger = logging.getLogger(__name__)

__all__ = [
    "KrigingModel",
    "TrainingSet",
    "correlation",
    "fit",
]

DUPLICATE_TOL = 1e-12
NUGGET = 1e-10
CONDITION_LIMIT = 1e12
# extended precision for refinement residuals (plain double where unavailable)
LD = np.longdouble
NU_CHOICES = (1.0, 1.5, 2.0)
THETA_BOUNDS = (1e-3, 1e3)

_potrf, _potrs, _pocon = linalg.get_lapack_funcs(("potrf", "potrs", "pocon"), (np.zeros(1),))


def correlation(a, b, theta, nu: float) -> float:
    """Kriging basis function between two points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.exp(-np.sum(np.asarray(theta) * np.abs(a - b) ** nu)))


class TrainingSet:
    """Growing set of ``(alpha, cost)`` pairs in normalised coordinates.

    Samples are never removed. Adding a point closer than ``1e-12`` to an
    existing one is refused.
    """

    def __init__(self, dim: int, capacity: int = 64):
        self.dim = int(dim)
        self._x = np.empty((max(capacity, 1), self.dim))
        self._y = np.empty(max(capacity, 1))
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def x(self) -> np.ndarray:
        view = self._x[: self._n]
        view.flags.writeable = False
        return view

    @property
    def y(self) -> np.ndarray:
        view = self._y[: self._n]
        view.flags.writeable = False
        return view

    @property
    def min_cost(self) -> float:
        return float(self._y[: self._n].min()) if self._n else np.inf

    def index_of(self, point) -> int | None:
        """Index of the stored sample matching ``point``, if any."""
        if self._n == 0:
            return None
        d = np.sqrt(np.sum((self._x[: self._n] - np.asarray(point, dtype=float)) ** 2, axis=1))
        i = int(np.argmin(d))
        return i if d[i] <= DUPLICATE_TOL else None

    def __contains__(self, point) -> bool:
        return self.index_of(point) is not None

    def add(self, point, value: float) -> bool:
        """Append a sample; returns ``False`` (and stores nothing) for duplicates."""
        point = np.asarray(point, dtype=float).ravel()
        if point.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}")
        if point in self:
            return False
        if self._n == self._x.shape[0]:
            self._x = np.vstack([self._x, np.empty_like(self._x)])
            self._y = np.concatenate([self._y, np.empty_like(self._y)])
        self._x[self._n] = point
        self._y[self._n] = float(value)
        self._n += 1
        return True

    def copy(self) -> TrainingSet:
        out = TrainingSet(self.dim, capacity=self._x.shape[0])
        out._x[: self._n] = self._x[: self._n]
        out._y[: self._n] = self._y[: self._n]
        out._n = self._n
        return out

    def to_csv(self, path, columns=None) -> None:
        columns = list(columns) if columns else [f"a{k}" for k in range(self.dim)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns + ["cost"])
            for xi, yi in zip(self.x, self.y):
                w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])

    @classmethod
    def from_csv(cls, path) -> TrainingSet:
        rows = list(csv.reader(Path(path).read_text().splitlines()))
        header, body = rows[0], rows[1:]
        ts = cls(len(header) - 1, capacity=max(len(body), 1))
        for row in body:
            ts.add([float(v) for v in row[:-1]], float(row[-1]))
        return ts


def _abs_diff_powers(x: np.ndarray, nu: float) -> np.ndarray:
    """``|x_a - x_b|**nu`` flattened to ``(B*B, K)``."""
    diff = np.abs(x[:, None, :] - x[None, :, :])
    return (diff**nu).reshape(-1, x.shape[1])


@dataclass(frozen=True, eq=False)
class KrigingModel:
    """A fitted ordinary Kriging predictor (immutable)."""

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    theta: np.ndarray
    nu: float
    gamma: float
    xi2: float
    chol: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    nugget: float = 0.0
    condition: float = np.nan
    neg_log_likelihood: float = np.nan
    degenerate: bool = False
    gamma_ext: np.longdouble = field(default=np.nan, repr=False)

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @classmethod
    def build(cls, x, y, theta, nu: float, *, nugget: float | None = None, xi2: float | None = None, **extra):
        """Assemble the predictor for fixed hyperparameters.

        ``nugget=None`` adds :data:`NUGGET` to the diagonal only when the
        correlation matrix condition estimate exceeds :data:`CONDITION_LIMIT`.
        ``xi2`` overrides the likelihood estimate of the process variance.
        """
        x = np.array(x, dtype=float, ndmin=2)
        y = np.array(y, dtype=float).ravel()
        theta = np.array(theta, dtype=float).ravel()
        w = np.exp(-(_abs_diff_powers(x, nu) @ theta)).reshape(len(y), len(y))
        chol, cond, used = _factor(w, nugget)
        if chol is None:
            raise np.linalg.LinAlgError("correlation matrix is not positive definite")
        # The Cholesky factor is only a preconditioner: W, residuals and the
        # weights are carried in extended precision, so gamma and beta are
        # accurate to working precision even when W is badly conditioned.
        w_ext = _correlation_ext(x, x, theta, nu) + LD(used) * np.eye(len(y), dtype=LD)
        y_ext = y.astype(LD)
        u1 = _refined_solve(chol, w_ext, np.ones_like(y_ext))
        uy = _refined_solve(chol, w_ext, y_ext)
        gamma = uy.sum() / u1.sum()
        resid = y_ext - gamma
        beta = _refined_solve(chol, w_ext, resid)
        est_xi2 = max(float(resid @ beta) / len(y), 0.0)
        for arr in (x, y, theta, chol, beta):
            arr.setflags(write=False)
        return cls(
            x, y, theta, float(nu), float(gamma), est_xi2 if xi2 is None else float(xi2), chol, beta,
            nugget=used, condition=cond, gamma_ext=gamma, **extra,
        )

    def _corr(self, points: np.ndarray) -> np.ndarray:
        diff = np.abs(points[:, None, :] - self.x[None, :, :]) ** self.nu
        return np.exp(-(diff @ self.theta))

    def predict(self, alpha):
        """Prediction and uncertainty ``(phi_hat, varsigma)``.

        Accepts one point ``(K,)`` (returns floats) or a batch ``(m, K)``.
        """
        pts = np.asarray(alpha, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        w = self._corr(pts)
        mean = (self.gamma_ext + _correlation_ext(pts, self.x, self.theta, self.nu) @ self.beta).astype(float)
        uw = linalg.cho_solve((self.chol, True), w.T, check_finite=False)
        radicand = np.maximum(1.0 - np.sum(w * uw.T, axis=1), 0.0)
        sigma = 2.0 * np.sqrt(self.xi2 * radicand)
        if single:
            return float(mean[0]), float(sigma[0])
        return mean, sigma


def _correlation_ext(a: np.ndarray, b: np.ndarray, theta, nu: float) -> np.ndarray:
    """Correlations between the rows of ``a`` and ``b`` in extended precision."""
    a, b = a.astype(LD), b.astype(LD)
    diff = np.abs(a[:, None, :] - b[None, :, :]) ** LD(nu)
    return np.exp(-(diff @ np.asarray(theta, dtype=LD)))


def _refined_solve(chol: np.ndarray, w_ext: np.ndarray, rhs: np.ndarray, iters: int = 4) -> np.ndarray:
    """Solve ``W u = rhs`` by refinement with extended-precision residuals."""
    u = linalg.cho_solve((chol, True), rhs.astype(float), check_finite=False).astype(LD)
    for _ in range(iters):
        r = rhs - w_ext @ u
        u += linalg.cho_solve((chol, True), r.astype(float), check_finite=False)
    return u


def _factor(w: np.ndarray, nugget: float | None):
    """Cholesky factor (lower), condition estimate and the nugget applied."""
    applied = 0.0 if nugget is None else float(nugget)
    mat = w + applied * np.eye(w.shape[0]) if applied else w
    chol, cond = _chol_cond(mat)
    if nugget is None and (chol is None or cond > CONDITION_LIMIT):
        applied = NUGGET
        chol, cond = _chol_cond(w + applied * np.eye(w.shape[0]))
    return chol, cond, applied


def _chol_cond(mat: np.ndarray):
    anorm = np.abs(mat).sum(axis=0).max()
    c, info = _potrf(mat, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        return None, np.inf
    rcond, info = _pocon(c, anorm, uplo="L")
    cond = np.inf if info != 0 or rcond <= 0 else 1.0 / rcond
    return c, cond


class _Likelihood:
    """Concentrated negative log-likelihood for fixed data.

    Only the lower triangle of the correlation matrix is formed; that is all
    the Cholesky factorisation reads.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, condition_limit: float):
        self.x = x
        self.y = y
        self.n = len(y)
        self.limit = condition_limit
        rows, cols = np.tril_indices(self.n, -1)
        self._flat = rows * self.n + cols
        self._diff = np.abs(x[rows] - x[cols])
        self._powers = {}
        self._rhs = np.column_stack([np.ones(self.n), y])
        self.evaluations = 0

    def __call__(self, log_theta: np.ndarray, nu: float) -> float:
        self.evaluations += 1
        pw = self._powers.get(nu)
        if pw is None:
            pw = self._powers[nu] = self._diff**nu
        vals = np.exp(-(pw @ (10.0**log_theta)))
        w = np.eye(self.n)
        w.flat[self._flat] = vals
        # 1-norm of the symmetric matrix from its lower triangle
        anorm = (w.sum(axis=0) + w.sum(axis=1)).max() - 1.0
        c, info = _potrf(w, lower=1, clean=1, overwrite_a=1)
        if info != 0:
            return np.inf
        rcond, info = _pocon(c, anorm, uplo="L")
        if info != 0 or not rcond * self.limit >= 1.0:
            return np.inf
        sol, _ = _potrs(c, self._rhs, lower=1)
        gamma = sol[:, 1].sum() / sol[:, 0].sum()
        # U (y - gamma) = U y - gamma U 1
        resid = self.y - gamma
        xi2 = float(resid @ (sol[:, 1] - gamma * sol[:, 0])) / self.n
        if not xi2 > 0:
            return np.inf
        logdet = 2.0 * np.sum(np.log(np.diag(c)))
        return 0.5 * self.n * np.log(xi2) + 0.5 * logdet


def _compass_search(fun, start, value, lo, hi, budget, step=1.0, min_step=0.05):
    """Opportunistic compass search on a box. Returns ``(x, f, evaluations)``.

    The first improving poll point is accepted; a poll without improvement
    halves the step.
    """
    x = start.copy()
    f = value
    used = 0
    k = x.size
    while step >= min_step and used < budget:
        moved = False
        for i in range(k):
            for s in (step, -step):
                trial = x.copy()
                trial[i] = np.clip(trial[i] + s, lo, hi)
                if trial[i] == x[i] or used >= budget:
                    continue
                ft = fun(trial)
                used += 1
                if ft < f:
                    x, f, moved = trial, ft, True
                    break
            if moved:
                break
        if not moved:
            step *= 0.5
    return x, f, used


def fit(
    ts: TrainingSet | tuple,
    *,
    n_starts: int = 20,
    budget: int = 2000,
    n_polish: int = 2,
    nu_choices=NU_CHOICES,
    theta_bounds=THETA_BOUNDS,
    seed: int = 0,
    warm_start: KrigingModel | None = None,
) -> KrigingModel:
    """Maximum-likelihood Kriging fit.

    Parameters
    ----------
    ts : TrainingSet or (x, y)
        Training samples; at least two distinct points.
    n_starts : int
        Starting points (a Latin hypercube in ``log10(theta)``; ``nu``
        cycles through ``nu_choices``), all scored once.
    budget : int
        Cap on likelihood evaluations across all starts.
    n_polish : int
        Number of best starts refined by compass search; each search stops
        once its step falls below 0.05 decade.
    warm_start : KrigingModel, optional
        Previous model whose hyperparameters are added as an extra start.
    """
    if isinstance(ts, TrainingSet):
        x, y = np.array(ts.x), np.array(ts.y)
    else:
        x, y = (np.array(a, dtype=float) for a in ts)
        x = np.atleast_2d(x)
    n, k = x.shape
    if n < 2:
        raise ValueError("Kriging fit needs at least two samples")
    if np.ptp(y) == 0.0:
        warnings.warn("constant training costs: likelihood is degenerate", RuntimeWarning, stacklevel=2)
        return KrigingModel.build(x, y, np.ones(k), 2.0, degenerate=True)

    lo, hi = np.log10(theta_bounds[0]), np.log10(theta_bounds[1])
    like = _Likelihood(x, y, CONDITION_LIMIT)
    rng = np.random.default_rng(seed)
    starts = [
        (lo + (hi - lo) * p, nu_choices[i % len(nu_choices)])
        for i, p in enumerate(qmc.LatinHypercube(d=k, seed=rng).random(n_starts))
    ]
    if warm_start is not None and warm_start.theta.size == k:
        starts.insert(0, (np.clip(np.log10(warm_start.theta), lo, hi), warm_start.nu))
    scored = sorted(((like(s, nu), i, s, nu) for i, (s, nu) in enumerate(starts)), key=lambda t: (t[0], t[1]))

    best = (np.inf, None, None)
    remaining = budget - like.evaluations
    polish = [t for t in scored if np.isfinite(t[0])][:n_polish]
    for rank, (f0, _, s, nu) in enumerate(polish):
        if remaining <= 0:
            break
        share = remaining // (len(polish) - rank)
        xs, fs, used = _compass_search(lambda t: like(t, nu), s, f0, lo, hi, max(share, 2 * k))
        remaining -= used
        if fs < best[0]:
            best = (fs, xs, nu)

    if best[1] is None:
        # every candidate was infeasible: fall back to short correlation lengths
        warnings.warn("no well-conditioned hyperparameters found; using a nugget", RuntimeWarning, stacklevel=2)
        return KrigingModel.build(x, y, np.full(k, theta_bounds[1]), 2.0, degenerate=True)
    logger.debug("kriging fit: B=%d nll=%.6g evals=%d", n, best[0], like.evaluations)
    return KrigingModel.build(x, y, 10.0 ** best[1], best[2], neg_log_likelihood=best[0])
