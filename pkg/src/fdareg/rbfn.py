"""Gaussian radial-basis function network trained by regularized orthogonal
forward selection.

Inputs are coordinate vectors (scaled basis coordinates, PCA scores or raw
grid vectors); Euclidean distance between them realizes the wanted
functional (semi-)metric because any derivative or centering transform has
already been applied to the coordinates upstream.

Training greedily recruits centers from the training inputs. At each step
every remaining candidate column is orthogonalized against the selected
ones and the one with the largest regularized error reduction
``(w' y)^2 / (w' w + ridge)`` is appended; modified Gram-Schmidt recurrences
keep the whole selection path cheap, and every truncation of the path is a
valid model (used by cross-validation to pick the center count).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .cv import FoldPlan, make_folds
from .errors import ValidationError

#: Candidates whose orthogonalized energy falls below this are numerically
#: redundant and skipped.
ENERGY_TOL = 1e-12
#: Criterion differences below this are ties, broken by lower candidate index.
TIE_TOL = 1e-12

MAX_CENTERS_CAP = 100

#: Default hyperparameter grids for cross-validated training. The width is
#: the median pairwise input distance times a swept multiplier.
WIDTH_MULTIPLIERS = (0.25, 0.5, 1.0, 2.0, 4.0)
RIDGE_GRID = tuple(10.0**e for e in range(-6, 1))


@dataclass(frozen=True)
class RbfnModel:
    """Trained network: Gaussian bumps at selected centers, linear output."""

    centers: np.ndarray  # (k, d), rows drawn from the training inputs
    width: float
    weights: np.ndarray  # (k,)
    ridge: float = 0.0
    metric: str = "l2"  # provenance label for reports

    def __post_init__(self):
        if self.width <= 0:
            raise ValidationError("Gaussian width must be positive")
        self.centers.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_centers(self) -> int:
        return self.centers.shape[0]


def design_matrix(X: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    """Gaussian kernel design: exp(-d(x, c)^2 / (2 width^2))."""
    d2 = cdist(np.atleast_2d(X), np.atleast_2d(centers), "sqeuclidean")
    return np.exp(-d2 / (2.0 * width**2))


def predict(model: RbfnModel, x: np.ndarray) -> float | np.ndarray:
    """Network output. Accepts one vector (d,) or a batch (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if np.atleast_2d(x).shape[1] != model.centers.shape[1]:
        raise ValidationError(
            f"input dimension {np.atleast_2d(x).shape[1]} does not match "
            f"centers of dimension {model.centers.shape[1]}"
        )
    out = design_matrix(x, model.centers, model.width) @ model.weights
    return float(out[0]) if single else out


def median_width(X: np.ndarray) -> float:
    """Median pairwise distance among inputs, the global width heuristic."""
    X = np.atleast_2d(X)
    if X.shape[0] < 2:
        return 1.0
    d = np.median(pdist(X))
    return float(d) if d > 0 else 1.0


@dataclass(frozen=True)
class RbfnPath:
    """Forward-selection path; ``model(k)`` materializes any truncation.

    ``objective`` is the regularized training error after 0, 1, ... steps;
    it is non-increasing by construction. ``gs_coefs`` holds the
    Gram-Schmidt factors (unit upper triangular over the selection order)
    used to back-substitute original-space weights.
    """

    inputs: np.ndarray  # (n, d) candidate pool = training inputs
    selected: np.ndarray  # selection order, indices into inputs
    gs_coefs: np.ndarray  # (k, k)
    ortho_weights: np.ndarray  # (k,)
    objective: np.ndarray  # (k + 1,)
    width: float
    ridge: float
    metric: str = "l2"

    @property
    def max_size(self) -> int:
        return int(self.selected.size)

    def weights(self, k: int) -> np.ndarray:
        """Output weights of the k-center truncation (back-substitution)."""
        if not 1 <= k <= self.max_size:
            raise ValidationError(f"path holds {self.max_size} centers, asked {k}")
        theta = np.zeros(k)
        for i in range(k - 1, -1, -1):
            theta[i] = self.ortho_weights[i] - self.gs_coefs[i, i + 1 : k] @ theta[i + 1 : k]
        return theta

    def model(self, k: int) -> RbfnModel:
        centers = self.inputs[self.selected[:k]].copy()
        return RbfnModel(centers, self.width, self.weights(k), self.ridge, self.metric)

    def predictions(self, X: np.ndarray, sizes: np.ndarray | None = None) -> np.ndarray:
        """Predictions of every truncation: (len(X), len(sizes)) matrix."""
        if sizes is None:
            sizes = np.arange(1, self.max_size + 1)
        design = design_matrix(X, self.inputs[self.selected], self.width)
        out = np.empty((np.atleast_2d(X).shape[0], len(sizes)))
        for i, k in enumerate(sizes):
            out[:, i] = design[:, :k] @ self.weights(int(k))
        return out


def train_ols(
    X: np.ndarray,
    y: np.ndarray,
    width: float,
    ridge: float = 0.0,
    max_centers: int = MAX_CENTERS_CAP,
    metric: str = "l2",
    candidate_idx: np.ndarray | None = None,
) -> RbfnPath:
    """Grow a network by regularized orthogonal forward selection.

    Parameters
    ----------
    X, y : (n, d) inputs and (n,) targets; the inputs double as the
        candidate center pool.
    width : float
        Gaussian width (one global scale for all centers).
    ridge : float
        Regularization strength added to each candidate's energy in the
        selection criterion and in the orthogonal-space weights.
    max_centers : int
        Cap on the path length; must not exceed the candidate count.
    candidate_idx : array of int, optional
        Restrict the center pool to these training rows (defaults to all).

    Returns
    -------
    RbfnPath
        The whole path, so every truncation (1..k centers) can be
        evaluated without retraining.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if y.shape != (n,):
        raise ValidationError("targets must be one scalar per input")
    candidate_idx = (
        np.arange(n) if candidate_idx is None else np.asarray(candidate_idx, dtype=int)
    )
    n_cand = candidate_idx.size
    if max_centers > n_cand:
        raise ValidationError(
            f"max_centers {max_centers} exceeds the candidate count {n_cand}"
        )
    if ridge < 0:
        raise ValidationError("ridge must be >= 0")

    F = design_matrix(X, X[candidate_idx], width)
    base_energy = np.einsum("ij,ij->j", F, F)
    W = F.copy()  # candidate columns, deflated in place as centers are picked
    available = np.ones(n_cand, dtype=bool)

    selected: list[int] = []
    coef_rows = np.zeros((max_centers, n_cand))  # step -> GS coefs per candidate
    ortho_weights = np.zeros(max_centers)
    objective = [float(y @ y)]

    for step in range(max_centers):
        energy = np.einsum("ij,ij->j", W, W)
        proj = W.T @ y
        usable = available & (energy > ENERGY_TOL * base_energy)
        if not np.any(usable):
            # path.max_size records where the early stop happened
            warnings.warn(
                "forward selection stopped early: no candidate with usable "
                "energy left",
                stacklevel=2,
            )
            break
        reduction = np.where(usable, proj**2 / (energy + ridge), -np.inf)
        best = int(np.flatnonzero(reduction >= reduction.max() - TIE_TOL)[0])

        w_best = W[:, best].copy()
        e_best = energy[best]
        ortho_weights[step] = proj[best] / (e_best + ridge)
        objective.append(objective[-1] - proj[best] ** 2 / (e_best + ridge))
        selected.append(best)
        available[best] = False

        # Deflate every column along the new orthogonal direction. The
        # coefficient of a column here equals its Gram-Schmidt factor
        # against w_best (earlier deflations are orthogonal to w_best).
        coefs = (w_best @ W) / e_best
        coef_rows[step] = coefs
        W -= np.outer(w_best, coefs)
        W[:, best] = 0.0

    k = len(selected)
    sel = np.array(selected, dtype=int)
    gs = coef_rows[:k][:, sel]
    gs = np.triu(gs, 1) + np.eye(k)
    return RbfnPath(
        inputs=X.copy(),
        selected=candidate_idx[sel],
        gs_coefs=gs,
        ortho_weights=ortho_weights[:k].copy(),
        objective=np.array(objective),
        width=width,
        ridge=ridge,
        metric=metric,
    )


@dataclass(frozen=True)
class CenterSelection:
    """Cross-validated center count with the mean CV error curve."""

    n_centers: int
    cv_curve: np.ndarray  # mean per-sample validation SSE per center count
    folds: int
    seed: int | None


def cv_error_curve(
    X: np.ndarray,
    y: np.ndarray,
    width: float,
    ridge: float,
    max_centers: int,
    plan: FoldPlan,
    metric: str = "l2",
) -> np.ndarray:
    """Mean per-sample validation SSE for every path truncation.

    Trains one path per fold and evaluates all center counts on the held
    fold, so the cost stays linear in the cap.
    """
    curves = np.zeros(max_centers)
    counts = np.zeros(max_centers)
    for train_idx, val_idx in plan:
        cap = min(max_centers, train_idx.size)
        with warnings.catch_warnings():
            # early stops are routine during width/ridge sweeps; short paths
            # simply leave the tail of the curve unfilled
            warnings.filterwarnings("ignore", message="forward selection stopped early")
            path = train_ols(X[train_idx], y[train_idx], width, ridge, cap, metric)
        preds = path.predictions(X[val_idx])
        sse = np.sum((preds - y[val_idx][:, None]) ** 2, axis=0) / val_idx.size
        curves[: path.max_size] += sse
        counts[: path.max_size] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        curve = curves / counts
    curve[counts == 0] = np.inf
    return curve


def select_centers(
    X: np.ndarray,
    y: np.ndarray,
    width: float,
    ridge: float = 0.0,
    max_centers: int = MAX_CENTERS_CAP,
    folds: int = 4,
    seed: int | None = None,
    metric: str = "l2",
) -> CenterSelection:
    """Pick the center count minimizing mean k-fold validation error.

    Ties break toward fewer centers. Fold assignment is seeded, so the
    choice is deterministic per seed.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    plan = make_folds(X.shape[0], folds, seed)
    cap = min(max_centers, min(t.size for t, _ in plan))
    curve = cv_error_curve(X, y, width, ridge, cap, plan, metric)
    best = int(np.argmin(curve)) + 1  # argmin returns the first (smallest) min
    return CenterSelection(best, curve, folds, seed)


@dataclass(frozen=True)
class RbfnFit:
    """Cross-validated RBFN: final model plus the selected hyperparameters."""

    model: RbfnModel
    width_multiplier: float
    ridge: float
    n_centers: int
    cv_score: float
    cv_table: dict = field(default_factory=dict, repr=False)


def fit_rbfn(
    X: np.ndarray,
    y: np.ndarray,
    width_multipliers: tuple[float, ...] = WIDTH_MULTIPLIERS,
    ridges: tuple[float, ...] = RIDGE_GRID,
    max_centers: int = MAX_CENTERS_CAP,
    folds: int = 4,
    seed: int | None = None,
    metric: str = "l2",
) -> RbfnFit:
    """Joint k-fold selection of width multiplier, ridge and center count,
    then a refit of the winner on all the data.

    The grid winner is the cell with minimal mean validation error; exact
    ties break lexicographically on (multiplier, ridge, centers).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    plan = make_folds(X.shape[0], folds, seed)
    cap = min(max_centers, X.shape[0], min(t.size for t, _ in plan))

    base_width = median_width(X)
    table: dict[tuple[float, float, int], float] = {}
    best_cell, best_score = None, np.inf
    for mult in width_multipliers:
        for ridge in ridges:
            curve = cv_error_curve(X, y, mult * base_width, ridge, cap, plan, metric)
            for kc in range(1, cap + 1):
                score = float(curve[kc - 1])
                table[(mult, ridge, kc)] = score
                if score < best_score:
                    best_cell, best_score = (mult, ridge, kc), score
    if best_cell is None:
        raise ValidationError("empty hyperparameter grid")

    mult, ridge, kc = best_cell
    path = train_ols(X, y, mult * base_width, ridge, min(kc, X.shape[0]), metric)
    return RbfnFit(path.model(min(kc, path.max_size)), mult, ridge, kc, best_score, table)
