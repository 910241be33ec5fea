"""One-hidden-layer perceptron with weight decay and multi-restart
second-order training.

The network realizes ``out_bias + sum_h w_h tanh(b_h + v_h . x)`` on
coordinate vectors; its first layer is the coordinate image of a functional
neuron (an inner product with a weight function plus bias, passed through a
sigmoid). Training minimizes the sum of squared errors plus a weight-decay
penalty on all non-bias weights, using Levenberg-style damped Gauss-Newton:
accepted steps never increase the regularized loss. Many random restarts run
in parallel (batched linear algebra) and the best final loss wins.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fpca as _fpca
from .cv import derive_seed, make_folds
from .errors import FdaregError, TrainingError, ValidationError

#: Gradient-norm convergence tolerance, relative to (1 + loss).
GRAD_TOL = 1e-8
MAX_ITER = 500

#: Default meta-parameter grids for cross-validated training.
HIDDEN_GRID = (1, 2, 3, 4, 5, 6)
DECAY_GRID = tuple(10.0**e for e in range(-5, 1))


@dataclass(frozen=True)
class MlpModel:
    """Trained perceptron: tanh hidden layer, identity output unit."""

    hidden_weights: np.ndarray  # (H, d)
    hidden_biases: np.ndarray  # (H,)
    output_weights: np.ndarray  # (H,)
    output_bias: float
    decay: float = 0.0

    def __post_init__(self):
        self.hidden_weights.setflags(write=False)
        self.hidden_biases.setflags(write=False)
        self.output_weights.setflags(write=False)

    @property
    def hidden_count(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]


def forward(model: MlpModel, x: np.ndarray) -> float | np.ndarray:
    """Network output for one vector (d,) or a batch (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != model.input_dim:
        raise ValidationError(
            f"input dimension {X.shape[1]} does not match model dimension "
            f"{model.input_dim}"
        )
    act = np.tanh(X @ model.hidden_weights.T + model.hidden_biases)
    out = act @ model.output_weights + model.output_bias
    return float(out[0]) if single else out


def _shapes(hidden: int, dim: int) -> tuple[slice, slice, slice, int]:
    """Parameter-vector layout: [V.ravel, b, w, b0]."""
    n_v = hidden * dim
    return (
        slice(0, n_v),
        slice(n_v, n_v + hidden),
        slice(n_v + hidden, n_v + 2 * hidden),
        n_v + 2 * hidden,
    )


def pack(model: MlpModel) -> np.ndarray:
    return np.concatenate(
        [
            model.hidden_weights.ravel(),
            model.hidden_biases,
            model.output_weights,
            [model.output_bias],
        ]
    )


def unpack(params: np.ndarray, hidden: int, dim: int, decay: float) -> MlpModel:
    sv, sb, sw, ib0 = _shapes(hidden, dim)
    return MlpModel(
        params[sv].reshape(hidden, dim).copy(),
        params[sb].copy(),
        params[sw].copy(),
        float(params[ib0]),
        decay,
    )


def loss_and_grad(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, hidden: int, decay: float
) -> tuple[float, np.ndarray]:
    """Regularized loss ``SSE + decay * ||non-bias weights||^2`` and its
    analytic gradient with respect to the packed parameter vector.

    The decay term covers hidden and output weights but neither bias, so
    the penalty gradient with respect to any bias is exactly zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, dim = X.shape
    sv, sb, sw, ib0 = _shapes(hidden, dim)
    V = params[sv].reshape(hidden, dim)
    b = params[sb]
    w = params[sw]
    b0 = params[ib0]

    act = np.tanh(X @ V.T + b)  # (n, H)
    resid = y - (act @ w + b0)
    sech2 = 1.0 - act**2
    loss = float(resid @ resid + decay * (V.ravel() @ V.ravel() + w @ w))

    grad = np.empty_like(params)
    back = resid[:, None] * (w * sech2)  # (n, H), d(SSE)/dz_h factors
    grad[sv] = (-2.0 * back.T @ X).ravel() + 2.0 * decay * V.ravel()
    grad[sb] = -2.0 * back.sum(axis=0)
    grad[sw] = -2.0 * act.T @ resid + 2.0 * decay * w
    grad[ib0] = -2.0 * resid.sum()
    return loss, grad


def init_params(
    seed: int | None, hidden: int, dim: int, n_restarts: int
) -> np.ndarray:
    """Uniform [-0.7, 0.7] initialization scaled by 1/sqrt(fan-in).

    Each restart draws from its own child stream of ``seed``, so restart r
    is the same no matter how many restarts run alongside it.
    """
    n_params = hidden * dim + 2 * hidden + 1
    sv, sb, sw, ib0 = _shapes(hidden, dim)
    params = np.empty((n_restarts, n_params))
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(n_restarts)):
        rng = np.random.default_rng(child)
        params[r, sv] = rng.uniform(-0.7, 0.7, hidden * dim) / np.sqrt(dim)
        params[r, sb] = rng.uniform(-0.7, 0.7, hidden)
        params[r, sw] = rng.uniform(-0.7, 0.7, hidden) / np.sqrt(hidden)
        params[r, ib0] = rng.uniform(-0.7, 0.7)
    return params


def _batched_loss(params, X, y, hidden, decay):
    """Regularized loss per restart. params: (R, P)."""
    R = params.shape[0]
    n, dim = X.shape
    sv, sb, sw, ib0 = _shapes(hidden, dim)
    V = params[:, sv].reshape(R, hidden, dim)
    act = np.tanh(np.einsum("nd,rhd->rnh", X, V) + params[:, sb][:, None, :])
    out = np.einsum("rnh,rh->rn", act, params[:, sw]) + params[:, ib0][:, None]
    resid = y[None, :] - out
    pen = np.einsum("rp,rp->r", params[:, sv], params[:, sv])
    pen += np.einsum("rh,rh->r", params[:, sw], params[:, sw])
    return np.einsum("rn,rn->r", resid, resid) + decay * pen, resid, act


def train(
    X: np.ndarray,
    y: np.ndarray,
    hidden: int,
    decay: float,
    restarts: int = 60,
    seed: int | None = None,
    max_iter: int = MAX_ITER,
    grad_tol: float = GRAD_TOL,
) -> MlpModel:
    """Fit the perceptron from many random initializations.

    Each restart runs damped Gauss-Newton on the residual vector
    (data residuals plus sqrt(decay)-scaled weight residuals) until the
    gradient norm falls below ``grad_tol * (1 + loss)`` or ``max_iter``
    trial steps were taken; steps are only accepted when they strictly
    decrease the regularized loss. The restart with the best final loss
    wins. Restarts whose loss turns non-finite are discarded with a
    warning; if every restart diverges a :class:`TrainingError` is raised.

    All restarts advance together through batched linear algebra, so the
    wall cost is far below ``restarts`` sequential runs.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if restarts < 1:
        raise ValidationError("need at least one restart")
    if hidden < 1:
        raise ValidationError("need at least one hidden unit")
    n, dim = X.shape
    sv, sb, sw, ib0 = _shapes(hidden, dim)
    n_params = hidden * dim + 2 * hidden + 1
    weight_mask = np.zeros(n_params)
    weight_mask[sv] = 1.0
    weight_mask[sw] = 1.0

    params = init_params(seed, hidden, dim, restarts)
    loss, resid, act = _batched_loss(params, X, y, hidden, decay)
    diverged = ~np.isfinite(loss)
    active = ~diverged
    mu = np.full(restarts, 1e-2)

    eye = np.eye(n_params)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p_a, act_a, resid_a = params[idx], act[idx], resid[idx]
        # Jacobian of the data residuals w.r.t. parameters, per live restart.
        wsech = p_a[:, None, sw] * (1.0 - act_a**2)  # d out / d b_h, (r, n, H)
        J = np.empty((idx.size, n, n_params))
        J[:, :, sv] = (wsech[:, :, :, None] * X[None, :, None, :]).reshape(
            idx.size, n, hidden * dim
        )
        J[:, :, sb] = wsech
        J[:, :, sw] = act_a
        J[:, :, ib0] = 1.0

        jtj = np.matmul(J.transpose(0, 2, 1), J)
        jtj += decay * np.diag(weight_mask)[None, :, :]
        grad_half = np.einsum("rnp,rn->rp", J, resid_a) - decay * weight_mask * p_a
        # full gradient of the loss is -2 * grad_half

        gnorm = np.linalg.norm(grad_half, axis=1) * 2.0
        live = gnorm > grad_tol * (1.0 + np.abs(loss[idx]))
        active[idx[~live]] = False
        if not np.any(live):
            continue
        idx, jtj, grad_half, p_a = idx[live], jtj[live], grad_half[live], p_a[live]

        A = jtj + mu[idx][:, None, None] * eye[None, :, :]
        try:
            step = np.linalg.solve(A, grad_half[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = np.stack(
                [np.linalg.lstsq(a, g, rcond=None)[0] for a, g in zip(A, grad_half)]
            )

        trial = p_a + step
        trial_loss, trial_resid, trial_act = _batched_loss(trial, X, y, hidden, decay)
        improved = np.isfinite(trial_loss) & (trial_loss < loss[idx])

        up = idx[improved]
        params[up] = trial[improved]
        resid[up] = trial_resid[improved]
        act[up] = trial_act[improved]
        loss[up] = trial_loss[improved]
        mu[up] = np.maximum(mu[up] / 3.0, 1e-14)
        down = idx[~improved]
        mu[down] *= 2.0
        # damping this large means no further progress is possible
        active[idx[mu[idx] > 1e12]] = False

    if np.any(diverged):
        warnings.warn(
            f"{int(np.sum(diverged))} restart(s) diverged and were discarded",
            stacklevel=2,
        )
    loss = np.where(diverged | ~np.isfinite(loss), np.inf, loss)
    best = int(np.argmin(loss))
    if not np.isfinite(loss[best]):
        raise TrainingError("all restarts diverged")
    return unpack(params[best], hidden, dim, decay)


@dataclass(frozen=True)
class MetaSelection:
    """Winner of the joint (hidden units, decay, components) grid search."""

    hidden: int
    decay: float
    n_components: int
    cv_score: float
    cv_table: dict = field(repr=False, default_factory=dict)
    notes: tuple[str, ...] = ()


def select_meta(
    X: np.ndarray,
    y: np.ndarray,
    hidden_grid: tuple[int, ...] = HIDDEN_GRID,
    decay_grid: tuple[float, ...] = DECAY_GRID,
    component_grid: tuple[int, ...] = tuple(range(1, 19)),
    pca_standardize: bool = False,
    folds: int = 4,
    fold_seed: int | None = None,
    restart_seed: int = 0,
    restarts: int = 12,
    max_iter: int = MAX_ITER,
    prepare: Callable | None = None,
) -> MetaSelection:
    """Joint k-fold selection of hidden count, weight decay and PCA size.

    Inside each fold the principal components (and the optional per-column
    standardization) are fitted on that fold's training part only; scores
    are always whitened before reaching the network, matching how the
    trained models are used. The grid winner minimizes the mean per-sample
    validation SSE; exact ties break lexicographically on
    (hidden, decay, components). Cells that fail (e.g. whitening over a
    degenerate component) are skipped and reported in ``notes``.

    ``prepare(train_idx, val_idx)`` may replace the default row slicing,
    e.g. to run fold-internal imputation before the PCA.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    plan = make_folds(X.shape[0], folds, fold_seed)
    if prepare is None:
        prepare = lambda tr, va: (X[tr], X[va])  # noqa: E731

    max_comp = max(component_grid)
    table: dict[tuple[int, float, int], float] = {}
    notes: list[str] = []
    for fold_i, (tr, va) in enumerate(plan):
        X_tr, X_va = prepare(tr, va)
        y_tr, y_va = y[tr], y[va]
        if pca_standardize:
            std = _fpca.Standardizer().fit(X_tr)
            X_tr, X_va = std.transform(X_tr), std.transform(X_va)
        cap = min(max_comp, min(X_tr.shape) - 1, X_tr.shape[1])
        model = _fpca.fit_fpca(X_tr, n_components=cap)
        for n_comp in component_grid:
            if n_comp > cap:
                notes.append(f"fold {fold_i}: {n_comp} components exceed rank {cap}")
                _accumulate_inf(table, hidden_grid, decay_grid, n_comp)
                continue
            try:
                s_tr = _fpca.scores(model, X_tr, n_comp, whiten=True)
                s_va = _fpca.scores(model, X_va, n_comp, whiten=True)
            except FdaregError as exc:
                notes.append(f"fold {fold_i}, {n_comp} components: {exc}")
                _accumulate_inf(table, hidden_grid, decay_grid, n_comp)
                continue
            for hidden in hidden_grid:
                for decay in decay_grid:
                    cell = (hidden, float(decay), n_comp)
                    seed = derive_seed(
                        restart_seed,
                        f"mlp-cv-f{fold_i}-h{hidden}-d{decay:g}-c{n_comp}",
                    )
                    net = train(
                        s_tr, y_tr, hidden, decay,
                        restarts=restarts, seed=seed, max_iter=max_iter,
                    )
                    err = forward(net, s_va) - y_va
                    table[cell] = table.get(cell, 0.0) + float(err @ err) / va.size
    if not table:
        raise TrainingError("empty meta-parameter grid")
    k = plan.k
    best_cell = min(sorted(table), key=lambda c: table[c])
    return MetaSelection(
        best_cell[0],
        best_cell[1],
        best_cell[2],
        table[best_cell] / k,
        {c: v / k for c, v in table.items()},
        tuple(notes),
    )


def _accumulate_inf(table, hidden_grid, decay_grid, n_comp):
    for hidden in hidden_grid:
        for decay in decay_grid:
            table[(hidden, float(decay), n_comp)] = np.inf
