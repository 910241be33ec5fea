"""Functional transforms on coordinate vectors: centering, reduction,
derivatives, and the (semi-)metrics built from them.

Everything here is elementary algebra in the represented function space, so
each transform works directly on coordinates. The per-function mean is an
inner product with the constant one function (whose coordinates are known in
closed form for both basis families), norms come from the scaled beta
coordinates.

Derivative semi-metrics compare derivatives of both arguments, i.e. centers
are stored in derivative space; distances between a function and a center
then reduce to Euclidean distances of transformed beta vectors, which kills
level shifts exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import derivative_basis
from .errors import BasisMismatchError, ConstantFunctionError
from .represent import Representation

#: Supported semi-metric kinds.
_KINDS = ("l2", "deriv")


@dataclass(frozen=True)
class FunctionalScaler:
    """Per-function centering/reduction statistics.

    ``mu`` is the function's domain-average, ``sigma = ||g - mu|| / volume``
    the reduction scale; the reduced function has L2 norm equal to the
    domain volume.
    """

    volume: float
    mu: float
    sigma: float


@dataclass(frozen=True)
class SemiMetricSpec:
    """Distance flavor for functional inputs: plain L2 or derivative-based."""

    kind: str = "l2"
    order: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown semi-metric kind {self.kind!r}")
        if self.kind == "deriv" and self.order < 1:
            raise ValueError("derivative semi-metric needs order >= 1")
        if self.kind == "l2" and self.order != 0:
            raise ValueError("l2 metric takes no derivative order")


def functional_stats(r: Representation) -> FunctionalScaler:
    """Mean and reduction scale of a represented function."""
    a, b = r.basis.domain
    volume = b - a
    beta_one = r.gram.chol @ r.basis.constant_coefficients()
    mu = float(r.beta @ beta_one) / volume
    centered = r.beta - mu * beta_one
    sigma = float(np.linalg.norm(centered)) / volume
    return FunctionalScaler(volume, mu, sigma)


def center(r: Representation) -> Representation:
    """Subtract the function's domain-average."""
    stats = functional_stats(r)
    ones = r.basis.constant_coefficients()
    alpha = r.alpha - stats.mu * ones
    return Representation(r.basis, r.gram, alpha, r.gram.chol @ alpha)


def center_reduce(r: Representation) -> Representation:
    """Center then scale so the result has L2 norm equal to the domain volume.

    Computed entirely on coordinates. Raises
    :class:`ConstantFunctionError` when the centered function is
    numerically zero (no shape left to scale).
    """
    stats = functional_stats(r)
    norm = float(np.linalg.norm(r.beta))
    centered_norm = stats.sigma * stats.volume
    if centered_norm < 1e-12 * max(norm, 1.0):
        raise ConstantFunctionError(
            "function is constant: reduction is undefined"
        )
    ones = r.basis.constant_coefficients()
    alpha = (r.alpha - stats.mu * ones) / stats.sigma
    return Representation(r.basis, r.gram, alpha, r.gram.chol @ alpha)


def derive(r: Representation, s: int) -> Representation:
    """Representation of the s-th derivative on its own basis.

    B-spline coefficients map through the finite-difference recurrence onto
    the order-(nu - s) basis over the same knots; the new basis gets its own
    Gram factor and beta vector.
    """
    if s == 0:
        return r
    new_basis, mapping = derivative_basis(r.basis, s)
    gram = new_basis.gram_factor()
    alpha = mapping @ r.alpha
    return Representation(new_basis, gram, alpha, gram.chol @ alpha)


def distance(r1: Representation, r2: Representation, spec: SemiMetricSpec) -> float:
    """Distance between two represented functions under a (semi-)metric.

    ``l2`` is the L2 distance via beta coordinates; ``deriv(s)`` compares
    s-th derivatives, a semi-metric that ignores level shifts (for s >= 1).
    """
    if r1.basis != r2.basis:
        raise BasisMismatchError("semi-metric arguments live on different bases")
    if spec.kind == "deriv":
        r1, r2 = derive(r1, spec.order), derive(r2, spec.order)
    return float(np.linalg.norm(r1.beta - r2.beta))


def transform_dataset(reps: list[Representation], kind: str) -> list[Representation]:
    """Apply a named per-function transform to a list of representations.

    ``kind`` is one of ``none``, ``center-reduce``, ``deriv1``, ``deriv2``.
    """
    if kind == "none":
        return list(reps)
    if kind == "center-reduce":
        return [center_reduce(r) for r in reps]
    if kind.startswith("deriv"):
        s = int(kind[len("deriv") :])
        return [derive(r, s) for r in reps]
    raise ValueError(f"unknown transform {kind!r}")
