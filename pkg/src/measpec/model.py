"""Pair potentials on a finite alphabet.

A model is an ``m x m`` matrix ``phi[i, j]`` giving the weight of the pair
``(x_k, x_{2k}) = (i, j)``. It is either given directly or built as the outer
product of two factor functions ``f1, f2`` on the alphabet.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidModelError

__all__ = [
    "PotentialMatrix",
    "potential_from_factors",
    "potential_from_matrix",
    "load_model",
    "model_from_dict",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PotentialMatrix:
    """Validated pair potential.

    Attributes
    ----------
    m : int
        Alphabet size, at least 2.
    phi : ndarray, shape (m, m)
        ``phi[i, j]`` is the potential of the pair ``(i, j)``. Read-only.
    alpha_min, alpha_max : float
        Smallest and largest entries of ``phi``.
    factors : tuple of ndarray or None
        ``(f1, f2)`` when the potential was built from factor functions.
    """

    m: int
    phi: np.ndarray
    alpha_min: float
    alpha_max: float
    factors: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None)

    @property
    def is_constant(self) -> bool:
        return not (self.alpha_max - self.alpha_min > 0.0)

    @property
    def spread(self) -> float:
        return self.alpha_max - self.alpha_min

    def extreme_tolerance(self) -> float:
        """Tolerance under which an entry counts as attaining an extreme."""
        return 1e-12 * max(1.0, abs(self.alpha_min), abs(self.alpha_max))

    def shifted(self, c: float) -> "PotentialMatrix":
        """Return the model for ``phi + c`` (factors are dropped)."""
        return potential_from_matrix(self.phi + c)

    def to_dict(self) -> dict:
        if self.factors is not None:
            f1, f2 = self.factors
            return {"m": self.m, "f1": f1.tolist(), "f2": f2.tolist()}
        return {"m": self.m, "phi": self.phi.tolist()}


def _as_vector(v, name: str) -> np.ndarray:
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(f"{name} is not a numeric vector") from exc
    if a.ndim != 1:
        raise InvalidModelError(f"{name} must be one-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidModelError(f"{name} has non-finite entries")
    return a


def potential_from_factors(f1, f2) -> PotentialMatrix:
    """Build ``phi[i, j] = f1[i] * f2[j]``.

    >>> potential_from_factors([-1, 1], [-1, 1]).phi.tolist()
    [[1.0, -1.0], [-1.0, 1.0]]
    """
    a = _as_vector(f1, "f1")
    b = _as_vector(f2, "f2")
    if a.shape != b.shape:
        raise InvalidModelError(f"f1 has length {a.size} but f2 has length {b.size}")
    if a.size < 2:
        raise InvalidModelError(f"alphabet size must be at least 2, got {a.size}")
    phi = np.outer(a, b)
    return PotentialMatrix(
        m=a.size,
        phi=_frozen(phi),
        alpha_min=float(phi.min()),
        alpha_max=float(phi.max()),
        factors=(_frozen(a), _frozen(b)),
    )


def potential_from_matrix(phi) -> PotentialMatrix:
    """Build a model from a full ``m x m`` pair potential."""
    try:
        a = np.array(phi, dtype=float)
    except (TypeError, ValueError) as exc:
        # ragged nested lists end up here
        raise InvalidModelError("phi is not a rectangular numeric matrix") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidModelError(f"phi must be square, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InvalidModelError(f"alphabet size must be at least 2, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise InvalidModelError("phi has non-finite entries")
    return PotentialMatrix(
        m=a.shape[0],
        phi=_frozen(a),
        alpha_min=float(a.min()),
        alpha_max=float(a.max()),
    )


def model_from_dict(data: dict) -> PotentialMatrix:
    """Parse the JSON model schema: ``{"m", "f1", "f2"}`` or ``{"m", "phi"}``."""
    if not isinstance(data, dict):
        raise InvalidModelError("model must be a JSON object")
    has_factors = "f1" in data or "f2" in data
    has_phi = "phi" in data
    if has_factors == has_phi:
        raise InvalidModelError("model must give exactly one of (f1, f2) or phi")
    if "m" not in data:
        raise InvalidModelError("model is missing the alphabet size 'm'")
    m = data["m"]
    if isinstance(m, bool) or not isinstance(m, int):
        raise InvalidModelError(f"'m' must be an integer, got {m!r}")
    if has_factors:
        if "f1" not in data or "f2" not in data:
            raise InvalidModelError("factor form needs both f1 and f2")
        model = potential_from_factors(data["f1"], data["f2"])
    else:
        model = potential_from_matrix(data["phi"])
    if model.m != m:
        raise InvalidModelError(f"'m' is {m} but the potential has alphabet size {model.m}")
    return model


def load_model(path) -> PotentialMatrix:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InvalidModelError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_dict(data)
