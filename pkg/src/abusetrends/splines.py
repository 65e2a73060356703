"""B-spline bases on the unit interval.

Two constructions are used: a clamped basis (endpoint-interpolating, used
for the model's coefficient functions) and a uniform basis on equispaced
knots extending past [0, 1] (used by the penalized smoother, where the
second-difference coefficient penalty must vanish exactly on lines).
Both are partitions of unity on [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

__all__ = ["BSplineBasis", "basis_eval"]


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    degree: int
    knots: np.ndarray
    n_basis: int

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        if self.n_basis != len(knots) - self.degree - 1:
            raise ValueError("knot vector inconsistent with basis count")

    @classmethod
    def clamped(cls, n_basis: int, degree: int = 3) -> "BSplineBasis":
        """Clamped basis on [0, 1] with equispaced interior knots.

        Requires ``n_basis >= degree + 1``.  At u=0 only the first basis
        function is nonzero, at u=1 only the last.
        """
        if degree < 0:
            raise ValueError("degree must be non-negative")
        if n_basis < degree + 1:
            raise ValueError(
                f"n_basis must be at least degree + 1 ({degree + 1}), got {n_basis}"
            )
        n_interior = n_basis - degree - 1
        interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
        knots = np.concatenate(
            [np.zeros(degree + 1), interior, np.ones(degree + 1)]
        )
        return cls(degree=degree, knots=knots, n_basis=n_basis)

    @classmethod
    def uniform(cls, n_segments: int, degree: int = 3) -> "BSplineBasis":
        """Uniform basis whose knots extend ``degree`` steps beyond [0, 1]."""
        if n_segments < 1:
            raise ValueError("n_segments must be positive")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        # integer-ratio knots make the domain ends land exactly on 0 and 1
        knots = np.arange(-degree, n_segments + degree + 1, dtype=np.float64) / n_segments
        return cls(degree=degree, knots=knots, n_basis=n_segments + degree)

    def design_matrix(self, u) -> np.ndarray:
        """Dense (len(u), n_basis) matrix of basis values at points ``u`` in [0, 1]."""
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if np.any((u < 0.0) | (u > 1.0)):
            raise ValueError("evaluation points must lie in [0, 1]")
        return BSpline.design_matrix(u, self.knots, self.degree).toarray()


def basis_eval(basis: BSplineBasis, u: float) -> np.ndarray:
    """Evaluate all basis functions at a single point.

    Returns a non-negative vector summing to one.  Raises ``ValueError``
    for u outside [0, 1].
    """
    return basis.design_matrix([float(u)])[0]
