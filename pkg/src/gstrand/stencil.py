"""Centered periodic finite-difference stencils for the strand coordinate."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DerivativeStencil:
    """First s-derivative on a uniform periodic grid, accuracy order 2 or 4.

    Operates along axis 0, so fields shaped (N_s, ...) differentiate
    node-wise for every trailing component.
    """

    order: int
    ds: float

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError(f"stencil order must be 2 or 4, got {self.order}")
        if not (self.ds > 0.0 and np.isfinite(self.ds)):
            raise ValueError(f"grid spacing must be positive and finite, got {self.ds}")

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        if self.order == 2:
            return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * self.ds)
        # pairwise differences first so constant fields cancel exactly
        d1 = np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)
        d2 = np.roll(f, -2, axis=0) - np.roll(f, 2, axis=0)
        return (8.0 * d1 - d2) / (12.0 * self.ds)


def second_derivative(f, ds):
    """Centered second s-derivative (order 2) along axis 0, periodic."""
    f = np.asarray(f, dtype=float)
    return (np.roll(f, -1, axis=0) - 2.0 * f + np.roll(f, 1, axis=0)) / (ds * ds)
