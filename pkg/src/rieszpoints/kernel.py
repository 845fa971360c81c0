"""Riesz kernel family k(x) = |x|**(alpha - dim) and its gradient.

This is the single numeric primitive the rest of the toolkit consumes.
Evaluation goes through the module functions below so an alternative
radial kernel could be slotted in later; only the power kernel ships.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError


@dataclass(frozen=True)
class KernelSpec:
    """Riesz kernel parameters.

    ``alpha = 2`` is the Newtonian case required by the discrepancy
    machinery; generic energies are well defined for any 0 < alpha < dim.
    The planar logarithmic kernel (dim = 2) is a different object and is
    rejected at construction.
    """

    alpha: float
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError(f"dim must be an integer >= 3, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not 0.0 < self.alpha < self.dim:
            raise ValueError(
                f"alpha must satisfy 0 < alpha < dim, got alpha={self.alpha}, dim={self.dim}"
            )

    @property
    def exponent(self) -> float:
        """The radial power alpha - dim (negative)."""
        return self.alpha - self.dim


def newtonian_flag(spec: KernelSpec) -> bool:
    """True iff the kernel is Newtonian (alpha = 2)."""
    return spec.alpha == 2.0


def require_newtonian(spec: KernelSpec, what: str) -> None:
    if not newtonian_flag(spec):
        raise ValueError(f"{what} requires the Newtonian kernel (alpha = 2), got alpha={spec.alpha}")


def kernel_from_distance(spec: KernelSpec, r):
    """Kernel value at separation r > 0. Vectorized; caller excludes zeros."""
    return np.asarray(r, dtype=float) ** spec.exponent


def kernel_value(spec: KernelSpec, displacement):
    """Evaluate |displacement|**(alpha - dim).

    Accepts one vector of shape (dim,) or a batch (..., dim). Any zero
    displacement raises SingularityError: energy sums must exclude
    self-pairs structurally rather than propagate infinities.
    """
    disp = np.asarray(displacement, dtype=float)
    if disp.shape[-1] != spec.dim:
        raise ValueError(f"displacement has dimension {disp.shape[-1]}, kernel has {spec.dim}")
    r = np.linalg.norm(disp, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("kernel evaluated at zero displacement")
    out = r ** spec.exponent
    return float(out) if out.ndim == 0 else out


def kernel_gradient(spec: KernelSpec, displacement):
    """Gradient of kernel_value with respect to the displacement.

    grad |x|**e = e * |x|**(e-2) * x with e = alpha - dim; antisymmetric
    under negation of the displacement.
    """
    disp = np.asarray(displacement, dtype=float)
    if disp.shape[-1] != spec.dim:
        raise ValueError(f"displacement has dimension {disp.shape[-1]}, kernel has {spec.dim}")
    r = np.linalg.norm(disp, axis=-1, keepdims=True)
    if np.any(r == 0.0):
        raise SingularityError("kernel gradient at zero displacement")
    return spec.exponent * r ** (spec.exponent - 2.0) * disp
