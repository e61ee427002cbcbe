"""Two-spinor fields and the Pauli matrix algebra.

A spinor field holds two complex components on a shared Grid. The sigma
matrices act pointwise; contractions against vector fields are expanded
by hand (the 2x2 structure is cheaper written out than einsum'd).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, VectorField, _check_finite, _check_same_grid

__all__ = [
    "SIGMA",
    "SpinorField",
    "sigma_dot",
    "inner_product",
    "charge_density",
    "spin_density",
]

# Pauli matrices sigma_1, sigma_2, sigma_3 in the standard basis.
SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
)


@dataclass
class SpinorField:
    """Complex 2-spinor on a Grid; components stacked as (2, n, n, n)."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=np.complex128)
        if self.components.shape != (2, *self.grid.shape):
            raise ValueError(
                f"spinor field shape {self.components.shape} does not match (2, n, n, n)"
            )
        _check_finite(self.components, "spinor field")

    @property
    def u1(self) -> np.ndarray:
        return self.components[0]

    @property
    def u2(self) -> np.ndarray:
        return self.components[1]

    @classmethod
    def zeros(cls, grid: Grid) -> "SpinorField":
        return cls(grid, np.zeros((2, *grid.shape), dtype=np.complex128))

    @classmethod
    def from_components(cls, grid: Grid, u1, u2) -> "SpinorField":
        comps = np.empty((2, *grid.shape), dtype=np.complex128)
        comps[0] = u1
        comps[1] = u2
        return cls(grid, comps)

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.components.copy())


def _vector_parts(v):
    """Unpack a VectorField or a length-3 sequence into three arrays."""
    if isinstance(v, VectorField):
        return v.components[0], v.components[1], v.components[2]
    v1, v2, v3 = v
    return np.asarray(v1), np.asarray(v2), np.asarray(v3)


def sigma_dot(v, u: SpinorField) -> SpinorField:
    """Pointwise contraction (sigma . v) u for a real or complex 3-vector.

    v may be a VectorField, a sequence of three scalars, or a sequence of
    three arrays broadcastable to the grid shape. Expanded form:

        (sigma . v) = [[v3, v1 - i v2], [v1 + i v2, -v3]].
    """
    if isinstance(v, VectorField):
        _check_same_grid(v, u)
    v1, v2, v3 = _vector_parts(v)
    w1 = v3 * u.components[0] + (v1 - 1j * v2) * u.components[1]
    w2 = (v1 + 1j * v2) * u.components[0] - v3 * u.components[1]
    return SpinorField.from_components(u.grid, w1, w2)


def inner_product(v: SpinorField, w: SpinorField) -> complex:
    """L^2 spinor inner product (v, w), antilinear in the first slot."""
    _check_same_grid(v, w)
    acc = np.vdot(v.components, w.components)  # sum conj(v) * w
    return complex(v.grid.cell_volume * acc)


def charge_density(u: SpinorField) -> ScalarField:
    """Pointwise density |u1|^2 + |u2|^2 (nonnegative by construction)."""
    c = u.components
    rho = c.real**2 + c.imag**2
    return ScalarField(u.grid, rho[0] + rho[1])


def spin_density(u: SpinorField) -> VectorField:
    """Pointwise spin vector S_k = <u, sigma_k u>_{C^2}.

    Hermiticity of sigma makes each component real; the expanded formulas
    below are manifestly real so no imaginary part is ever formed:

        S_1 = 2 Re(conj(u1) u2),  S_2 = 2 Im(conj(u1) u2),
        S_3 = |u1|^2 - |u2|^2.
    """
    u1, u2 = u.components[0], u.components[1]
    cross = np.conj(u1) * u2
    comps = np.empty((3, *u.grid.shape))
    comps[0] = 2.0 * cross.real
    comps[1] = 2.0 * cross.imag
    comps[2] = (u1.real**2 + u1.imag**2) - (u2.real**2 + u2.imag**2)
    return VectorField(u.grid, comps)
