"""Periodic grid, spectral transforms, and Fourier-multiplier calculus.

Everything downstream lives on a uniform n^3 lattice over the torus
[0, L)^3. Forward transforms are unnormalized, the inverse carries the
1/n^3, and physical-space norms carry the quadrature weight spacing^3 so
that Parseval holds exactly in the discrete setting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as fft

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "make_grid",
    "l2_norm",
    "mean_value",
    "derivative",
    "gradient",
    "divergence",
    "curl",
    "inv_neg_laplacian",
    "leray_project",
    "sobolev_norm",
    "spectral_restrict",
    "apply_dealias",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [0, L)^3 with FFT-ordered wavenumbers.

    Parameters
    ----------
    n : int
        Points per axis; must be even (the 2/3 dealiasing rule and the
        Nyquist handling of odd derivatives assume an even grid) and >= 4.
    box_length : float
        Period L of the torus, identical in all three directions.
    """

    n: int
    box_length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 4, got {self.n}")
        if not (float(self.box_length) > 0.0) or not np.isfinite(self.box_length):
            raise ValueError(f"box_length must be positive and finite, got {self.box_length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

        n, L = self.n, self.box_length
        # FFT-ordered integer modes scaled to physical wavenumbers
        # (2*pi/L) * {0, 1, ..., n/2-1, -n/2, ..., -1}.
        k1 = 2.0 * np.pi * fft.fftfreq(n, d=L / n)
        kx = k1[:, None, None]
        ky = k1[None, :, None]
        kz = k1[None, None, :]
        k_sq = kx**2 + ky**2 + kz**2
        inv_k_sq = np.zeros_like(k_sq)
        np.divide(1.0, k_sq, out=inv_k_sq, where=k_sq > 0.0)

        # First-derivative multipliers i*k with the Nyquist mode zeroed:
        # on an even grid the n/2 mode carries no sign information for odd
        # derivatives, and keeping it makes derivatives of real fields
        # complex.
        k1_odd = k1.copy()
        k1_odd[n // 2] = 0.0
        ik = (
            1j * k1_odd[:, None, None],
            1j * k1_odd[None, :, None],
            1j * k1_odd[None, None, :],
        )
        # |k|^2 built from the Nyquist-zeroed wavenumbers: the Leray
        # projector must see exactly the k-vector the divergence uses, or
        # div(P J) fails to vanish on mixed Nyquist modes.
        k_sq_deriv = ik[0].imag ** 2 + ik[1].imag ** 2 + ik[2].imag ** 2
        inv_k_sq_deriv = np.zeros_like(k_sq_deriv)
        np.divide(1.0, k_sq_deriv, out=inv_k_sq_deriv, where=k_sq_deriv > 0.0)

        # 2/3-rule mask: keep |k| <= (2/3) k_max per axis.
        k_cut = (2.0 / 3.0) * np.abs(k1).max()
        keep = np.abs(k1) <= k_cut + 1e-12 * k_cut
        dealias_mask = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

        # Half-spectrum (rfftn) counterparts for real-field fast paths:
        # last axis holds modes 0..n/2. Same Nyquist conventions as above.
        k1_r = 2.0 * np.pi * fft.rfftfreq(n, d=L / n)
        k1_r_odd = k1_r.copy()
        k1_r_odd[-1] = 0.0
        ik_r = (
            1j * k1_odd[:, None, None],
            1j * k1_odd[None, :, None],
            1j * k1_r_odd[None, None, :],
        )
        k_sq_r = (
            k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1_r[None, None, :] ** 2
        )
        inv_k_sq_r = np.zeros_like(k_sq_r)
        np.divide(1.0, k_sq_r, out=inv_k_sq_r, where=k_sq_r > 0.0)
        k_sq_deriv_r = ik_r[0].imag ** 2 + ik_r[1].imag ** 2 + ik_r[2].imag ** 2
        inv_k_sq_deriv_r = np.zeros_like(k_sq_deriv_r)
        np.divide(
            1.0, k_sq_deriv_r, out=inv_k_sq_deriv_r, where=k_sq_deriv_r > 0.0
        )
        # Parseval weights for the half spectrum: interior kz planes stand
        # in for their conjugates.
        w_r = np.full(n // 2 + 1, 2.0)
        w_r[0] = 1.0
        w_r[-1] = 1.0
        rfft_weight = w_r[None, None, :]
        keep_r = np.abs(k1_r) <= k_cut + 1e-12 * k_cut
        dealias_mask_r = (
            keep[:, None, None] & keep[None, :, None] & keep_r[None, None, :]
        )

        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k1_deriv", k1_odd)
        object.__setattr__(self, "k_sq", k_sq)
        object.__setattr__(self, "inv_k_sq", inv_k_sq)
        object.__setattr__(self, "inv_k_sq_deriv", inv_k_sq_deriv)
        object.__setattr__(self, "ik", ik)
        object.__setattr__(self, "dealias_mask", dealias_mask)
        object.__setattr__(self, "ik_r", ik_r)
        object.__setattr__(self, "k_sq_r", k_sq_r)
        object.__setattr__(self, "inv_k_sq_r", inv_k_sq_r)
        object.__setattr__(self, "inv_k_sq_deriv_r", inv_k_sq_deriv_r)
        object.__setattr__(self, "rfft_weight", rfft_weight)
        object.__setattr__(self, "dealias_mask_r", dealias_mask_r)

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    def axis_coords(self) -> np.ndarray:
        """Grid coordinates along one axis: j * spacing for j = 0..n-1."""
        return self.spacing * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate meshes (X, Y, Z)."""
        x = self.axis_coords()
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.n == other.n and self.box_length == other.box_length

    def __hash__(self) -> int:
        return hash((self.n, self.box_length))


def make_grid(n: int, box_length: float) -> Grid:
    """Construct a periodic grid; raises ValueError on invalid sizes."""
    return Grid(n, box_length)


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.isfinite(values).all():
        raise ValueError(f"{what} contains NaN or Inf")


def _check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


@dataclass
class ScalarField:
    """Real scalar sampled on a Grid, shape (n, n, n), float64."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"scalar field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        _check_finite(self.values, "scalar field")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """Real 3-vector field; components stacked on axis 0, shape (3, n, n, n)."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=np.float64)
        if self.components.shape != (3, *self.grid.shape):
            raise ValueError(
                f"vector field shape {self.components.shape} does not match (3, n, n, n)"
            )
        _check_finite(self.components, "vector field")

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((3, *grid.shape)))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.components.copy())


def _component_stack(field) -> np.ndarray:
    """Components of any field type as an array stack (m, n, n, n)."""
    if hasattr(field, "values"):
        return field.values[None]
    return field.components


def l2_norm(field) -> float:
    """Physical L^2 norm with quadrature weight spacing^3.

    Accepts scalar, vector, or spinor fields; vector/spinor norms sum the
    component norms in quadrature.
    """
    stack = _component_stack(field)
    return float(np.sqrt(field.grid.cell_volume * np.sum(np.abs(stack) ** 2)))


def mean_value(field: ScalarField) -> float:
    """Spatial average (the k = 0 Fourier coefficient over n^3)."""
    return float(np.mean(field.values))


def _spectral_l2(grid: Grid, hat_stack: np.ndarray) -> float:
    """L^2 norm computed from unnormalized forward-FFT coefficients."""
    return float(
        np.sqrt(grid.cell_volume * np.sum(np.abs(hat_stack) ** 2) / grid.n**3)
    )


def _spectral_l2_r(grid: Grid, hat_stack: np.ndarray) -> float:
    """L^2 norm from half-spectrum (rfftn) coefficients of a real field."""
    mag = hat_stack.real**2 + hat_stack.imag**2
    return float(
        np.sqrt(grid.cell_volume * np.sum(grid.rfft_weight * mag) / grid.n**3)
    )


def _leray_hat_r(grid: Grid, hats: np.ndarray) -> np.ndarray:
    """Leray multiplier on half-spectrum coefficients, in place."""
    kdotj = (
        grid.ik_r[0].imag * hats[0]
        + grid.ik_r[1].imag * hats[1]
        + grid.ik_r[2].imag * hats[2]
    )
    kdotj *= grid.inv_k_sq_deriv_r
    for d in range(3):
        hats[d] -= grid.ik_r[d].imag * kdotj
    return hats


def derivative(field: ScalarField, axis: int) -> ScalarField:
    """Spectral partial derivative along axis in {1, 2, 3}.

    The Nyquist mode is zeroed so derivatives of real fields stay real.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2, or 3, got {axis}")
    g = field.grid
    hat = fft.rfftn(field.values)
    hat *= g.ik_r[axis - 1]
    return ScalarField(g, fft.irfftn(hat, s=g.shape))


def gradient(field: ScalarField) -> VectorField:
    """Spectral gradient (d/dx, d/dy, d/dz) of a scalar."""
    g = field.grid
    hat = fft.rfftn(field.values)
    comps = np.empty((3, *g.shape))
    for d in range(3):
        comps[d] = fft.irfftn(hat * g.ik_r[d], s=g.shape)
    return VectorField(g, comps)


def divergence(field: VectorField) -> ScalarField:
    """Spectral divergence of a vector field."""
    g = field.grid
    hats = fft.rfftn(field.components, axes=(1, 2, 3))
    out_hat = g.ik_r[0] * hats[0] + g.ik_r[1] * hats[1] + g.ik_r[2] * hats[2]
    return ScalarField(g, fft.irfftn(out_hat, s=g.shape))


def curl(field: VectorField) -> VectorField:
    """Spectral curl of a vector field."""
    g = field.grid
    hats = fft.rfftn(field.components, axes=(1, 2, 3))
    comps = np.empty((3, *g.shape))
    comps[0] = fft.irfftn(g.ik_r[1] * hats[2] - g.ik_r[2] * hats[1], s=g.shape)
    comps[1] = fft.irfftn(g.ik_r[2] * hats[0] - g.ik_r[0] * hats[2], s=g.shape)
    comps[2] = fft.irfftn(g.ik_r[0] * hats[1] - g.ik_r[1] * hats[0], s=g.shape)
    return VectorField(g, comps)


def inv_neg_laplacian(field):
    """Solve -Δg = f - mean(f) on the torus, returning the mean-zero g.

    The k = 0 mode of the right-hand side is dropped (neutralizing
    background) and the solution's own mean is pinned to zero, which is
    the unique way to invert -Δ on mean-zero periodic data. Applies
    componentwise to vector fields.
    """
    g = field.grid
    if isinstance(field, ScalarField):
        hat = fft.rfftn(field.values)
        hat *= g.inv_k_sq_r
        return ScalarField(g, fft.irfftn(hat, s=g.shape))
    hats = fft.rfftn(field.components, axes=(1, 2, 3))
    hats *= g.inv_k_sq_r[None]
    return VectorField(g, fft.irfftn(hats, axes=(1, 2, 3), s=g.shape))


def _leray_hat(grid: Grid, hats: np.ndarray) -> np.ndarray:
    """Apply the Leray multiplier delta_ij - k_i k_j / |k|^2 in place."""
    kdotj = (
        grid.ik[0].imag * hats[0]
        + grid.ik[1].imag * hats[1]
        + grid.ik[2].imag * hats[2]
    )
    # Note: ik[d].imag is the Nyquist-zeroed wavenumber along axis d.
    kdotj *= grid.inv_k_sq_deriv
    for d in range(3):
        hats[d] = hats[d] - grid.ik[d].imag * kdotj
    return hats


def leray_project(field: VectorField) -> VectorField:
    """Divergence-free (Leray) projection via Fourier multipliers.

    The k = 0 mode passes through unchanged: the projector multiplier is
    the identity there.
    """
    g = field.grid
    hats = fft.rfftn(field.components, axes=(1, 2, 3))
    hats = _leray_hat_r(g, hats)
    return VectorField(g, fft.irfftn(hats, axes=(1, 2, 3), s=g.shape))


def sobolev_norm(field, s: float, homogeneous: bool = False) -> float:
    """Sobolev norm via Fourier multipliers.

    Inhomogeneous: sum over modes of (1 + |k|^2)^s |f_k|^2.
    Homogeneous: |k|^(2s) with the zero mode excluded (it would be 0^s,
    and on the torus the homogeneous seminorm ignores the mean anyway).

    Works for scalar and spinor fields (components summed in quadrature).
    """
    g = field.grid
    stack = _component_stack(field)
    is_complex = np.iscomplexobj(stack)
    k_sq = g.k_sq if is_complex else g.k_sq_r
    if homogeneous:
        weight = np.zeros_like(k_sq)
        np.power(k_sq, s, out=weight, where=k_sq > 0.0)
    else:
        weight = (1.0 + k_sq) ** s
    if not is_complex:
        weight = weight * g.rfft_weight
    total = 0.0
    for comp in stack:
        hat = fft.fftn(comp) if is_complex else fft.rfftn(comp)
        total += float(np.sum(weight * (hat.real**2 + hat.imag**2)))
    return float(np.sqrt(g.cell_volume * total / g.n**3))


def spectral_restrict(field, coarse: Grid):
    """Project a field onto a coarser grid by Fourier truncation.

    Keeps the coarse grid's mode set (including its negative Nyquist row)
    and rescales coefficients for the unnormalized-FFT convention. Grids
    must share the box length and the coarse n must divide into the fine
    resolution's mode range (n_coarse <= n_fine, both even).
    """
    g = field.grid
    if coarse.box_length != g.box_length:
        raise ValueError("grids have different box lengths")
    if coarse.n > g.n:
        raise ValueError("target grid must be coarser")
    if coarse.n == g.n:
        return field
    nf, nc = g.n, coarse.n
    idx = np.r_[0 : nc // 2, nf - nc // 2 : nf]
    stack = _component_stack(field)
    hats = fft.fftn(stack, axes=(1, 2, 3))
    sub = hats[np.ix_(range(stack.shape[0]), idx, idx, idx)] * (nc**3 / nf**3)
    out = fft.ifftn(sub, axes=(1, 2, 3))
    if isinstance(field, ScalarField):
        return ScalarField(coarse, out[0].real)
    if isinstance(field, VectorField):
        return VectorField(coarse, out.real)
    return type(field)(coarse, out)


def apply_dealias(field):
    """Return a copy of the field truncated by the grid's 2/3-rule mask."""
    g = field.grid
    stack = _component_stack(field)
    if np.iscomplexobj(stack):
        hats = fft.fftn(stack, axes=(1, 2, 3))
        hats[:, ~g.dealias_mask] = 0.0
        return type(field)(g, fft.ifftn(hats, axes=(1, 2, 3)))
    hats = fft.rfftn(stack, axes=(1, 2, 3))
    hats[:, ~g.dealias_mask_r] = 0.0
    out = fft.irfftn(hats, axes=(1, 2, 3), s=g.shape)
    if isinstance(field, ScalarField):
        return ScalarField(g, out[0])
    return VectorField(g, out)
