"""Hermite-ladder representation of transverse amplitudes.

Amplitudes live in the canonical frame (interface along x1, unit gradient)
after the constant spinor conjugation by [[1, -1], [1, 1]] (applied here in
its unitary scaling (1/sqrt2)[[1, -1], [1, 1]] so norms are preserved).  In
that frame the leading transport operator is

    L = [[0, adag], [a, 2 D_x1]],   a = x2 + d/dx2,  adag = x2 - d/dx2,

so a two-component amplitude is stored as coefficients over (x1 grid point,
oscillator index n): the ladder maps shift n with weight sqrt(2n+2), D_x1 is
diagonal after an FFT in x1, and per Fourier-Hermite mode L reduces to the
2x2 matrix [[0, s], [s, 2 xi]] with s = sqrt(2n+2).  Its kernel is exactly
the n = 0 band of the first component, which carries the propagating profile;
the inverse on the orthogonal complement is the per-mode matrix inverse.

Multiplication by polynomials (the Taylor coefficients of the wall) stays
exact in the truncated basis apart from top-band leakage, which is monitored
through ``truncation_health``.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import fft as sfft

__all__ = [
    "X1Grid",
    "HermiteAmplitude",
    "hermite_functions",
    "apply_L",
    "invert_L",
    "kernel_project",
    "kernel_amplitude",
    "hermite_synthesize",
    "hermite_analyze",
    "default_x2_grid",
    "poly_rotate_scale",
    "apply_poly_sigma1",
    "trig_interp_matrix",
]

_KERNEL_NORM = np.sqrt(2.0) * np.pi**0.25  # band-0 coefficient of e^{-x2^2/2} [1, -1]


@dataclasses.dataclass(frozen=True)
class X1Grid:
    """Uniform periodic grid on [-half_extent, half_extent) for the x1 direction."""

    n: int
    half_extent: float

    def __post_init__(self):
        if self.n & (self.n - 1):
            raise ValueError("x1 grid size must be a power of two")

    @property
    def dx(self):
        return 2.0 * self.half_extent / self.n

    @property
    def x(self):
        return -self.half_extent + self.dx * np.arange(self.n)

    @property
    def k(self):
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dx)


@dataclasses.dataclass
class HermiteAmplitude:
    """Two-component amplitude, coefficients (2, N1, Nh) in the tilde canonical frame."""

    grid: X1Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != 2 or c.shape[1] != self.grid.n:
            raise ValueError("coefficients must have shape (2, N1, Nh)")
        self.coeffs = c

    @property
    def n_hermite(self):
        return self.coeffs.shape[2]

    @classmethod
    def zeros(cls, grid, n_hermite):
        return cls(grid, np.zeros((2, grid.n, n_hermite), dtype=complex))

    def copy(self):
        return HermiteAmplitude(self.grid, self.coeffs.copy())

    def norm(self):
        """L2 norm of the reconstructed field (Parseval in the (x1, n) coefficients)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) * self.grid.dx))

    def inner(self, other):
        return complex(np.sum(np.conj(self.coeffs) * other.coeffs) * self.grid.dx)

    def truncation_health(self):
        """Fraction of the squared norm in the top two oscillator bands."""
        total = np.sum(np.abs(self.coeffs) ** 2)
        if total == 0:
            return 0.0
        top = np.sum(np.abs(self.coeffs[:, :, -2:]) ** 2)
        return float(top / total)

    def __add__(self, other):
        return HermiteAmplitude(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return HermiteAmplitude(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return HermiteAmplitude(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def hermite_functions(n_max, x):
    """Orthonormal oscillator eigenfunctions phi_0..phi_{n_max-1} at points x, shape (len(x), n_max)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, n_max))
    out[:, 0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(1, n_max - 1):
        out[:, n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[:, n] - np.sqrt(n / (n + 1.0)) * out[:, n - 1]
    return out


# -- ladder / derivative primitives on coefficient arrays --------------------

_WEIGHT_CACHE = {}


def _weights(n_bands):
    """sqrt(2n+2) for n = 0..n_bands-2 (the ladder shift weights)."""
    w = _WEIGHT_CACHE.get(n_bands)
    if w is None:
        w = np.sqrt(2.0 * np.arange(n_bands - 1) + 2.0)
        _WEIGHT_CACHE[n_bands] = w
    return w


def _raise_op(c):
    """adag: band n -> band n+1 with weight sqrt(2n+2); top band falls off the truncation."""
    out = np.empty_like(c)
    out[..., 0] = 0.0
    np.multiply(_weights(c.shape[-1]), c[..., :-1], out=out[..., 1:])
    return out


def _lower_op(c):
    """a: band n+1 -> band n with weight sqrt(2n+2)."""
    out = np.empty_like(c)
    out[..., -1] = 0.0
    np.multiply(_weights(c.shape[-1]), c[..., 1:], out=out[..., :-1])
    return out


def x2_mult(c):
    """(adag + a)/2, fused."""
    nb = c.shape[-1]
    w = _weights(nb)
    out = np.empty_like(c)
    out[..., 0] = 0.5 * w[0] * c[..., 1]
    out[..., 1:-1] = 0.5 * (w[: nb - 2] * c[..., : nb - 2] + w[1:] * c[..., 2:])
    out[..., -1] = 0.5 * w[-1] * c[..., -2]
    return out


def dx2_op(c):
    """(a - adag)/2, fused."""
    nb = c.shape[-1]
    w = _weights(nb)
    out = np.empty_like(c)
    out[..., 0] = 0.5 * w[0] * c[..., 1]
    out[..., 1:-1] = 0.5 * (w[1:] * c[..., 2:] - w[: nb - 2] * c[..., : nb - 2])
    out[..., -1] = -0.5 * w[-1] * c[..., -2]
    return out


def d1_op(c, grid):
    """D_x1 = -i d/dx1 by Fourier multiplication along the x1 axis."""
    ch = sfft.fft(c, axis=-2)
    ch *= grid.k[:, None]
    return sfft.ifft(ch, axis=-2)


def apply_L(a: HermiteAmplitude) -> HermiteAmplitude:
    """The canonical transport operator [[0, adag], [a, 2 D_x1]] on tilde amplitudes."""
    c1, c2 = a.coeffs[0], a.coeffs[1]
    out = np.empty_like(a.coeffs)
    out[0] = _raise_op(c2)
    out[1] = _lower_op(c1) + 2.0 * d1_op(c2, a.grid)
    return HermiteAmplitude(a.grid, out)


def kernel_project(a: HermiteAmplitude, r=1.0):
    """Split off the kernel part (first component, band 0) of an amplitude.

    Returns (f, remainder): ``f`` is the profile on the x1 grid such that the
    kernel part equals the canonical embedding of f at gradient magnitude r,
    and the remainder is orthogonal to the kernel.
    """
    band = a.coeffs[0, :, 0].copy()
    rem = a.copy()
    rem.coeffs[0, :, 0] = 0.0
    f = band / (_KERNEL_NORM * r**0.25)
    return f, rem


def kernel_amplitude(f_values, grid, n_hermite, r=1.0) -> HermiteAmplitude:
    """Embed a profile (sampled on the x1 grid, already in canonical coordinates) into the kernel."""
    out = HermiteAmplitude.zeros(grid, n_hermite)
    out.coeffs[0, :, 0] = _KERNEL_NORM * r**0.25 * np.asarray(f_values)
    return out


def invert_L(a: HermiteAmplitude) -> HermiteAmplitude:
    """Solve L b = a on the kernel's orthogonal complement.

    The kernel part of ``a`` is projected away first.  Per Fourier mode xi and
    band n the operator is [[0, s], [s, 2 xi]] with s = sqrt(2n+2) and
    determinant -s^2, so

        b = (1/(2n+2)) [[-2 xi, s], [s, 0]] a.

    The output satisfies apply_L(b) = a (minus the projected kernel part and
    top-band truncation) and has no kernel component.
    """
    _, src = kernel_project(a)
    ah = sfft.fft(src.coeffs, axis=1)
    out = np.zeros_like(ah)
    nh = a.n_hermite
    xi = a.grid.k
    n = np.arange(nh - 1)
    s = np.sqrt(2.0 * n + 2.0)
    w1 = ah[0, :, 1:]  # pairs with band n of the second component
    w2 = ah[1, :, :-1]
    out[0, :, 1:] = (-2.0 * xi[:, None] * w1 + s * w2) / (s * s)
    out[1, :, :-1] = w1 / s
    # second component's top band has no partner inside the truncation
    return HermiteAmplitude(a.grid, sfft.ifft(out, axis=1))


# -- synthesis / analysis -----------------------------------------------------

_UNTILDE = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)  # inverse of the tilde conjugation
_TILDE = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)


def default_x2_grid(n_hermite, points_per_osc=6, pad=3.0):
    """Uniform x2 grid resolving the highest retained oscillator state."""
    turning = np.sqrt(2.0 * n_hermite + 1.0)
    half = turning + pad
    wavelength = 2.0 * np.pi / turning
    dx = wavelength / points_per_osc
    n = int(np.ceil(2.0 * half / dx))
    return np.linspace(-half, half, n)


def hermite_synthesize(a: HermiteAmplitude, x2):
    """Reconstruct the untilded two-component field on the (x1, x2) tensor grid.

    Raises if the target grid cannot resolve the top retained oscillator state
    (at least 4 points per oscillation near the center).
    """
    x2 = np.asarray(x2, dtype=float)
    dx2 = np.min(np.diff(x2))
    needed = 2.0 * np.pi / np.sqrt(2.0 * a.n_hermite + 1.0) / 4.0
    if dx2 > needed:
        raise ValueError(
            f"x2 grid spacing {dx2:.3g} under-resolves the top Hermite mode (need <= {needed:.3g})"
        )
    phi = hermite_functions(a.n_hermite, x2)  # (N2, Nh)
    tilde = np.einsum("cjn,xn->cjx", a.coeffs, phi)
    return np.einsum("dc,cjx->djx", _UNTILDE, tilde)


def hermite_analyze(fields, grid: X1Grid, x2, n_hermite) -> HermiteAmplitude:
    """Project an untilded field sampled on an (x1, x2) tensor grid onto the amplitude basis."""
    fields = np.asarray(fields, dtype=complex)
    x2 = np.asarray(x2, dtype=float)
    w = np.gradient(x2)  # trapezoid weights for possibly non-uniform spacing
    phi = hermite_functions(n_hermite, x2)
    tilde = np.einsum("dc,cjx->djx", _TILDE, fields)
    coeffs = np.einsum("cjx,xn->cjn", tilde, phi * w[:, None])
    return HermiteAmplitude(grid, coeffs)


# -- polynomial multiplication algebra ---------------------------------------


def poly_rotate_scale(coeff, theta, scale):
    """Substitute x -> R_theta^T x / scale into a bivariate polynomial.

    ``coeff`` is a (d+1, d+1) matrix with coeff[i, j] multiplying x1^i x2^j.
    Used to pull wall Taylor polynomials (lab orientation) into the canonical
    frame, where x1 acts diagonally and x2 through the ladder maps.
    """
    coeff = np.asarray(coeff, dtype=float)
    d = coeff.shape[0] - 1
    c, s = np.cos(theta), np.sin(theta)
    # lab coordinates as linear forms in canonical ones
    l1 = np.zeros((2, 2))
    l1[1, 0], l1[0, 1] = c / scale, -s / scale  # x_lab1 = (c x1 - s x2)/scale
    l2 = np.zeros((2, 2))
    l2[1, 0], l2[0, 1] = s / scale, c / scale  # x_lab2 = (s x1 + c x2)/scale

    def pmul(p, q):
        out = np.zeros((p.shape[0] + q.shape[0] - 1, p.shape[1] + q.shape[1] - 1))
        for i in range(p.shape[0]):
            for j in range(p.shape[1]):
                if p[i, j] != 0.0:
                    out[i : i + q.shape[0], j : j + q.shape[1]] += p[i, j] * q
        return out

    powers1 = [np.array([[1.0]])]
    powers2 = [np.array([[1.0]])]
    for _ in range(d):
        powers1.append(pmul(powers1[-1], l1))
        powers2.append(pmul(powers2[-1], l2))
    out = np.zeros((d + 1, d + 1))
    for i in range(d + 1):
        for j in range(d + 1):
            if coeff[i, j] != 0.0:
                term = coeff[i, j] * pmul(powers1[i], powers2[j])
                out[: term.shape[0], : term.shape[1]] += term[: d + 1, : d + 1]
    return out


def apply_poly(a: HermiteAmplitude, coeff) -> HermiteAmplitude:
    """Multiply by a canonical-frame polynomial: x1 diagonal, x2 via ladders."""
    coeff = np.asarray(coeff, dtype=float)
    x = a.grid.x
    out = np.zeros_like(a.coeffs)
    for j in range(coeff.shape[1]):
        col = np.zeros_like(a.coeffs)
        any_term = False
        for i in range(coeff.shape[0]):
            if coeff[i, j] != 0.0:
                col += coeff[i, j] * (x[:, None] ** i) * a.coeffs
                any_term = True
        if not any_term:
            continue
        for _ in range(j):
            col = x2_mult(col)
        out += col
    return HermiteAmplitude(a.grid, out)


def apply_poly_sigma1(a: HermiteAmplitude, coeff) -> HermiteAmplitude:
    """Multiply by poly * sigma3 in the lab spinor frame = poly * sigma1 on tilde components."""
    p = apply_poly(a, coeff)
    return HermiteAmplitude(a.grid, p.coeffs[::-1].copy())


def trig_interp_matrix(grid: X1Grid, points):
    """Matrix evaluating the trigonometric interpolant of grid samples at scattered points.

    result = M @ fft(values) with M of shape (len(points), N1); spectrally
    accurate for smooth decaying data.  The phase references the grid origin
    at -half_extent, where sample index 0 lives.
    """
    points = np.asarray(points, dtype=float)
    n = grid.n
    # columns are powers of the base phase: build by cumulative product, with
    # negative frequencies as conjugates (exp() per entry would dominate)
    base = np.exp(1j * (points + grid.half_extent) * (np.pi / grid.half_extent))
    M = np.empty((points.size, n), dtype=complex)
    M[:, 0] = 1.0 / n
    half = n // 2
    for m in range(1, half + 1):
        M[:, m] = M[:, m - 1] * base
    np.conj(M[:, half], out=M[:, half])  # the unpaired mode carries frequency -n/2
    M[:, half + 1 :] = np.conj(M[:, half - 1 : 0 : -1])
    return M


def eval_on_points(values, grid: X1Grid, points, chunk=8192):
    """Trigonometric interpolation of 1D grid data at scattered points (chunked).

    Points outside the grid window evaluate to zero: amplitudes handled here
    decay inside the window, so the periodic continuation of the interpolant
    would alias packet values into the far tails.
    """
    vh = sfft.fft(np.asarray(values, dtype=complex), axis=0)
    points = np.asarray(points, dtype=float)
    flat = points.ravel()
    parts = []
    for lo in range(0, flat.size, chunk):
        sel = flat[lo : lo + chunk]
        M = trig_interp_matrix(grid, sel)
        vals = M @ vh
        vals[np.abs(sel) >= grid.half_extent] = 0.0
        parts.append(vals)
    out = np.concatenate(parts, axis=0)
    return out.reshape(points.shape + vh.shape[1:])
