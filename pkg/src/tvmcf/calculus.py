"""Periodic chart grids, spectral differentiation, quadrature and norms.

Charts are flat and isometric, so covariant derivatives are plain partial
derivatives and every derivative here is taken with the FFT.  Fields are
assumed smooth and periodic; a tail-energy check is provided to detect
under-resolution before high-order norms are trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on a 1D or 2D flat chart."""

    shape: tuple
    periods: tuple

    def __post_init__(self):
        if len(self.shape) not in (1, 2) or len(self.shape) != len(self.periods):
            raise ValueError("grid must be 1D or 2D with matching periods")
        if any(n % 2 != 0 or n < 8 for n in self.shape):
            raise ValueError("grid resolutions must be even and at least 8")
        if any(L <= 0 for L in self.periods):
            raise ValueError("chart periods must be positive")

    @property
    def dim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.periods, self.shape))

    @property
    def cell_measure(self):
        return float(np.prod(self.spacing))

    @property
    def num_nodes(self):
        return int(np.prod(self.shape))

    def axes(self):
        """Node coordinates along each axis."""
        return [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]

    def nodes(self):
        """Full coordinate arrays (ij indexing)."""
        if self.dim == 1:
            return self.axes()
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def wavenumbers(self):
        """Angular wavenumbers 2*pi*k/L in FFT order, one array per axis."""
        return [
            2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n) / L
            for n, L in zip(self.shape, self.periods)
        ]


@dataclass(frozen=True)
class ScalarField:
    """Real samples of a smooth periodic function on a chart grid."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    def __add__(self, other):
        other_values = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values + other_values)

    def __sub__(self, other):
        other_values = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values - other_values)

    def __mul__(self, other):
        other_values = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values * other_values)

    __rmul__ = __mul__


def constant_field(grid, value=0.0):
    return ScalarField(grid, np.full(grid.shape, float(value)))


def _symbol(grid, orders):
    sym = np.ones((), dtype=complex)
    for axis, order in enumerate(orders):
        k = grid.wavenumbers()[axis]
        if order > 0:
            s = (1j * k) ** order
            if order % 2 == 1:
                # the Nyquist mode has no well-defined odd derivative
                s[grid.shape[axis] // 2] = 0.0
        else:
            s = np.ones_like(k, dtype=complex)
        shape = [1] * grid.dim
        shape[axis] = grid.shape[axis]
        sym = sym * s.reshape(shape)
    return sym


def deriv_values(values, grid, orders):
    """Spectral partial derivative of raw samples; orders is one int per axis."""
    orders = tuple(int(a) for a in orders)
    if len(orders) != grid.dim:
        raise ValueError("derivative multi-index rank must match grid dimension")
    if any(a < 0 for a in orders):
        raise ValueError("derivative orders must be nonnegative")
    if sum(orders) > 4:
        raise ValueError("derivative order above 4 is not supported")
    if sum(orders) == 0:
        return np.array(values, dtype=float, copy=True)
    spec = np.fft.fftn(values) * _symbol(grid, orders)
    return np.fft.ifftn(spec).real


def spectral_derivative(field, multi_index):
    """FFT derivative with symbol (i k)^a; exact for band-limited fields."""
    return ScalarField(field.grid, deriv_values(field.values, field.grid, multi_index))


def quadrature(field, weight=None):
    """Trapezoidal-on-periodic quadrature of field (* weight) over the chart."""
    values = field.values
    if weight is not None:
        w = weight.values if isinstance(weight, ScalarField) else np.asarray(weight)
        if w.shape != values.shape:
            raise ValueError("quadrature: grid mismatch between field and weight")
        values = values * w
    return float(values.sum() * field.grid.cell_measure)


def _pad_axis(spec, axis, n_old, n_new):
    # Zero-pad (or truncate) one FFT axis, splitting/folding the Nyquist bin
    # so that real fields stay real and trigonometric interpolation is exact.
    if n_new == n_old:
        return spec
    sl = [slice(None)] * spec.ndim
    half = min(n_old, n_new) // 2
    shape = list(spec.shape)
    shape[axis] = n_new
    out = np.zeros(shape, dtype=complex)

    def put(dst_idx, src_idx, scale=1.0):
        d = list(sl)
        s = list(sl)
        d[axis] = dst_idx
        s[axis] = src_idx
        out[tuple(d)] += scale * spec[tuple(s)]

    put(slice(0, half), slice(0, half))
    put(slice(-half + 1, None) if half > 1 else slice(0, 0),
        slice(-half + 1, None) if half > 1 else slice(0, 0))
    if n_new > n_old:
        put(half, half, 0.5)
        put(-half, half, 0.5)
    else:
        put(half, half, 1.0)
        put(half, -half, 1.0)
    return out


def resample_values(values, grid, new_shape):
    """Exact trigonometric resampling of samples onto a finer/coarser grid."""
    new_shape = tuple(int(n) for n in new_shape)
    if new_shape == grid.shape:
        return np.array(values, dtype=float, copy=True)
    spec = np.fft.fftn(values)
    for axis, (n_old, n_new) in enumerate(zip(grid.shape, new_shape)):
        spec = _pad_axis(spec, axis, n_old, n_new)
    scale = np.prod(new_shape) / np.prod(grid.shape)
    return np.fft.ifftn(spec * scale).real


def resample(field, new_shape):
    new_grid = PeriodicGrid(tuple(int(n) for n in new_shape), field.grid.periods)
    return ScalarField(new_grid, resample_values(field.values, field.grid, new_shape))


def padded_shape(shape, factor):
    """Smallest even shape >= factor * shape (3/2 dealias rule by default)."""
    out = []
    for n in shape:
        m = int(np.ceil(n * factor))
        out.append(m + (m % 2))
    return tuple(out)


def eval_trig_series(values, grid, points):
    """Evaluate the trigonometric interpolant at arbitrary 1D chart points.

    Only needed for 1D charts (re-graphing); points is any array of
    coordinates in [0, L).
    """
    if grid.dim != 1:
        raise ValueError("trig-series evaluation is implemented for 1D charts")
    n = grid.shape[0]
    spec = np.fft.fft(values) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    # symmetrize the Nyquist bin for a real interpolant
    spec = spec.copy()
    spec[n // 2] *= 0.5
    k_full = np.concatenate([k, [n / 2.0]])
    spec_full = np.concatenate([spec, [spec[n // 2]]])
    phase = np.exp(2j * np.pi * np.multiply.outer(points, k_full) / grid.periods[0])
    return (phase @ spec_full).real


class FieldBundle:
    """One scalar field per boundary component of a reference surface."""

    def __init__(self, fields):
        self.fields = list(fields)
        if not self.fields:
            raise ValueError("bundle must contain at least one field")

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i):
        return self.fields[i]

    def map(self, fn):
        return FieldBundle([fn(f) for f in self.fields])

    def __add__(self, other):
        if isinstance(other, FieldBundle):
            return FieldBundle([a + b for a, b in zip(self.fields, other.fields)])
        return self.map(lambda f: f + other)

    def __sub__(self, other):
        if isinstance(other, FieldBundle):
            return FieldBundle([a - b for a, b in zip(self.fields, other.fields)])
        return self.map(lambda f: f - other)

    def __mul__(self, scalar):
        return self.map(lambda f: f * scalar)

    __rmul__ = __mul__

    def copy(self):
        return FieldBundle([ScalarField(f.grid, f.values.copy()) for f in self.fields])


def bundle_for_surface(surface, resolution, values=None):
    """Bundle of fields on a surface's charts, zero unless values are given."""
    fields = []
    for comp, periods in enumerate(surface.component_periods()):
        shape = (resolution,) * len(periods)
        grid = PeriodicGrid(shape, tuple(periods))
        v = np.zeros(shape) if values is None else np.asarray(values[comp], dtype=float)
        fields.append(ScalarField(grid, v))
    return FieldBundle(fields)


def _tensor_norm_sq(values, grid, j):
    """Pointwise squared Frobenius norm of the j-th covariant derivative."""
    if j == 0:
        return values ** 2
    out = np.zeros_like(values)
    if grid.dim == 1:
        out += deriv_values(values, grid, (j,)) ** 2
    else:
        for a in range(j + 1):
            d = deriv_values(values, grid, (j - a, a))
            out += comb(j, a) * d * d
    return out


def sobolev_norm(bundle, k, p=2.0):
    """W^{k,p} norm over the bundle with flat-chart covariant derivatives.

    p may be inf, in which case grid maxima of the tensor norms are used.
    """
    if k > 3:
        raise ValueError("Sobolev order above 3 is not supported")
    if np.isinf(p):
        worst = 0.0
        for f in bundle:
            for j in range(k + 1):
                worst = max(worst, float(np.sqrt(_tensor_norm_sq(f.values, f.grid, j)).max()))
        return worst
    if p < 1:
        raise ValueError("p must be at least 1")
    total = 0.0
    for f in bundle:
        for j in range(k + 1):
            dens = np.sqrt(_tensor_norm_sq(f.values, f.grid, j)) ** p
            total += dens.sum() * f.grid.cell_measure
    return float(total ** (1.0 / p))


def lp_norm(bundle, p=2.0):
    return sobolev_norm(bundle, 0, p)


def c1_norm(bundle):
    """Grid C^1 norm: sup |f| + sup |grad f|."""
    sup0 = max(float(np.abs(f.values).max()) for f in bundle)
    sup1 = max(
        float(np.sqrt(_tensor_norm_sq(f.values, f.grid, 1)).max()) for f in bundle
    )
    return sup0 + sup1


def holder_quotient(bundle, alpha=0.25, min_sep_cells=2):
    """Max divided difference of the gradient over node pairs: [grad f]_{C^alpha}.

    Pairs closer than min_sep_cells grid cells are skipped; the chart metric
    distance of each lattice offset is used in the denominator.
    """
    worst = 0.0
    for f in bundle:
        grid = f.grid
        grads = [deriv_values(f.values, grid, tuple(int(i == a) for i in range(grid.dim)))
                 for a in range(grid.dim)]
        h = grid.spacing
        min_sep = min_sep_cells * min(h)
        shifts_per_axis = [np.arange(n) for n in grid.shape]
        if grid.dim == 1:
            offsets = [(int(s),) for s in shifts_per_axis[0]]
        else:
            offsets = [(int(a), int(b)) for a in shifts_per_axis[0] for b in shifts_per_axis[1]]
        L = grid.periods
        for off in offsets:
            d2 = 0.0
            for axis, o in enumerate(off):
                do = min(o * h[axis], L[axis] - o * h[axis])
                d2 += do * do
            dist = np.sqrt(d2)
            if dist < min_sep:
                continue
            diff2 = np.zeros(grid.shape)
            for g in grads:
                dg = g - np.roll(g, shift=off, axis=tuple(range(grid.dim)))
                diff2 += dg * dg
            worst = max(worst, float(np.sqrt(diff2.max())) / dist ** alpha)
    return worst


def h3_tail_fraction(field):
    """Fraction of the H^3 spectral energy in the top-third wavenumber shell."""
    grid = field.grid
    spec = np.fft.fftn(field.values)
    power = np.abs(spec) ** 2
    k2 = np.zeros(grid.shape)
    tail = np.zeros(grid.shape, dtype=bool)
    for axis, k in enumerate(grid.wavenumbers()):
        shape = [1] * grid.dim
        shape[axis] = grid.shape[axis]
        k2 = k2 + (k ** 2).reshape(shape)
        n = grid.shape[axis]
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        tail = tail | ((idx >= (2.0 / 3.0) * (n // 2)).reshape(shape))
    weight = 1.0 + k2 + k2 ** 2 + k2 ** 3
    energy = power * weight
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(energy[tail].sum() / total)


def under_resolved(bundle, tol=1e-6):
    return any(h3_tail_fraction(f) > tol for f in bundle)


def random_band_limited(surface, resolution, band, seed, decay=3.0):
    """Seeded random bundle with Fourier support in 1 <= |k|_inf <= band.

    Coefficient magnitudes fall off like |k|^-decay so that draws are smooth;
    callers rescale to the norm they need.
    """
    rng = np.random.default_rng(seed)
    bundle = bundle_for_surface(surface, resolution)
    fields = []
    for f in bundle:
        grid = f.grid
        values = np.zeros(grid.shape)
        nodes = grid.nodes()
        if grid.dim == 1:
            ks = [(k,) for k in range(1, band + 1)]
        else:
            ks = [
                (k1, k2)
                for k1 in range(-band, band + 1)
                for k2 in range(-band, band + 1)
                if (k1, k2) != (0, 0) and max(abs(k1), abs(k2)) <= band
            ]
        for kvec in ks:
            mag = np.linalg.norm(kvec) ** -decay
            amp = rng.normal() * mag
            phase = rng.uniform(0.0, 2.0 * np.pi)
            arg = sum(
                2.0 * np.pi * k * u / L for k, u, L in zip(kvec, nodes, grid.periods)
            )
            values += amp * np.cos(arg + phase)
        fields.append(ScalarField(grid, values))
    return FieldBundle(fields)
