"""Flat-torus arithmetic and closed-form reference surfaces.

The ambient space is the unit torus [0,1)^n with n = 2 or 3.  Reference
surfaces are the constant-mean-curvature boundaries that admit flat
isometric periodic charts: circles and strips in the 2-torus, lamellae
(plane pairs) and axis-aligned cylinders in the 3-torus.  Every geometric
quantity of these surfaces is available in closed form, which is what the
graph-surface and flow machinery builds on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

TAU = 2.0 * np.pi


def wrap(x):
    """Reduce coordinates componentwise mod 1 into [0, 1)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("wrap: non-finite coordinates")
    return np.mod(x, 1.0)


def wrapped_delta(a, b):
    """Signed minimal representative of a - b, componentwise in [-1/2, 1/2)."""
    return np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float) + 0.5, 1.0) - 0.5


def torus_distance(x, y):
    """Distance on the unit torus: min over integer translates of |x - y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("torus_distance: dimension mismatch")
    d = wrapped_delta(x, y)
    return np.sqrt(np.sum(d * d, axis=-1))


def _perp(v):
    # 90-degree rotation such that _perp(tangent) = inside-out normal holds
    # with orientation sign +1 on a circle.
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass(frozen=True)
class ComponentFrame:
    """Closed-form pointwise frame of one boundary component.

    All arrays are evaluated on a common chart-node array and carry the
    ambient dimension in the trailing axis.  ``tangents[i]`` is the unit
    chart direction, ``curvatures[i]`` the principal curvature along it,
    and ``orient`` the sign that makes the (generalized) cross product of
    the tangents reproduce the inside-out normal.
    """

    position: np.ndarray
    normal: np.ndarray
    tangents: tuple
    curvatures: tuple
    orient: float


@dataclass(frozen=True)
class RefGeomSample:
    """Pointwise reference geometry: normal, shape operator, fiber Jacobian."""

    position: np.ndarray
    normal: np.ndarray
    shape_operator: np.ndarray      # chart-frame (n-1)x(n-1) matrix
    mean_curvature: float
    fiber_coeffs: np.ndarray        # J(s) = sum_k fiber_coeffs[k] s^k, coeffs[0] = 1

    @property
    def b_norm_sq(self):
        return float(np.sum(self.shape_operator ** 2))


def fiber_polynomial(curvatures):
    """Coefficients of s -> prod_i (1 + s*kappa_i), ascending order."""
    coeffs = np.array([1.0])
    for k in curvatures:
        coeffs = np.polynomial.polynomial.polymul(coeffs, np.array([1.0, k]))
    return coeffs


class ReferenceSurface:
    """Base class: a strictly stable candidate set with closed-form geometry.

    Subclasses provide per-component chart periods, frames, signed distance
    and the rigid translate.  Instances are immutable.
    """

    n = 0                 # ambient dimension
    kind = "abstract"

    @property
    def num_components(self):
        return len(self.component_periods())

    def component_periods(self):
        raise NotImplementedError

    def component_curvatures(self, comp):
        raise NotImplementedError

    def frame(self, comp, nodes):
        """Evaluate the component frame at chart nodes (list of coord arrays)."""
        raise NotImplementedError

    def signed_distance(self, x):
        """Closed-form signed distance, negative inside."""
        raise NotImplementedError

    def translate(self, p):
        raise NotImplementedError

    def directional_d3(self, comp, nodes, w):
        """Directional derivative of the distance Hessian along ambient field w.

        Returns an (..., n, n) array; identically zero for flat components.
        """
        shape = np.shape(w)[:-1]
        return np.zeros(shape + (self.n, self.n))

    @property
    def volume(self):
        raise NotImplementedError

    @property
    def perimeter(self):
        return float(sum(np.prod(L) for L in self.component_periods()))

    @property
    def mean_curvature(self):
        return float(sum(self.component_curvatures(0)))

    def clearance(self, comp):
        """Normal-fiber clearance before the chart description breaks down."""
        raise NotImplementedError

    @property
    def graph_bound(self):
        """Default C1 bound for valid normal graphs: 0.4 * min clearance."""
        return 0.4 * min(self.clearance(i) for i in range(self.num_components))


class CircleInT2(ReferenceSurface):
    n = 2
    kind = "circle"

    def __init__(self, center=(0.5, 0.5), radius=0.25):
        radius = float(radius)
        if not 0.0 < radius < 0.5:
            raise ValueError("circle radius must lie in (0, 1/2)")
        self.center = wrap(center)
        self.radius = radius

    def component_periods(self):
        return [(TAU * self.radius,)]

    def component_curvatures(self, comp):
        return (1.0 / self.radius,)

    def frame(self, comp, nodes):
        (s,) = nodes
        theta = s / self.radius
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        t = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        pos = wrap(self.center + self.radius * e)
        return ComponentFrame(pos, e, (t,), self.component_curvatures(comp), 1.0)

    def signed_distance(self, x):
        return torus_distance(np.asarray(x)[..., :2], self.center) - self.radius

    def translate(self, p):
        p = np.asarray(p, dtype=float)
        return CircleInT2(wrap(self.center + p[:2]), self.radius)

    def directional_d3(self, comp, nodes, w):
        fr = self.frame(comp, nodes)
        return _curved_d3(fr.normal, fr.tangents[0], w, self.radius)

    @property
    def volume(self):
        return np.pi * self.radius ** 2

    def clearance(self, comp):
        return min(self.radius, 0.5 - self.radius)


def _curved_d3(nu, t, w, radius):
    # d_w D^2(dist) for a circular cross-section of radius R:
    #   -[ <nu,w> t@t + <t,w> (nu@t + t@nu) ] / R^2
    nw = np.sum(nu * w, axis=-1)[..., None, None]
    tw = np.sum(t * w, axis=-1)[..., None, None]
    tt = t[..., :, None] * t[..., None, :]
    nt = nu[..., :, None] * t[..., None, :]
    return -(nw * tt + tw * (nt + np.swapaxes(nt, -1, -2))) / radius ** 2


class _SlabSurface(ReferenceSurface):
    """Shared implementation for strips (T^2) and lamellae (T^3).

    The set occupies heights (c1, c1 + gap) mod 1 in the last coordinate;
    component 0 is the lower plane (normal -e_last), component 1 the upper.
    """

    def __init__(self, c1, c2):
        self.c1 = float(wrap(c1))
        self.c2 = float(wrap(c2))
        gap = (self.c2 - self.c1) % 1.0
        if not 0.0 < gap < 1.0:
            raise ValueError("slab heights must differ mod 1")
        self.gap = gap

    def component_periods(self):
        return [(1.0,) * (self.n - 1)] * 2

    def component_curvatures(self, comp):
        return (0.0,) * (self.n - 1)

    def _height(self, comp):
        return self.c1 if comp == 0 else self.c2

    def frame(self, comp, nodes):
        nodes = np.broadcast_arrays(*nodes)
        shape = nodes[0].shape
        pos = np.zeros(shape + (self.n,))
        for i, u in enumerate(nodes):
            pos[..., i] = u
        pos[..., -1] = self._height(comp)
        sign = -1.0 if comp == 0 else 1.0
        nu = np.zeros(shape + (self.n,))
        nu[..., -1] = sign
        tangents = []
        for i in range(self.n - 1):
            t = np.zeros(shape + (self.n,))
            t[..., i] = 1.0
            tangents.append(t)
        # natural tangents e_i; perp(e1) = -e2 in T^2 while e1 x e2 = +e3 in T^3,
        # so the orientation sign differs between the two slab kinds
        orient = -sign if self.n == 2 else sign
        return ComponentFrame(wrap(pos), nu, tuple(tangents), self.component_curvatures(comp), orient)

    def signed_distance(self, x):
        h = np.asarray(x, dtype=float)[..., -1]
        inside = np.mod(h - self.c1, 1.0) < self.gap
        d = np.minimum(np.abs(wrapped_delta(h, self.c1)), np.abs(wrapped_delta(h, self.c2)))
        return np.where(inside, -d, d)

    def translate(self, p):
        p = np.asarray(p, dtype=float)
        return type(self)(self.c1 + p[-1], self.c2 + p[-1])

    @property
    def volume(self):
        return self.gap

    def clearance(self, comp):
        return min(self.gap, 1.0 - self.gap) / 2.0


class StripInT2(_SlabSurface):
    n = 2
    kind = "strip"


class LamellaInT3(_SlabSurface):
    n = 3
    kind = "lamella"


class CylinderInT3(ReferenceSurface):
    """Solid cylinder along the third axis with circular cross-section."""

    n = 3
    kind = "cylinder"

    def __init__(self, center=(0.5, 0.5), radius=0.25):
        radius = float(radius)
        if not 0.0 < radius < 0.5:
            raise ValueError("cylinder radius must lie in (0, 1/2)")
        self.center = wrap(np.asarray(center, dtype=float)[:2])
        self.radius = radius

    def component_periods(self):
        return [(TAU * self.radius, 1.0)]

    def component_curvatures(self, comp):
        return (1.0 / self.radius, 0.0)

    def frame(self, comp, nodes):
        s, z = np.broadcast_arrays(*nodes)
        theta = s / self.radius
        cos, sin = np.cos(theta), np.sin(theta)
        zeros = np.zeros_like(cos)
        nu = np.stack([cos, sin, zeros], axis=-1)
        t1 = np.stack([-sin, cos, zeros], axis=-1)
        t2 = np.stack([zeros, zeros, np.ones_like(cos)], axis=-1)
        pos = np.stack(
            [self.center[0] + self.radius * cos, self.center[1] + self.radius * sin, z],
            axis=-1,
        )
        return ComponentFrame(wrap(pos), nu, (t1, t2), self.component_curvatures(comp), 1.0)

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        return torus_distance(x[..., :2], self.center) - self.radius

    def translate(self, p):
        p = np.asarray(p, dtype=float)
        return CylinderInT3(wrap(self.center + p[:2]), self.radius)

    def directional_d3(self, comp, nodes, w):
        fr = self.frame(comp, nodes)
        return _curved_d3(fr.normal, fr.tangents[0], w, self.radius)

    @property
    def volume(self):
        return np.pi * self.radius ** 2

    def clearance(self, comp):
        return min(self.radius, 0.5 - self.radius)


def reference_geometry(surface, comp, chart_node):
    """Exact closed-form geometry sample at one chart node."""
    if not 0 <= comp < surface.num_components:
        raise IndexError(f"component index {comp} out of range")
    node = np.atleast_1d(np.asarray(chart_node, dtype=float))
    periods = surface.component_periods()[comp]
    if node.shape != (len(periods),):
        raise ValueError("chart node dimensionality mismatch")
    if np.any(node < 0.0) or np.any(node >= np.asarray(periods)):
        raise ValueError("chart node outside the component's chart domain")
    fr = surface.frame(comp, list(node))
    kappa = np.asarray(fr.curvatures)
    return RefGeomSample(
        position=fr.position,
        normal=fr.normal,
        shape_operator=np.diag(kappa),
        mean_curvature=float(kappa.sum()),
        fiber_coeffs=fiber_polynomial(fr.curvatures),
    )


def translate_surface(surface, p):
    """Rigid translate of a reference surface, parameters wrapped mod 1."""
    return surface.translate(p)


def signed_distance(surface, x):
    return surface.signed_distance(x)


def make_surface(kind, **params):
    """Construct a reference surface from its JSON-config description."""
    kinds = {
        "circle": CircleInT2,
        "strip": StripInT2,
        "lamella": LamellaInT3,
        "cylinder": CylinderInT3,
    }
    if kind not in kinds:
        raise ValueError(f"unknown surface kind {kind!r}")
    return kinds[kind](**params)
