"""Geometry of normal graphs over reference surfaces.

A surface is described by a bundle psi of chart fields through
Phi(x) = x + psi(x) nu(x).  Two independent curvature paths are kept side
by side: a parametrization path (tangents and second derivatives of Phi)
and a signed-distance path (Hessian of the level-set function of the
graph).  Their disagreement is a hard error signal, not a tolerance to be
tuned away.

All nonlinear pointwise algebra runs on a 3/2 zero-padded grid and results
are truncated back to the state grid where needed, which suppresses
quadratic aliasing of the rational curvature expressions.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .calculus import (
    FieldBundle,
    PeriodicGrid,
    ScalarField,
    deriv_values,
    eval_trig_series,
    h3_tail_fraction,
    padded_shape,
    resample_values,
    c1_norm,
)
from .torus import fiber_polynomial, wrap, _perp

DEALIAS = 1.5
ALIGN_MIN = 0.5


class GraphValidityError(RuntimeError):
    """The field has left the regime where the normal graph is defined."""


class UnderResolvedError(RuntimeError):
    """Spectral tail check failed; results would not be trustworthy."""


class RegraphError(RuntimeError):
    """Re-graphing over a translated reference failed."""


class ComponentGeometry:
    """Pointwise geometry of one graph component on its evaluation grid."""

    def __init__(self, grid, frame, psi, dpsi, position, tangents, metric,
                 metric_inv, area_element, normal, alignment, second_form,
                 mean_curvature, b_norm_sq):
        self.grid = grid
        self.frame = frame
        self.psi = psi
        self.dpsi = dpsi
        self.position = position
        self.tangents = tangents
        self.metric = metric
        self.metric_inv = metric_inv
        self.area_element = area_element
        self.normal = normal
        self.alignment = alignment
        self.second_form = second_form
        self.mean_curvature = mean_curvature
        self.b_norm_sq = b_norm_sq

    @property
    def dim(self):
        return self.grid.dim

    def integrate(self, values=None):
        """Integral over this component with the surface measure."""
        v = self.area_element if values is None else values * self.area_element
        return float(v.sum() * self.grid.cell_measure)

    def grad_components(self, values):
        return [deriv_values(values, self.grid, _unit(self.dim, a)) for a in range(self.dim)]

    def grad_norm_sq(self, values, grads=None):
        """|grad_tau f|^2 = g^{ij} d_i f d_j f."""
        df = self.grad_components(values) if grads is None else grads
        out = np.zeros(self.grid.shape)
        for i in range(self.dim):
            for j in range(self.dim):
                out += self.metric_inv[..., i, j] * df[i] * df[j]
        return out

    def grad_ambient(self, values, grads=None):
        """Tangential gradient as an ambient vector field."""
        df = self.grad_components(values) if grads is None else grads
        out = np.zeros(self.grid.shape + (self.position.shape[-1],))
        for i in range(self.dim):
            coeff = np.zeros(self.grid.shape)
            for j in range(self.dim):
                coeff += self.metric_inv[..., i, j] * df[j]
            out += coeff[..., None] * self.tangents[i]
        return out

    def laplace_beltrami(self, values, grads=None):
        """(1/sqrt g) d_i (sqrt g g^{ij} d_j f), spectral outer derivative."""
        df = self.grad_components(values) if grads is None else grads
        out = np.zeros(self.grid.shape)
        for i in range(self.dim):
            flux = np.zeros(self.grid.shape)
            for j in range(self.dim):
                flux += self.metric_inv[..., i, j] * df[j]
            flux *= self.area_element
            out += deriv_values(flux, self.grid, _unit(self.dim, i))
        return out / self.area_element

    def shape_quadratic(self, vec_a, vec_b):
        """<a, B b> for chart gradient coefficient vectors a, b (raised)."""
        out = np.zeros(self.grid.shape)
        for i in range(self.dim):
            for j in range(self.dim):
                out += self.second_form[..., i, j] * vec_a[i] * vec_b[j]
        return out


class SurfaceGeometry:
    """Full geometry of a graph surface, one ComponentGeometry per component."""

    def __init__(self, surface, components, path, state_shapes):
        self.surface = surface
        self.components = components
        self.path = path
        self.state_shapes = state_shapes

    def __iter__(self):
        return iter(self.components)

    def integral(self, values_list=None):
        if values_list is None:
            return sum(c.integrate() for c in self.components)
        return sum(c.integrate(v) for c, v in zip(self.components, values_list))

    @property
    def perimeter(self):
        return self.integral()

    def average(self, values_list):
        return self.integral(values_list) / self.perimeter

    def lp_norm(self, values_list, p=2.0):
        if np.isinf(p):
            return max(float(np.abs(v).max()) for v in values_list)
        total = sum(c.integrate(np.abs(v) ** p) for c, v in zip(self.components, values_list))
        return float(total ** (1.0 / p))

    def lift(self, bundle):
        """Resample a state-grid bundle onto the evaluation grids."""
        out = []
        for comp, f in zip(self.components, bundle):
            out.append(resample_values(f.values, f.grid, comp.grid.shape))
        return out

    def restrict(self, values_list):
        """Truncate evaluation-grid fields back to the state grids."""
        out = []
        for comp, values, shape in zip(self.components, values_list, self.state_shapes):
            out.append(resample_values(values, comp.grid, shape))
        return out

    @property
    def min_alignment(self):
        return min(float(c.alignment.min()) for c in self.components)


def _unit(dim, axis):
    return tuple(int(i == axis) for i in range(dim))


def _metric_inverse(g, dim):
    if dim == 1:
        det = g[..., 0, 0]
        inv = 1.0 / det
        return det, inv[..., None, None]
    a, b, c = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    det = a * c - b * b
    inv = np.empty_like(g)
    inv[..., 0, 0] = c / det
    inv[..., 1, 1] = a / det
    inv[..., 0, 1] = -b / det
    inv[..., 1, 0] = -b / det
    return det, inv


def _normal_from_tangents(tangents, frame):
    if len(tangents) == 1:
        raw = frame.orient * _perp(tangents[0])
    else:
        raw = frame.orient * np.cross(tangents[0], tangents[1], axis=-1)
    norm = np.linalg.norm(raw, axis=-1)
    return raw / norm[..., None], norm


def _check_fiber_bound(surface, comp, psi):
    hard = surface.clearance(comp)
    peak = float(np.abs(psi).max())
    if peak >= hard:
        raise GraphValidityError(
            f"component {comp}: |psi| reaches {peak:.3g}, fiber clearance {hard:.3g}"
        )


def _prepared_fields(surface, bundle, dealias, check_resolution):
    """Per component: evaluation grid, padded psi and its chart derivatives."""
    if len(bundle) != surface.num_components:
        raise ValueError("bundle component count does not match the surface")
    prep = []
    for comp, f in enumerate(bundle):
        if check_resolution and h3_tail_fraction(f) > 1e-6:
            raise UnderResolvedError(f"component {comp}: spectral tail above 1e-6")
        shape = padded_shape(f.grid.shape, dealias)
        grid = PeriodicGrid(shape, f.grid.periods)
        psi = resample_values(f.values, f.grid, shape)
        _check_fiber_bound(surface, comp, psi)
        dim = grid.dim
        dpsi = [deriv_values(psi, grid, _unit(dim, a)) for a in range(dim)]
        d2psi = {}
        for i in range(dim):
            for j in range(i, dim):
                orders = tuple(int(a == i) + int(a == j) for a in range(dim))
                d2psi[(i, j)] = deriv_values(psi, grid, orders)
        prep.append((grid, psi, dpsi, d2psi))
    return prep


def _assemble_component(surface, comp, grid, psi, dW, d2W, amin):
    """Common tail of both paths: tangents, metric, normal, area element."""
    frame = surface.frame(comp, grid.nodes())
    dim = grid.dim
    tangents = [frame.tangents[i] + dW[i] for i in range(dim)]
    g = np.empty(grid.shape + (dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            g[..., i, j] = np.sum(tangents[i] * tangents[j], axis=-1)
            g[..., j, i] = g[..., i, j]
    det, ginv = _metric_inverse(g, dim)
    if np.any(det <= 0):
        raise GraphValidityError(f"component {comp}: degenerate metric")
    area = np.sqrt(det)
    normal, _ = _normal_from_tangents(tangents, frame)
    align = np.sum(frame.normal * normal, axis=-1)
    if float(align.min()) <= amin:
        raise GraphValidityError(
            f"component {comp}: normal alignment {float(align.min()):.3f} <= {amin}"
        )
    # d2Phi = d2(chart position) + d2W, with d2(position) = -kappa_i delta_ij nu
    kappa = frame.curvatures
    second = np.empty(grid.shape + (dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            d2Phi = d2W[(i, j)].copy()
            if i == j:
                d2Phi -= kappa[i] * frame.normal
            second[..., i, j] = -np.sum(d2Phi * normal, axis=-1)
            second[..., j, i] = second[..., i, j]
    return frame, tangents, g, ginv, area, normal, align, second


def _mixed_invariants(second, ginv, dim):
    """Mean curvature g^{ij} b_ij and |B|^2 = tr((g^-1 b)^2)."""
    H = np.zeros(second.shape[:-2])
    for i in range(dim):
        for j in range(dim):
            H += ginv[..., i, j] * second[..., i, j]
    mixed = np.einsum("...ij,...jk->...ik", ginv, second)
    b2 = np.einsum("...ij,...ji->...", mixed, mixed)
    return H, b2


def build_geometry_param(surface, bundle, dealias=DEALIAS, amin=ALIGN_MIN,
                         check_resolution=True):
    """Curvature from the parametrization Phi = x + psi nu.

    Tangent and second-derivative fields of Phi are assembled from spectral
    derivatives of psi and the closed-form frame derivatives of the
    reference surface; the second fundamental form is the projection of
    d2Phi on the unit normal.
    """
    prep = _prepared_fields(surface, bundle, dealias, check_resolution)
    comps = []
    for comp, (grid, psi, dpsi, d2psi) in enumerate(prep):
        frame = surface.frame(comp, grid.nodes())
        kappa = frame.curvatures
        dim = grid.dim
        dW = [
            dpsi[i][..., None] * frame.normal
            + (psi * kappa[i])[..., None] * frame.tangents[i]
            for i in range(dim)
        ]
        d2W = {}
        for i in range(dim):
            for j in range(i, dim):
                t = d2psi[(i, j)][..., None] * frame.normal
                t = t + (dpsi[i] * kappa[j])[..., None] * frame.tangents[j]
                t = t + (dpsi[j] * kappa[i])[..., None] * frame.tangents[i]
                if i == j:
                    t = t - (psi * kappa[i] ** 2)[..., None] * frame.normal
                d2W[(i, j)] = t
        frame, tangents, g, ginv, area, normal, align, second = _assemble_component(
            surface, comp, grid, psi, dW, d2W, amin
        )
        H, b2 = _mixed_invariants(second, ginv, dim)
        pos = wrap(frame.position + psi[..., None] * frame.normal)
        comps.append(ComponentGeometry(grid, frame, psi, dpsi, pos, tangents, g,
                                       ginv, area, normal, align, second, H, b2))
    return SurfaceGeometry(surface, comps, "param",
                           [f.grid.shape for f in bundle])


def build_geometry_sdf(surface, bundle, dealias=DEALIAS, amin=ALIGN_MIN,
                       check_resolution=True):
    """Curvature from the signed-distance route.

    The gradient and Hessian of the level-set function of the graph are
    expressed on the reference chart through A = (I + psi B)^-1 and the
    closed-form third derivatives of the distance function; curvature is
    the projected, rescaled Hessian.
    """
    prep = _prepared_fields(surface, bundle, dealias, check_resolution)
    n = surface.n
    comps = []
    for comp, (grid, psi, dpsi, d2psi) in enumerate(prep):
        frame = surface.frame(comp, grid.nodes())
        kappa = frame.curvatures
        dim = grid.dim
        nu = frame.normal

        # A = (I + psi B)^-1 via the principal frame; w = grad(u) o Phi
        w = nu - sum(
            (dpsi[i] / (1.0 + psi * kappa[i]))[..., None] * frame.tangents[i]
            for i in range(dim)
        )

        def sym(a, b):
            return a[..., :, None] * b[..., None, :] + b[..., :, None] * a[..., None, :]

        B_amb = sum(
            kappa[i] * frame.tangents[i][..., :, None] * frame.tangents[i][..., None, :]
            for i in range(dim)
        )
        Bgrad = sum((kappa[i] * dpsi[i])[..., None] * frame.tangents[i] for i in range(dim))
        hess_ext = -sym(nu, Bgrad)
        for i in range(dim):
            for j in range(dim):
                key = (min(i, j), max(i, j))
                hess_ext = hess_ext + d2psi[key][..., None, None] * (
                    frame.tangents[i][..., :, None] * frame.tangents[j][..., None, :]
                )
        M = B_amb - psi[..., None, None] * surface.directional_d3(comp, grid.nodes(), w) - hess_ext

        A = np.zeros(grid.shape + (n, n)) + np.eye(n)
        for i in range(dim):
            factor = 1.0 / (1.0 + psi * kappa[i]) - 1.0
            A = A + factor[..., None, None] * (
                frame.tangents[i][..., :, None] * frame.tangents[i][..., None, :]
            )
        hess_u = np.einsum("...ij,...jk,...kl->...il", A, M, A)

        wnorm = np.linalg.norm(w, axis=-1)
        normal = w / wnorm[..., None]
        align = np.sum(nu * normal, axis=-1)
        if float(align.min()) <= amin:
            raise GraphValidityError(
                f"component {comp}: normal alignment {float(align.min()):.3f} <= {amin}"
            )
        proj = np.zeros(grid.shape + (n, n)) + np.eye(n)
        proj = proj - normal[..., :, None] * normal[..., None, :]
        B_surf = np.einsum("...ij,...jk,...kl->...il", proj, hess_u, proj) / wnorm[..., None, None]
        H = np.einsum("...ii->...", B_surf)
        b2 = np.einsum("...ij,...ij->...", B_surf, B_surf)

        # chart-frame covariant components via the shared tangent fields
        dW = [
            dpsi[i][..., None] * nu + (psi * kappa[i])[..., None] * frame.tangents[i]
            for i in range(dim)
        ]
        tangents = [frame.tangents[i] + dW[i] for i in range(dim)]
        second = np.empty(grid.shape + (dim, dim))
        for i in range(dim):
            Bt = np.einsum("...ij,...j->...i", B_surf, tangents[i])
            for j in range(i, dim):
                second[..., i, j] = np.sum(tangents[j] * Bt, axis=-1)
                second[..., j, i] = second[..., i, j]
        g = np.empty(grid.shape + (dim, dim))
        for i in range(dim):
            for j in range(i, dim):
                g[..., i, j] = np.sum(tangents[i] * tangents[j], axis=-1)
                g[..., j, i] = g[..., i, j]
        det, ginv = _metric_inverse(g, dim)
        area = np.sqrt(det)
        pos = wrap(frame.position + psi[..., None] * nu)
        comps.append(ComponentGeometry(grid, frame, psi, dpsi, pos, tangents, g,
                                       ginv, area, normal, align, second, H, b2))
    return SurfaceGeometry(surface, comps, "sdf",
                           [f.grid.shape for f in bundle])


def build_geometry_displacement(surface, grids, displacements, amin=ALIGN_MIN):
    """Geometry of a surface given by chart position + periodic displacement.

    Used by the kinematics probes: the displacement W need not point along
    the reference normal, so the result is a general parametrized surface
    over the chart.  All derivatives of W are spectral per ambient
    coordinate.
    """
    comps = []
    for comp, (grid, W) in enumerate(zip(grids, displacements)):
        dim = grid.dim
        n = surface.n
        dW = []
        for a in range(dim):
            d = np.stack(
                [deriv_values(W[..., c], grid, _unit(dim, a)) for c in range(n)],
                axis=-1,
            )
            dW.append(d)
        d2W = {}
        for i in range(dim):
            for j in range(i, dim):
                orders = tuple(int(a == i) + int(a == j) for a in range(dim))
                d2W[(i, j)] = np.stack(
                    [deriv_values(W[..., c], grid, orders) for c in range(n)],
                    axis=-1,
                )
        frame, tangents, g, ginv, area, normal, align, second = _assemble_component(
            surface, comp, grid, None, dW, d2W, amin
        )
        H, b2 = _mixed_invariants(second, ginv, dim)
        pos = wrap(frame.position + W)
        psi = np.sum(W * frame.normal, axis=-1)
        dpsi = [np.sum(dw * frame.normal, axis=-1) for dw in dW]
        comps.append(ComponentGeometry(grid, frame, psi, dpsi, pos, tangents, g,
                                       ginv, area, normal, align, second, H, b2))
    return SurfaceGeometry(surface, comps, "cloud", [g.shape for g in grids])


class GraphState:
    """A reference surface together with a valid graph field bundle."""

    def __init__(self, surface, psi, graph_bound=None):
        self.surface = surface
        self.psi = psi
        self.graph_bound = surface.graph_bound if graph_bound is None else float(graph_bound)
        self._geometry = None

    def validate(self):
        norm = c1_norm(self.psi)
        if norm >= self.graph_bound:
            raise GraphValidityError(
                f"C1 norm {norm:.4g} is not below the graph bound {self.graph_bound:.4g}"
            )
        return norm

    @property
    def geometry(self):
        if self._geometry is None:
            self.validate()
            self._geometry = build_geometry_param(self.surface, self.psi)
        return self._geometry


def fiber_antiderivative(coeffs, values, moment):
    """Integral over s in [0, psi] of s^moment * J_fiber(s), pointwise.

    moment = 0 gives the volume integrand, moment = 1 the weak-distance
    integrand; both are exact polynomials in psi.
    """
    out = np.zeros_like(values)
    for k, c in enumerate(coeffs):
        out += c * values ** (k + 1 + moment) / (k + 1 + moment)
    return out


def volume(surface, bundle):
    """Enclosed volume |F_psi| via exact fiber integration."""
    total = surface.volume
    for comp, f in enumerate(bundle):
        _check_fiber_bound(surface, comp, f.values)
        coeffs = fiber_polynomial(surface.component_curvatures(comp))
        total += fiber_antiderivative(coeffs, f.values, 0).sum() * f.grid.cell_measure
    return float(total)


def volume_polynomial(surface, bundle):
    """Coefficients a_k of c -> volume(psi + c), ascending order, exact."""
    max_deg = max(len(fiber_polynomial(surface.component_curvatures(i)))
                  for i in range(surface.num_components))
    out = np.zeros(max_deg + 1)
    out[0] = surface.volume
    for comp, f in enumerate(bundle):
        coeffs = fiber_polynomial(surface.component_curvatures(comp))
        cell = f.grid.cell_measure
        # int_0^{psi+c} J(s) ds expanded in powers of c via binomials
        for k, ck in enumerate(coeffs):
            deg = k + 1
            for m in range(deg + 1):
                moment = (f.values ** (deg - m)).sum() * cell
                out[m] += ck / deg * comb(deg, m) * moment
    return out


def weak_distance(surface, bundle):
    """D_F(F_psi): integral of the distance over the symmetric difference."""
    total = 0.0
    for comp, f in enumerate(bundle):
        _check_fiber_bound(surface, comp, f.values)
        coeffs = fiber_polynomial(surface.component_curvatures(comp))
        total += fiber_antiderivative(coeffs, f.values, 1).sum() * f.grid.cell_measure
    return float(total)


def perimeter(geometry):
    return geometry.perimeter


class SurfaceScalarOps:
    """Integral calculus for a chart field bundle on a graph surface."""

    def __init__(self, geometry, bundle):
        self.geometry = geometry
        self.values = geometry.lift(bundle)
        self.grads = [
            comp.grad_components(v) for comp, v in zip(geometry.components, self.values)
        ]

    @property
    def integral(self):
        return self.geometry.integral(self.values)

    @property
    def average(self):
        return self.geometry.average(self.values)

    def gradient(self):
        return [
            comp.grad_ambient(v, g)
            for comp, v, g in zip(self.geometry.components, self.values, self.grads)
        ]

    def grad_norm_sq(self):
        return [
            comp.grad_norm_sq(v, g)
            for comp, v, g in zip(self.geometry.components, self.values, self.grads)
        ]

    def laplacian(self):
        return [
            comp.laplace_beltrami(v, g)
            for comp, v, g in zip(self.geometry.components, self.values, self.grads)
        ]

    def lp_norm(self, p=2.0):
        return self.geometry.lp_norm(self.values, p)

    def grad_lp_norm(self, p=2.0):
        mags = [np.sqrt(q) for q in self.grad_norm_sq()]
        return self.geometry.lp_norm(mags, p)


def surface_scalar_ops(geometry, bundle):
    return SurfaceScalarOps(geometry, bundle)


def linearization_residual(surface, bundle, eps_list, dealias=DEALIAS):
    """Sup-norm defect of (H(eps psi) - H_F)/eps against -lap psi - |B|^2 psi."""
    residuals = []
    h_ref = surface.mean_curvature
    for eps in eps_list:
        geom = build_geometry_param(surface, bundle * eps, dealias=dealias)
        worst = 0.0
        for comp, cg in enumerate(geom.components):
            psi = cg.psi / eps
            lap = np.zeros(cg.grid.shape)
            for a in range(cg.grid.dim):
                orders = tuple(2 * int(i == a) for i in range(cg.grid.dim))
                lap += deriv_values(psi, cg.grid, orders)
            b2 = float(sum(k ** 2 for k in surface.component_curvatures(comp)))
            lin = -lap - b2 * psi
            defect = (cg.mean_curvature - h_ref) / eps - lin
            worst = max(worst, float(np.abs(defect).max()))
        residuals.append(worst)
    return residuals


def norm_transfer_check(surface, bundle, f, p=2.0):
    """Ratios comparing chart-pullback norms with on-surface norms."""
    geom = build_geometry_param(surface, bundle)
    ops = SurfaceScalarOps(geom, f)
    flat_vals = geom.lift(f)
    flat_lp = 0.0
    flat_grad = 0.0
    for comp, v in zip(geom.components, flat_vals):
        flat_lp += (np.abs(v) ** p).sum() * comp.grid.cell_measure
        gsq = np.zeros(comp.grid.shape)
        for a in range(comp.grid.dim):
            d = deriv_values(v, comp.grid, _unit(comp.grid.dim, a))
            gsq += d * d
        flat_grad += (gsq ** (p / 2.0)).sum() * comp.grid.cell_measure
    flat_lp = flat_lp ** (1.0 / p)
    flat_grad = flat_grad ** (1.0 / p)
    return {
        "lp_ratio": flat_lp / ops.lp_norm(p),
        "grad_ratio": flat_grad / ops.grad_lp_norm(p),
    }


def h3_control_check(surface, bundle):
    """Both sides of the H^3-control equivalence, plus their ratio."""
    from .calculus import sobolev_norm

    geom = build_geometry_param(surface, bundle)
    grad_h = _grad_h_l2(geom)
    lhs = sobolev_norm(bundle, 3, 2.0)
    rhs = grad_h + np.sqrt(weak_distance(surface, bundle))
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}


def _grad_h_l2(geometry):
    total = 0.0
    for comp in geometry.components:
        gsq = comp.grad_norm_sq(comp.mean_curvature)
        total += comp.integrate(gsq)
    return float(np.sqrt(total))


def exact_translate_graph(surface, p, resolution):
    """Graph field of the translate F + p over F, in closed form."""
    from .calculus import bundle_for_surface

    p = np.asarray(p, dtype=float)
    fields = []
    bundle = bundle_for_surface(surface, resolution)
    for comp, f in enumerate(bundle):
        frame = surface.frame(comp, f.grid.nodes())
        kappa = surface.component_curvatures(comp)
        if all(k == 0.0 for k in kappa):
            psi = np.sum(frame.normal * p[: surface.n], axis=-1)
        else:
            radius = 1.0 / kappa[0]
            p_perp = p[:2]
            ep = np.sum(frame.normal[..., :2] * p_perp, axis=-1)
            disc = radius ** 2 - float(p_perp @ p_perp) + ep ** 2
            if np.any(disc <= 0):
                raise RegraphError("translation too large for a global graph")
            psi = ep + np.sqrt(disc) - radius
        fields.append(ScalarField(f.grid, psi))
    return FieldBundle(fields)


def _regraph_circle_rows(radius, center_shift, psi_rows, grid_1d):
    """Re-express radial graphs around a shifted center, one 1D row at a time.

    psi_rows has shape (rows, N); returns phi at the uniform angular nodes of
    the shifted chart.  Newton iteration on the angular coordinate with the
    trigonometric interpolant of each row.
    """
    rows, nnodes = psi_rows.shape
    L = grid_1d.periods[0]
    s_nodes = grid_1d.axes()[0]
    theta_target = s_nodes / radius
    p = center_shift
    phi = np.empty_like(psi_rows)
    for r in range(rows):
        values = psi_rows[r]
        theta = theta_target.copy()
        e_t = np.stack([np.cos(theta_target), np.sin(theta_target)], axis=-1)
        e_perp_t = np.stack([-np.sin(theta_target), np.cos(theta_target)], axis=-1)
        dvalues = deriv_values(values, grid_1d, (1,))
        converged = False
        for _ in range(60):
            s = np.mod(theta * radius, L)
            rad = radius + eval_trig_series(values, grid_1d, s)
            drad = eval_trig_series(dvalues, grid_1d, s)
            e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            e_perp = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
            point = rad[:, None] * e - p[None, :]
            h = np.sum(point * e_perp_t, axis=-1)
            if float(np.abs(h).max()) < 1e-13 * radius:
                converged = True
                break
            dh = np.sum((drad[:, None] * e + rad[:, None] * e_perp) * e_perp_t, axis=-1)
            if np.any(np.abs(dh) < 1e-12):
                raise RegraphError("degenerate Newton step while re-graphing")
            theta = theta - h / dh
        if not converged:
            raise RegraphError("re-graphing Newton did not converge")
        s = np.mod(theta * radius, L)
        rad = radius + eval_trig_series(values, grid_1d, s)
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        rho = np.sum((rad[:, None] * e - p[None, :]) * e_t, axis=-1)
        if np.any(rho <= 0):
            raise RegraphError("shifted center left the enclosed region")
        phi[r] = rho - radius
    return phi


def regraph(surface, bundle, p):
    """Re-express the graph surface F_psi as a graph over the translate F + p.

    Returns (translated surface, phi bundle).  Exact for slab kinds; a
    per-node Newton solve on the angular chart coordinate otherwise.
    """
    p = np.asarray(p, dtype=float)
    moved = surface.translate(p)
    fields = []
    for comp, f in enumerate(bundle):
        kappa = surface.component_curvatures(comp)
        if all(k == 0.0 for k in kappa):
            frame = surface.frame(comp, [np.zeros(1)] * f.grid.dim)
            shift = float(np.sum(frame.normal[0] * p[: surface.n]))
            phi = f.values - shift
        elif f.grid.dim == 1:
            phi = _regraph_circle_rows(
                surface.radius, p[:2], f.values[None, :], f.grid
            )[0]
        else:
            grid_1d = PeriodicGrid((f.grid.shape[0],), (f.grid.periods[0],))
            phi = _regraph_circle_rows(
                surface.radius, p[:2], f.values.T.copy(), grid_1d
            ).T.copy()
        fields.append(ScalarField(f.grid, phi))
    out = FieldBundle(fields)
    for comp, f in enumerate(out):
        _check_fiber_bound(moved, comp, f.values)
    return moved, out
