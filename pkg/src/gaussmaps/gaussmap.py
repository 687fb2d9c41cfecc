"""Unit normal bundles and their sphere-bundle and plane-manifold maps.

A ``UnitNormalChart`` parametrizes the unit normal bundle of an immersion
chart: base coordinates are the chart coordinates of the immersion, fiber
coordinates are spherical angles over a normal frame field that is smooth
over the chart (hypersurfaces use the oriented cross-product normal; higher
codimension uses a seed sequence pinned at construction, or an explicit
frame supplied by the fixture).

The lift into the unit sphere bundle sends a normal vector to (footpoint,
normal); composing with the plane projection gives the map into oriented
great circles.  Mean curvature of the plane map is computed two independent
ways: from the second fundamental form of the base immersion through the
adapted frame (the formula path), and as a finite-difference tension field
of the plane map itself (the oracle path).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import dual
from .immersion import (
    DegenerateImmersion, DomainBoundaryError, ChartDomainError, NotConformal,
    conformal_residual, second_form_derivative, shape_data, shape_operator,
    gram_schmidt_complement, principal_curvatures,
)
from .spaces import (
    AmbientTangentUS, UnitSpherePoint, contact_form, plane_symplectic,
    plane_tangent_project, sasaki_metric, span_plane, span_plane_pushforward,
    wedge,
)


class MultiplicityCrossing(ValueError):
    """Principal-curvature multiplicities change inside an FD stencil."""


class IllConditionedMetric(ValueError):
    """Induced metric too ill-conditioned for a reliable tension field."""


class FrameConstruction(ValueError):
    """No admissible smooth normal frame could be pinned over the chart."""


def relative_residual(a, b):
    """norm(a - b) with a unit floor on the comparison scale."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b)
                 / max(1.0, np.linalg.norm(a), np.linalg.norm(b)))


# -- normal frame fields -------------------------------------------------------

def hodge_normal(point, jac):
    """Oriented unit normal of a hypersurface chart via the cross product:
    the unique unit vector completing (point, tangents) positively."""
    dim = point.shape[0]
    rows = np.vstack([point[None, :], jac.T])
    if rows.shape[0] != dim - 1:
        raise ValueError("hodge_normal needs codimension one")
    omega = np.empty(dim)
    cols = np.arange(dim)
    for k in range(dim):
        minor = rows[:, cols != k]
        omega[k] = (-1.0) ** (dim - 1 + k) * np.linalg.det(minor)
    norm = np.linalg.norm(omega)
    if norm < 1e-12:
        raise DegenerateImmersion("cross product vanished: chart not immersed")
    return omega / norm


class CrossProductFrame:
    """Codimension-one frame: the single oriented cross-product normal."""

    def __init__(self, chart):
        if chart.n - chart.m != 1:
            raise ValueError("cross-product frame needs codimension one")
        self.chart = chart

    def __call__(self, u):
        return [hodge_normal(self.chart.value(u), self.chart.jacobian(u))]


class ExplicitFrame:
    """Frame field supplied in closed form by a fixture."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, u):
        return [np.asarray(v, dtype=float) for v in self.fn(u)]


class PinnedSeedFrame:
    """Gram-Schmidt frame over a seed sequence fixed at construction.

    The seed order is chosen greedily to maximize the worst pivot over a
    probe grid of the domain box, so the frame is smooth over the chart;
    a pivot collapse at evaluation time is an error, not a silent skip.
    """

    def __init__(self, chart, probes_per_dim=5, min_pivot=1e-3):
        self.chart = chart
        codim = chart.n - chart.m
        grid = _probe_grid(chart.domain_box, probes_per_dim)
        spans = []
        for u in grid:
            p = chart.value(u)
            q, _ = np.linalg.qr(chart.jacobian(u))
            spans.append([p] + [q[:, k] for k in range(chart.m)])
        dim = chart.n + 1
        chosen = []
        remaining = list(range(dim))
        for _ in range(codim):
            best, best_pivot = None, -1.0
            for cand in remaining:
                worst = min(self._pivot(spans[i], chosen + [cand])
                            for i in range(len(grid)))
                if worst > best_pivot:
                    best, best_pivot = cand, worst
            if best is None or best_pivot < min_pivot:
                raise FrameConstruction(
                    f"no seed keeps pivots above {min_pivot:.1e} over the probe "
                    f"grid (best {best_pivot:.3e}); supply an explicit frame")
            chosen.append(best)
            remaining.remove(best)
        self.seeds = chosen

    @staticmethod
    def _pivot(span, seed_indices):
        dim = span[0].shape[0]
        basis = list(span)
        pivot = np.inf
        for idx in seed_indices:
            cand = np.zeros(dim)
            cand[idx] = 1.0
            for b in basis:
                cand = cand - (cand @ b) * b
            norm = np.linalg.norm(cand)
            pivot = min(pivot, norm)
            if norm > 0:
                basis.append(cand / norm)
        return pivot

    def __call__(self, u):
        p = self.chart.value(u)
        q, _ = np.linalg.qr(self.chart.jacobian(u))
        span = [p] + [q[:, k] for k in range(self.chart.m)]
        seeds = [np.eye(self.chart.n + 1)[idx] for idx in self.seeds]
        basis, _ = gram_schmidt_complement(span, seeds, threshold=1e-6,
                                           require_all=True)
        return basis


def _probe_grid(box, per_dim):
    axes = [np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), per_dim)
            for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


# -- fiber coordinates ---------------------------------------------------------

def fiber_coords(s):
    """Spherical coordinates on the unit fiber sphere; accepts duals.

    d angles parametrize S^d: the first d-1 range over (0, pi), the last
    over [0, 2 pi) and is periodic.
    """
    d = len(s)
    out = []
    sinprod = 1.0
    for k in range(d):
        out.append(sinprod * dual.cos(s[k]))
        sinprod = sinprod * dual.sin(s[k])
    out.append(sinprod)
    return out


def fiber_coord_jacobian(s):
    """Partials dc_alpha / ds_beta via dual seeding, shape (d, d+1)."""
    d = len(s)
    rows = []
    for beta in range(d):
        seeded = [dual.Dual(float(x), 1.0 if k == beta else 0.0)
                  for k, x in enumerate(s)]
        rows.append([dual.deriv(c) for c in fiber_coords(seeded)])
    return np.array(rows, dtype=float)


# -- the unit normal chart -----------------------------------------------------

@dataclass
class UnitNormalChart:
    """Chart (u, s) on the unit normal bundle of ``base``.

    ``frame_field(u)`` returns the smooth orthonormal normal frame; for
    hypersurfaces the fiber is zero-dimensional and ``sheet_sign`` selects
    the normal sheet.
    """

    base: object
    frame_field: Callable
    sheet_sign: float = 1.0
    fiber_margin: float = 0.3
    descriptor: Optional[object] = None

    def __post_init__(self):
        if self.fiber_dim < 0:
            raise ValueError("base chart is not a submanifold of positive codim")
        if self.sheet_sign not in (-1.0, 1.0):
            raise ValueError("sheet_sign must be +1 or -1")

    @property
    def m(self):
        return self.base.m

    @property
    def n(self):
        return self.base.n

    @property
    def fiber_dim(self):
        return self.base.n - self.base.m - 1

    @property
    def dim(self):
        return self.m + self.fiber_dim

    @property
    def fd_step(self):
        return self.base.fd_step

    def outer_step(self):
        return self.base.outer_step()

    @property
    def domain_box(self):
        box = list(self.base.domain_box)
        d = self.fiber_dim
        for k in range(d):
            if k < d - 1:
                box.append((self.fiber_margin, np.pi - self.fiber_margin))
            else:
                box.append((0.0, 2 * np.pi))
        return tuple(box)

    @property
    def periodic(self):
        per = list(self.base.periodic)
        d = self.fiber_dim
        for k in range(d):
            per.append(k == d - 1)
        return tuple(per)

    def split_point(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise ChartDomainError(
                f"expected {self.dim} coordinates, got shape {w.shape}")
        return w[:self.m], w[self.m:]

    def check_point(self, w, radius=0.0):
        u, s = self.split_point(w)
        self.base.check_point(u, radius=radius)
        box = self.domain_box
        per = self.periodic
        for k in range(self.fiber_dim):
            lo, hi = box[self.m + k]
            if per[self.m + k]:
                continue
            if s[k] < lo - 1e-9 or s[k] > hi + 1e-9:
                raise ChartDomainError(
                    f"fiber coordinate {k} = {s[k]!r} outside [{lo}, {hi}]")
            if radius > 0.0 and (s[k] - radius < lo or s[k] + radius > hi):
                raise DomainBoundaryError(
                    f"fiber stencil of radius {radius:.3e} crosses [{lo}, {hi}]")
        return np.asarray(w, dtype=float)

    # -- evaluation ----------------------------------------------------------

    def normal(self, u, s):
        frame = self.frame_field(u)
        coeffs = fiber_coords(list(s)) if len(s) else [1.0]
        xi = sum(float(c) * f for c, f in zip(coeffs, frame))
        return self.sheet_sign * xi

    def lift(self, w):
        """The map into the unit sphere bundle: (u, s) -> (f(u), xi(u, s))."""
        w = self.check_point(w)
        u, s = self.split_point(w)
        return UnitSpherePoint(self.base.value(u), self.normal(u, s))

    def plane_vector(self, w):
        """Wedge vector of the plane map, without domain checks (stencil use)."""
        u, s = self.split_point(w)
        return wedge(self.base.value(u), self.normal(u, s))

    def plane(self, w):
        """The map into oriented great circles."""
        return span_plane(self.lift(w))

    def tangents(self, w):
        """Pushforwards of the coordinate fields under the lift."""
        w = self.check_point(w)
        u, s = self.split_point(w)
        x = self.lift(w)
        jac = self.base.jacobian(u)
        cols = []
        for a in range(self.m):
            h = self.fd_step * max(1.0, abs(u[a]))
            e = np.zeros(self.m)
            e[a] = h
            dxi = (self.normal(u + e, s) - self.normal(u - e, s)) / (2 * h)
            cols.append(AmbientTangentUS(x, jac[:, a], dxi))
        if self.fiber_dim:
            frame = self.frame_field(u)
            dc = fiber_coord_jacobian(list(s))
            for beta in range(self.fiber_dim):
                vec = self.sheet_sign * sum(dc[beta, al] * frame[al]
                                            for al in range(len(frame)))
                cols.append(AmbientTangentUS(x, np.zeros(self.n + 1), vec))
        return cols

    def plane_tangents(self, w):
        """Pushforwards of the coordinate fields under the plane map."""
        x = self.lift(w)
        return [span_plane_pushforward(x, z) for z in self.tangents(w)]

    def induced_metric(self, w):
        """Gram matrix of the lift in the Sasaki metric (equals the plane
        map's induced metric, since the projection is a Riemannian
        submersion on contact directions)."""
        x = self.lift(w)
        cols = self.tangents(w)
        dim = len(cols)
        g = np.empty((dim, dim))
        for a in range(dim):
            for b in range(a, dim):
                g[a, b] = g[b, a] = sasaki_metric(x, cols[a], cols[b])
        return g

    def sample_points(self, rng, count):
        """Uniform random points in the domain box, shrunk away from
        non-periodic edges so FD stencils stay inside."""
        box = self.domain_box
        per = self.periodic
        out = np.empty((count, self.dim))
        for k, ((lo, hi), p) in enumerate(zip(box, per)):
            margin = 0.0 if p else 0.06 * (hi - lo)
            out[:, k] = rng.uniform(lo + margin, hi - margin, size=count)
        return out


def unit_normal_chart(base, frame=None, sheet_sign=1.0, descriptor=None):
    """Build the unit normal chart, choosing a frame construction:
    explicit callable if given, cross product in codimension one, pinned
    seeds otherwise."""
    if frame is not None:
        if isinstance(frame, (ExplicitFrame, CrossProductFrame, PinnedSeedFrame)):
            field = frame
        else:
            field = ExplicitFrame(frame)
    elif base.n - base.m == 1:
        field = CrossProductFrame(base)
    else:
        field = PinnedSeedFrame(base)
    return UnitNormalChart(base=base, frame_field=field, sheet_sign=float(sheet_sign),
                           descriptor=descriptor)


# -- adapted frame -------------------------------------------------------------

@dataclass
class AdaptedFrame:
    """Orthonormal frame adapted to the lifted submanifold at one point.

    ``horizontal[i]`` are the lifted-metric-orthonormal horizontal vectors,
    ``vertical[beta]`` the fiber vectors; ``j_horizontal``/``j_vertical``
    their images under the contact complex structure.  ``base_horizontal``
    are the footpoint projections of the horizontal vectors and
    ``base_vertical`` those of the rotated vertical ones; together with the
    normal vector they frame the tangent and normal spaces downstairs.
    """

    point: UnitSpherePoint
    xi: np.ndarray
    sd: object
    shape_matrix: np.ndarray
    coeff: np.ndarray
    horizontal: list
    vertical: list
    j_horizontal: list
    j_vertical: list
    base_horizontal: list
    base_vertical: list

    @property
    def all_tangent(self):
        return self.horizontal + self.vertical

    @property
    def all_rotated(self):
        return self.j_horizontal + self.j_vertical


def adapted_frame(chart, w):
    """Construct the adapted frame at (u, s).

    Horizontal vectors are built from a basis X_i of the base tangent space
    orthonormal for the lifted metric g(X, Y) + g(AX, AY); their lifts are
    (X_i, -A X_i) in ambient pairs.  Vertical vectors orthonormalize the
    fiber coordinate fields.  The complex structure acts by
    (a, w) -> (-w, a) on contact pairs.
    """
    w = chart.check_point(w)
    u, s = chart.split_point(w)
    x = chart.lift(w)
    p = x.p
    xi = x.v
    sd = shape_data(chart.base, u)
    a_mat = shape_operator(sd, xi)
    g = sd.metric
    lifted = g + a_mat.T @ g @ a_mat
    # columns of C give a lifted-metric-orthonormal basis in coordinates
    chol = np.linalg.cholesky(lifted)
    coeff = np.linalg.inv(chol).T
    jac = sd.tangent_frame

    horizontal, j_horizontal = [], []
    base_horizontal = []
    for i in range(chart.m):
        xc = coeff[:, i]
        x_amb = jac @ xc
        ax_amb = jac @ (a_mat @ xc)
        e = AmbientTangentUS(x, x_amb, -ax_amb)
        je = AmbientTangentUS(x, ax_amb, x_amb)
        horizontal.append(e)
        j_horizontal.append(je)
        base_horizontal.append(x_amb)

    vertical, j_vertical, base_vertical = [], [], []
    if chart.fiber_dim:
        frame = chart.frame_field(u)
        dc = fiber_coord_jacobian(list(s))
        raw = [chart.sheet_sign * sum(dc[beta, al] * frame[al]
                                      for al in range(len(frame)))
               for beta in range(chart.fiber_dim)]
        ortho = []
        for v in raw:
            for b in ortho:
                v = v - (v @ b) * b
            norm = np.linalg.norm(v)
            if norm < 1e-10:
                raise DegenerateImmersion("fiber coordinate fields degenerate")
            ortho.append(v / norm)
        for v in ortho:
            vertical.append(AmbientTangentUS(x, np.zeros(chart.n + 1), v))
            j_vertical.append(AmbientTangentUS(x, -v, np.zeros(chart.n + 1)))
            base_vertical.append(-v)

    return AdaptedFrame(point=x, xi=xi, sd=sd, shape_matrix=a_mat, coeff=coeff,
                        horizontal=horizontal, vertical=vertical,
                        j_horizontal=j_horizontal, j_vertical=j_vertical,
                        base_horizontal=base_horizontal, base_vertical=base_vertical)


def horizontal_lift(chart, w, x_coords):
    """Lift of a base tangent vector (coordinate components) orthogonal to
    the fiber, computed by plain linear algebra on coordinate pushforwards.

    Returns (tangent, chart_direction): the lifted vector and its chart
    coordinates, fiber corrections included.
    """
    x = chart.lift(w)
    cols = chart.tangents(w)
    x_coords = np.asarray(x_coords, dtype=float)
    direction = np.zeros(chart.dim)
    direction[:chart.m] = x_coords
    zc_p = sum(c * cols[a].pdot for a, c in enumerate(x_coords))
    zc_v = sum(c * cols[a].vdot for a, c in enumerate(x_coords))
    zc = AmbientTangentUS(x, zc_p, zc_v)
    d = chart.fiber_dim
    if d == 0:
        return zc, direction
    fibers = cols[chart.m:]
    gram = np.array([[sasaki_metric(x, fa, fb) for fb in fibers] for fa in fibers])
    rhs = np.array([sasaki_metric(x, zc, fb) for fb in fibers])
    lam = np.linalg.solve(gram, rhs)
    direction[chart.m:] = -lam
    zp = zc.pdot - sum(l * f.pdot for l, f in zip(lam, fibers))
    zv = zc.vdot - sum(l * f.vdot for l, f in zip(lam, fibers))
    return AmbientTangentUS(x, zp, zv), direction


# -- mean curvature: formula path ----------------------------------------------

@dataclass
class MeanCurvatureResult:
    """Mean curvature of the plane map, both ways.

    ``components[A]`` are the Sasaki products of the lift's mean curvature
    with the rotated frame vectors (horizontal block first); ``h_gamma``
    reconstructs the plane-map mean curvature from them; ``oracle`` is the
    finite-difference tension field; ``residual`` their relative gap.
    """

    components: np.ndarray
    h_gamma: np.ndarray
    oracle: np.ndarray
    residual: float
    frame: AdaptedFrame


def mean_curvature_components(chart, w, nabla_step=None):
    """Components of the lift's mean curvature against the rotated frame.

    Horizontal components contract the covariant derivative of the second
    form with the base-projected frame; vertical components pair the frame
    trace of the second form with the rotated fiber directions.
    """
    frame = adapted_frame(chart, w)
    u, _ = chart.split_point(w)
    sd = frame.sd
    m = chart.m
    comps = []
    if m:
        dii = second_form_derivative(chart.base, u, step=nabla_step)
        cvecs = [frame.coeff[:, i] for i in range(m)]
        for i in range(m):
            acc = np.zeros(chart.n + 1)
            for j in range(m):
                acc += np.einsum("kljb,k,l,j->b", dii, cvecs[i], cvecs[j], cvecs[j])
            comps.append(-float(acc @ frame.xi))
    trace_ii = np.zeros(chart.n + 1)
    for j in range(m):
        cj = frame.coeff[:, j]
        trace_ii += np.einsum("ijb,i,j->b", sd.second_form_ambient, cj, cj)
    for ebar in frame.base_vertical:
        comps.append(float(trace_ii @ ebar))
    return np.array(comps), frame


def reconstruct_plane_mean_curvature(chart, w, components, frame):
    """Sum of components times the plane pushforwards of the rotated frame."""
    x = frame.point
    out = np.zeros_like(wedge(x.p, x.v))
    for c, je in zip(components, frame.all_rotated):
        out = out + c * span_plane_pushforward(x, je)
    return out


# -- mean curvature: oracle path -----------------------------------------------

def _second_derivative_map(fn, w, dim, step):
    """Dense second derivatives of a vector-valued map by central stencils."""
    f0 = fn(w)
    out = np.empty((dim, dim) + f0.shape)
    steps = [step * max(1.0, abs(w[k])) for k in range(dim)]
    for a in range(dim):
        ea = np.zeros(dim)
        ea[a] = steps[a]
        out[a, a] = (fn(w + ea) - 2.0 * f0 + fn(w - ea)) / steps[a] ** 2
        for b in range(a + 1, dim):
            eb = np.zeros(dim)
            eb[b] = steps[b]
            mixed = (fn(w + ea + eb) - fn(w + ea - eb)
                     - fn(w - ea + eb) + fn(w - ea - eb)) / (4 * steps[a] * steps[b])
            out[a, b] = out[b, a] = mixed
    return out


def _first_derivative_map(fn, w, dim, step):
    f0 = np.asarray(fn(w))
    out = np.empty((dim,) + f0.shape)
    for a in range(dim):
        h = step * max(1.0, abs(w[a]))
        e = np.zeros(dim)
        e[a] = h
        out[a] = (np.asarray(fn(w + e)) - np.asarray(fn(w - e))) / (2 * h)
    return out


def _christoffels_of_map(metric_fn, g0, w, dim, step):
    g_inv = np.linalg.inv(g0)
    dg = _first_derivative_map(metric_fn, w, dim, step)
    gamma = np.empty((dim, dim, dim))
    for l in range(dim):
        for a in range(dim):
            for b in range(dim):
                gamma[l, a, b] = 0.5 * sum(
                    g_inv[l, r] * (dg[a][r, b] + dg[b][r, a] - dg[r][a, b])
                    for r in range(dim))
    return gamma


def tension_oracle(chart, w, step=None):
    """Finite-difference tension field of the plane map at (u, s).

    Uses only evaluations of the plane map and the induced metric: second
    derivatives in chart coordinates, Christoffel corrections from the
    metric, then tangent projection at the image plane.  Independent of the
    second-fundamental-form formula path.
    """
    w = np.asarray(w, dtype=float)
    h = chart.outer_step() if step is None else float(step)
    radius = 2.0 * h * max(1.0, float(np.max(np.abs(w))))
    chart.check_point(w, radius=radius)
    dim = chart.dim
    g0 = chart.induced_metric(w)
    cond = np.linalg.cond(g0)
    if cond > 1e8:
        raise IllConditionedMetric(f"metric condition number {cond:.3e}")
    g_inv = np.linalg.inv(g0)
    d2 = _second_derivative_map(chart.plane_vector, w, dim, h)
    d1 = _first_derivative_map(chart.plane_vector, w, dim, h)
    gamma = _christoffels_of_map(chart.induced_metric, g0, w, dim, h)
    tau = np.zeros(d1.shape[1])
    for a in range(dim):
        for b in range(dim):
            corr = sum(gamma[c, a, b] * d1[c] for c in range(dim))
            tau = tau + g_inv[a, b] * (d2[a, b] - corr)
    q = chart.plane(w)
    return plane_tangent_project(q, tau)


def lift_tension_oracle(chart, w, step=None):
    """Finite-difference tension field of the lift into the sphere bundle,
    returned as an ambient tangent pair; its contact-form value is the
    Reeb component (zero for horizontal tension)."""
    w = np.asarray(w, dtype=float)
    h = chart.outer_step() if step is None else float(step)
    radius = 2.0 * h * max(1.0, float(np.max(np.abs(w))))
    chart.check_point(w, radius=radius)
    dim = chart.dim
    n1 = chart.n + 1

    def lift_vec(ww):
        u, s = chart.split_point(ww)
        return np.concatenate([chart.base.value(u), chart.normal(u, s)])

    g0 = chart.induced_metric(w)
    g_inv = np.linalg.inv(g0)
    d2 = _second_derivative_map(lift_vec, w, dim, h)
    d1 = _first_derivative_map(lift_vec, w, dim, h)
    gamma = _christoffels_of_map(chart.induced_metric, g0, w, dim, h)
    tau = np.zeros(2 * n1)
    for a in range(dim):
        for b in range(dim):
            corr = sum(gamma[c, a, b] * d1[c] for c in range(dim))
            tau = tau + g_inv[a, b] * (d2[a, b] - corr)
    x = chart.lift(w)
    # orthogonal projection onto the tangent space of the sphere bundle:
    # constraint normals (p, 0), (0, v), (v, p)/sqrt(2) are orthonormal
    tp, tv = tau[:n1], tau[n1:]
    tp = tp - (tp @ x.p) * x.p
    tv = tv - (tv @ x.v) * x.v
    mixed = 0.5 * (tp @ x.v + x.p @ tv)
    tp = tp - mixed * x.v
    tv = tv - mixed * x.p
    return AmbientTangentUS(x, tp, tv)


def reeb_component(chart, w, step=None):
    """Contact-form value of the lift's tension: vanishes when the mean
    curvature of the lift stays in the contact distribution."""
    x = chart.lift(w)
    return contact_form(x, lift_tension_oracle(chart, w, step=step))


def mean_curvature_result(chart, w, step=None, nabla_step=None):
    """Formula components, their plane reconstruction, the tension oracle,
    and the relative gap between the two paths."""
    components, frame = mean_curvature_components(chart, w, nabla_step=nabla_step)
    h_gamma = reconstruct_plane_mean_curvature(chart, w, components, frame)
    oracle = tension_oracle(chart, w, step=step)
    return MeanCurvatureResult(components=components, h_gamma=h_gamma,
                               oracle=oracle,
                               residual=relative_residual(h_gamma, oracle),
                               frame=frame)


# -- conformal mean-curvature identities ----------------------------------------

@dataclass
class IdentityResiduals:
    """Residuals of the two conformal-shape-form mean-curvature identities.

    ``horizontal_pairs`` holds (symplectic side, derivative side) per
    horizontal frame vector; ``vertical_pairs`` the same per fiber vector
    (empty for hypersurfaces, where the second identity is vacuous).
    """

    horizontal_residual: float
    vertical_residual: float
    horizontal_pairs: list
    vertical_pairs: list
    r: float
    h_gamma: np.ndarray


def _fiber_probe_points(chart, w, count=3):
    u, s = chart.split_point(w)
    probes = [np.asarray(w, dtype=float)]
    if chart.fiber_dim:
        box = chart.domain_box[chart.m:]
        for k in range(count):
            s_probe = [lo + (hi - lo) * (0.17 + 0.61 * ((k + 1) * (j + 1) % 7) / 7.0)
                       for j, (lo, hi) in enumerate(box)]
            probes.append(np.concatenate([u, s_probe]))
    return probes


def mean_curvature_identity_residuals(chart, w, conformal_tol=1e-6, step=None):
    """Check the two mean-curvature identities at (u, s), assuming (and
    first verifying) conformal shape form across the fiber at u.

    Horizontal identity: the symplectic pairing of the plane mean curvature
    with each horizontal frame pushforward equals the normal derivative of
    the base mean curvature paired with the normal, scaled by 1/(1 + r^2).
    Vertical identity: the pairing with each fiber pushforward equals minus
    the base mean curvature against the projected rotated fiber vector,
    scaled the same way.  Raises NotConformal when the hypothesis fails.
    """
    w = np.asarray(w, dtype=float)
    u, _ = chart.split_point(w)
    worst = 0.0
    for probe in _fiber_probe_points(chart, w):
        pu, ps = chart.split_point(probe)
        sd_probe = shape_data(chart.base, pu)
        _, res = conformal_residual(sd_probe, chart.normal(pu, ps))
        worst = max(worst, res)
    if worst >= conformal_tol:
        raise NotConformal(
            f"shape form is not conformal at u (max residual {worst:.3e})")

    frame = adapted_frame(chart, w)
    sd = frame.sd
    r, _ = conformal_residual(sd, frame.xi)
    scale = 1.0 / (1.0 + r * r)
    h_gamma = tension_oracle(chart, w, step=step)
    x = frame.point
    q = span_plane(x)

    h = chart.outer_step() if step is None else float(step)
    m = chart.m
    dhf = []
    for k in range(m):
        hk = h * max(1.0, abs(u[k]))
        e = np.zeros(m)
        e[k] = hk
        hf_hi = shape_data(chart.base, u + e).mean_curvature
        hf_lo = shape_data(chart.base, u - e).mean_curvature
        dhf.append((hf_hi - hf_lo) / (2 * hk))

    horizontal_pairs = []
    for i, e_i in enumerate(frame.horizontal):
        lhs = plane_symplectic(q, h_gamma, span_plane_pushforward(x, e_i))
        directional = sum(frame.coeff[k, i] * dhf[k] for k in range(m))
        rhs = scale * float((sd.normal_projector @ directional) @ frame.xi)
        horizontal_pairs.append((lhs, rhs))

    vertical_pairs = []
    for e_b, ebar in zip(frame.vertical, frame.base_vertical):
        lhs = plane_symplectic(q, h_gamma, span_plane_pushforward(x, e_b))
        rhs = -scale * float(sd.mean_curvature @ ebar)
        vertical_pairs.append((lhs, rhs))

    res1 = max((abs(a - b) for a, b in horizontal_pairs), default=0.0)
    res2 = max((abs(a - b) for a, b in vertical_pairs), default=0.0)
    return IdentityResiduals(horizontal_residual=res1, vertical_residual=res2,
                             horizontal_pairs=horizontal_pairs,
                             vertical_pairs=vertical_pairs, r=r, h_gamma=h_gamma)


# -- principal-curvature one-form (hypersurfaces) --------------------------------

@dataclass
class OneFormComparison:
    """The principal-curvature one-form against the oracle pairing."""

    sigma: np.ndarray
    oracle: np.ndarray
    residual: float
    used_symmetric_fallback: bool


def _cluster_sizes(kappas, gap_tol):
    sizes = []
    run = 1
    for a, b in zip(kappas[:-1], kappas[1:]):
        if b - a < gap_tol:
            run += 1
        else:
            sizes.append(run)
            run = 1
    sizes.append(run)
    return tuple(sizes)


def mean_curvature_one_form(chart, u, gap_tol=1e-4, step=None):
    """One-form sum of d(kappa_j) / (1 + kappa_j^2) on a hypersurface chart.

    Principal curvatures are differentiated branch-by-branch when they stay
    simple across the stencil; when gaps collapse but the multiplicity
    pattern is stable, the sum of arctangents (a symmetric function, smooth
    through degeneracies) is differentiated instead.  A multiplicity
    pattern that changes inside the stencil is an error.

    Returns the comparison against the symplectic pairing of the oracle
    tension with the plane-map coordinate pushforwards.
    """
    if chart.fiber_dim != 0:
        raise ValueError("the principal-curvature one-form needs a hypersurface")
    u = np.asarray(u, dtype=float)
    m = chart.m
    h0 = chart.outer_step() if step is None else float(step)
    radius = h0 * max(1.0, float(np.max(np.abs(u))))
    chart.check_point(u, radius=radius)

    def kappas_at(uu):
        sd = shape_data(chart.base, uu)
        return principal_curvatures(sd, chart.normal(uu, ()))

    k0 = kappas_at(u)
    stencil = [(k0, _cluster_sizes(k0, gap_tol))]
    diffs = []
    for a in range(m):
        h = h0 * max(1.0, abs(u[a]))
        e = np.zeros(m)
        e[a] = h
        k_hi, k_lo = kappas_at(u + e), kappas_at(u - e)
        stencil.append((k_hi, _cluster_sizes(k_hi, gap_tol)))
        stencil.append((k_lo, _cluster_sizes(k_lo, gap_tol)))
        diffs.append((k_hi, k_lo, h))

    patterns = {sizes for _, sizes in stencil}
    if len(patterns) > 1:
        raise MultiplicityCrossing(
            f"principal-curvature multiplicities change in the stencil: "
            f"{sorted(patterns)}")
    simple = all(size == 1 for size in next(iter(patterns)))

    sigma = np.empty(m)
    for a, (k_hi, k_lo, h) in enumerate(diffs):
        if simple:
            dk = (k_hi - k_lo) / (2 * h)
            sigma[a] = float(np.sum(dk / (1.0 + k0 ** 2)))
        else:
            phi_hi = float(np.sum(np.arctan(k_hi)))
            phi_lo = float(np.sum(np.arctan(k_lo)))
            sigma[a] = (phi_hi - phi_lo) / (2 * h)

    h_gamma = tension_oracle(chart, u)
    q = chart.plane(u)
    pushes = chart.plane_tangents(u)
    oracle = np.array([plane_symplectic(q, h_gamma, dg) for dg in pushes])
    return OneFormComparison(sigma=sigma, oracle=oracle,
                             residual=float(np.max(np.abs(sigma - oracle))),
                             used_symmetric_fallback=not simple)
