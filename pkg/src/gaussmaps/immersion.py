"""Extrinsic geometry of parametric immersions into a round sphere.

Charts evaluate ``u -> f(u)`` with ``|f(u)| = 1``.  First derivatives are
exact when the chart supports forward-mode duals; second and third
derivatives are always finite differences over first-derivative data.  The
step policy keeps outer differences in the truncation-dominated regime:
first differences of exactly-evaluated data use ``fd_step`` while
differences of data that is itself differenced use ``fd_step**(2/3)``.

The second fundamental form is the normal-space projection of the ambient
Hessian (projection onto the orthogonal complement of the footpoint and the
tangent plane); the mean curvature is its metric trace, not averaged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import exprdsl
from .dual import Dual, deriv as dual_deriv, value as dual_value

FINITE_DIFFERENCE = "finite-difference"
FORWARD_DUAL = "forward-dual"


class DegenerateImmersion(ValueError):
    """Jacobian rank below the chart dimension at the requested point."""


class DomainBoundaryError(ValueError):
    """A finite-difference stencil would cross the declared domain."""


class ChartDomainError(ValueError):
    """Requested point lies outside the declared domain box."""


class NotSpherical(ValueError):
    """Chart evaluation left the unit sphere."""


@dataclass(frozen=True)
class ImmersionChart:
    """Parametric chart u in R^m -> f(u) on the unit sphere in R^{n+1}.

    ``eval_fn`` maps a sequence of m scalars to n+1 scalars and must accept
    dual numbers when ``derivative_mode`` is forward-dual.  ``periodic``
    marks coordinates whose formulas extend beyond the box (finite
    difference stencils may then cross the box edge).
    """

    m: int
    n: int
    eval_fn: Callable[[Sequence], Sequence]
    domain_box: tuple
    periodic: tuple = None
    derivative_mode: str = FORWARD_DUAL
    fd_step: float = 1e-5
    name: str = "chart"

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.domain_box)
        if len(box) != self.m:
            raise ValueError("domain_box length must equal m")
        per = self.periodic
        per = tuple(bool(b) for b in per) if per is not None else (False,) * self.m
        if len(per) != self.m:
            raise ValueError("periodic length must equal m")
        if self.derivative_mode not in (FINITE_DIFFERENCE, FORWARD_DUAL):
            raise ValueError(f"unknown derivative_mode {self.derivative_mode!r}")
        object.__setattr__(self, "domain_box", box)
        object.__setattr__(self, "periodic", per)

    # -- domain handling ---------------------------------------------------

    def check_point(self, u, radius=0.0):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            raise ChartDomainError(f"expected {self.m} coordinates, got shape {u.shape}")
        for k, ((lo, hi), per) in enumerate(zip(self.domain_box, self.periodic)):
            if per:
                continue
            tol = 1e-9 * max(1.0, hi - lo)
            if u[k] < lo - tol or u[k] > hi + tol:
                raise ChartDomainError(
                    f"coordinate {k} = {u[k]!r} outside [{lo}, {hi}]")
            if radius > 0.0 and (u[k] - radius < lo - tol or u[k] + radius > hi + tol):
                raise DomainBoundaryError(
                    f"stencil of radius {radius:.3e} at coordinate {k} = {u[k]!r} "
                    f"crosses the domain boundary [{lo}, {hi}]")
        return u

    # -- evaluation and derivatives -----------------------------------------

    def value(self, u):
        vals = self.eval_fn([float(x) for x in u])
        out = np.array([dual_value(c) for c in vals], dtype=float)
        if out.shape != (self.n + 1,):
            raise ValueError(f"chart returned {out.shape[0]} components, "
                             f"expected {self.n + 1}")
        norm = np.linalg.norm(out)
        if abs(norm - 1.0) > 1e-8:
            raise NotSpherical(f"|f(u)| = {norm!r} at u = {np.asarray(u)!r}")
        return out

    def _step(self, u, k, base):
        return base * max(1.0, abs(float(u[k])))

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        if self.derivative_mode == FORWARD_DUAL:
            cols = []
            for k in range(self.m):
                seeded = [Dual(float(x), 1.0 if j == k else 0.0)
                          for j, x in enumerate(u)]
                vals = self.eval_fn(seeded)
                cols.append([dual_deriv(c) for c in vals])
            return np.array(cols, dtype=float).T
        cols = []
        for k in range(self.m):
            h = self._step(u, k, self.fd_step)
            e = np.zeros(self.m)
            e[k] = h
            cols.append((self.value(u + e) - self.value(u - e)) / (2 * h))
        return np.array(cols, dtype=float).T

    def hessian_step(self):
        if self.derivative_mode == FORWARD_DUAL:
            return self.fd_step
        return self.fd_step ** (2.0 / 3.0)

    def outer_step(self):
        """Step for differences over already-differenced data."""
        return self.fd_step ** (2.0 / 3.0)

    def hessian(self, u, step=None):
        """Ambient Hessian H[:, i, k] = d_k d_i f via differences of the
        Jacobian; symmetry in (i, k) is a diagnostic, not enforced."""
        u = np.asarray(u, dtype=float)
        h0 = self.hessian_step() if step is None else float(step)
        out = np.empty((self.n + 1, self.m, self.m))
        for k in range(self.m):
            h = self._step(u, k, h0)
            e = np.zeros(self.m)
            e[k] = h
            out[:, :, k] = (self.jacobian(u + e) - self.jacobian(u - e)) / (2 * h)
        return out


def chart_from_expressions(texts, m, n, domain_box, periodic=None,
                           derivative_mode=FORWARD_DUAL, fd_step=1e-5,
                           name="custom", extra_bindings=None):
    """Build a chart from n+1 expression strings over u1..um."""
    if len(texts) != n + 1:
        raise ValueError(f"need {n + 1} component expressions, got {len(texts)}")
    asts = [exprdsl.parse(t) for t in texts]
    allowed = {f"u{k + 1}" for k in range(m)} | set((extra_bindings or {}).keys())
    for t, ast in zip(texts, asts):
        bad = exprdsl.free_variables(ast) - allowed
        if bad:
            raise ValueError(f"expression {t!r} uses undeclared variables {sorted(bad)}")
    fixed = dict(extra_bindings or {})

    def eval_fn(u):
        bindings = {f"u{k + 1}": x for k, x in enumerate(u)}
        bindings.update(fixed)
        return [exprdsl.evaluate(ast, bindings) for ast in asts]

    return ImmersionChart(m=m, n=n, eval_fn=eval_fn, domain_box=domain_box,
                          periodic=periodic, derivative_mode=derivative_mode,
                          fd_step=fd_step, name=name)


# -- frames ------------------------------------------------------------------

def gram_schmidt_complement(vectors, seeds, threshold=1e-6, require_all=False):
    """Orthonormal vectors spanning the complement of ``vectors`` built by
    projecting the candidate ``seeds`` in order.

    Returns (basis, used_indices).  Seeds whose projection falls below the
    threshold are skipped unless ``require_all`` is set, in which case a
    small pivot is an error.
    """
    basis = []
    used = []
    for idx, seed in enumerate(seeds):
        cand = np.array(seed, dtype=float)
        for b in vectors:
            cand = cand - (cand @ b) * b
        for b in basis:
            cand = cand - (cand @ b) * b
        norm = np.linalg.norm(cand)
        if norm <= threshold:
            if require_all:
                raise DegenerateImmersion(
                    f"frame seed {idx} became degenerate (pivot {norm:.3e})")
            continue
        basis.append(cand / norm)
        used.append(idx)
    return basis, used


def _orthonormal_tangents(jac):
    q, _ = np.linalg.qr(jac)
    return [q[:, k] for k in range(jac.shape[1])]


def normal_basis(point, jac, threshold=1e-6):
    """Deterministic orthonormal basis of the normal space at a chart point,
    from standard-basis seeds in index order."""
    dim = point.shape[0]
    spanned = [point / np.linalg.norm(point)] + _orthonormal_tangents(jac)
    seeds = list(np.eye(dim))
    basis, _ = gram_schmidt_complement(spanned, seeds, threshold=threshold)
    want = dim - 1 - jac.shape[1]
    if len(basis) != want:
        raise DegenerateImmersion(
            f"normal basis has {len(basis)} vectors, expected {want}")
    return basis


# -- shape data ----------------------------------------------------------------

@dataclass
class ShapeData:
    """Pointwise extrinsic data of a chart.

    ``second_form`` holds the components of the second fundamental form in
    the normal frame, shape (m, m, n-m); ``second_form_ambient`` the same
    tensor as ambient vectors, shape (m, m, n+1).  ``mean_curvature`` is the
    metric trace as an ambient normal vector.  ``nabla_second_form`` is
    filled on request by :func:`second_form_derivative`.
    """

    u: np.ndarray
    point: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    tangent_frame: np.ndarray
    tangent_on: list
    normal_frame: list
    normal_projector: np.ndarray
    second_form: np.ndarray
    second_form_ambient: np.ndarray
    mean_curvature: np.ndarray
    nabla_second_form: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def m(self):
        return self.metric.shape[0]

    @property
    def codim(self):
        return len(self.normal_frame)


def _second_form_ambient(chart, u, hess_step=None):
    """(point, jac, metric, projector, ambient second form) at u."""
    p = chart.value(u)
    jac = chart.jacobian(u)
    sing = np.linalg.svd(jac, compute_uv=False)
    if sing[-1] <= 1e-8 * sing[0]:
        raise DegenerateImmersion(
            f"jacobian rank-deficient at u = {np.asarray(u)!r} "
            f"(singular values {sing!r})")
    g = jac.T @ jac
    tangents = _orthonormal_tangents(jac)
    proj = np.eye(chart.n + 1) - np.outer(p, p)
    for t in tangents:
        proj -= np.outer(t, t)
    hess = chart.hessian(u, step=hess_step)
    ii_amb = np.einsum("ab,bij->ija", proj, hess)
    return p, jac, g, tangents, proj, ii_amb


def shape_data(chart, u, hess_step=None):
    """All pointwise extrinsic data of the chart at u."""
    u = chart.check_point(u)
    p, jac, g, tangents, proj, ii_amb = _second_form_ambient(chart, u, hess_step)
    g_inv = np.linalg.inv(g)
    frame = normal_basis(p, jac)
    ii = np.einsum("ija,ka->ijk", ii_amb, np.array(frame))
    h_f = np.einsum("ij,ija->a", g_inv, ii_amb)
    return ShapeData(u=u, point=p, metric=g, metric_inv=g_inv,
                     tangent_frame=jac, tangent_on=tangents,
                     normal_frame=frame, normal_projector=proj,
                     second_form=ii, second_form_ambient=ii_amb,
                     mean_curvature=h_f)


def check_unit_normal(sd, xi, tol=1e-8):
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > tol:
        raise ValueError(f"normal vector is not unit (norm {np.linalg.norm(xi)!r})")
    if abs(xi @ sd.point) > tol or max(abs(xi @ t) for t in sd.tangent_on) > tol:
        raise ValueError("vector is not normal to the immersion")
    return xi


def shape_operator(sd, xi):
    """Shape operator for the unit normal xi, as a matrix in the coordinate
    tangent basis: metric(A X, Y) = <II(X, Y), xi>."""
    xi = check_unit_normal(sd, xi)
    s = sd.second_form_ambient @ xi
    return sd.metric_inv @ s


def shape_operator_sym(sd, xi):
    """Shape operator in a metric-orthonormal basis (symmetric matrix with
    the principal curvatures as eigenvalues)."""
    xi = check_unit_normal(sd, xi)
    s = sd.second_form_ambient @ xi
    chol = np.linalg.cholesky(sd.metric)
    tmp = scipy.linalg.solve_triangular(chol, s, lower=True)
    return scipy.linalg.solve_triangular(chol, tmp.T, lower=True).T


def principal_curvatures(sd, xi):
    """Eigenvalues of the shape operator, ascending."""
    return np.linalg.eigvalsh(shape_operator_sym(sd, xi))


def second_form_derivative(chart, u, step=None):
    """Covariant derivative of the second fundamental form at u.

    Returns an (m, m, m, n+1) array D[k, i, j] = (nabla II)(d_k, d_i, d_j)
    as ambient normal vectors: the normal-space projection of the coordinate
    derivative of the ambient second form minus the Christoffel corrections
    of both tangent slots.  In a space form this tensor is totally symmetric
    in (k, i, j), which the tests use as an oracle.
    """
    u = np.asarray(u, dtype=float)
    h0 = chart.outer_step() if step is None else float(step)
    radius = max(h0 * max(1.0, abs(float(u[k]))) for k in range(chart.m))
    chart.check_point(u, radius=radius)

    p0, jac0, g0, tangents0, proj0, ii0 = _second_form_ambient(chart, u)
    g_inv = np.linalg.inv(g0)

    m = chart.m
    dii = np.empty((m, m, m, chart.n + 1))
    dg = np.empty((m, m, m))
    dg_step = chart.fd_step if chart.derivative_mode == FORWARD_DUAL else h0
    for k in range(m):
        h = h0 * max(1.0, abs(float(u[k])))
        e = np.zeros(m)
        e[k] = h
        _, _, _, _, _, ii_hi = _second_form_ambient(chart, u + e)
        _, _, _, _, _, ii_lo = _second_form_ambient(chart, u - e)
        dii[k] = (ii_hi - ii_lo) / (2 * h)
        hg = dg_step * max(1.0, abs(float(u[k])))
        eg = np.zeros(m)
        eg[k] = hg
        jac_hi = chart.jacobian(u + eg)
        jac_lo = chart.jacobian(u - eg)
        dg[k] = (jac_hi.T @ jac_hi - jac_lo.T @ jac_lo) / (2 * hg)

    # Christoffel symbols gamma[l, k, i] = 1/2 g^{lr}(d_k g_{ri} + d_i g_{rk} - d_r g_{ki})
    gamma = np.empty((m, m, m))
    for l in range(m):
        for k in range(m):
            for i in range(m):
                gamma[l, k, i] = 0.5 * sum(
                    g_inv[l, r] * (dg[k][r, i] + dg[i][r, k] - dg[r][k, i])
                    for r in range(m))

    out = np.einsum("ab,kijb->kija", proj0, dii)
    out -= np.einsum("lki,ljb->kijb", gamma, ii0)
    out -= np.einsum("lkj,ilb->kijb", gamma, ii0)
    return out


def nabla_ii_components(chart, u, step=None):
    """Frame components (m, m, m, n-m) of the covariant derivative of the
    second form, expressed in the pointwise normal frame at u."""
    d = second_form_derivative(chart, u, step=step)
    sd = shape_data(chart, u)
    return np.einsum("kijb,ab->kija", d, np.array(sd.normal_frame))


# -- conformal shape form -----------------------------------------------------

@dataclass(frozen=True)
class ConformalReport:
    """Sampled test of the proportionality A(xi)^2 = r(xi)^2 I."""

    samples: list
    is_conformal: bool
    max_residual: float
    tolerance: float


class NotConformal(ValueError):
    """Raised by operations whose hypotheses need conformal shape form."""


def conformal_residual(sd, xi):
    """(r, residual): r^2 = tr(A^2)/m and the Frobenius defect of
    A^2 - r^2 I in a metric-orthonormal basis."""
    a = shape_operator_sym(sd, xi)
    a2 = a @ a
    r2 = float(np.trace(a2)) / sd.m
    residual = float(np.linalg.norm(a2 - r2 * np.eye(sd.m)))
    return np.sqrt(max(r2, 0.0)), residual


def conformal_report(chart, plan, tolerance=1e-6):
    """Evaluate the conformal-shape-form defect over a sampling plan.

    ``plan`` is a sequence of (u, xi) pairs with xi a unit normal at u,
    or (u, coeffs) with coefficients over the pointwise normal frame.
    """
    plan = list(plan)
    if not plan:
        raise ValueError("empty sampling plan")
    samples = []
    max_residual = 0.0
    for u, spec in plan:
        sd = shape_data(chart, u)
        xi = np.asarray(spec, dtype=float)
        if xi.shape[0] == sd.codim and sd.codim != chart.n + 1:
            frame = np.array(sd.normal_frame)
            xi = xi @ frame
        xi = xi / np.linalg.norm(xi)
        r, residual = conformal_residual(sd, xi)
        samples.append((np.asarray(u, dtype=float), xi, r, residual))
        max_residual = max(max_residual, residual)
    return ConformalReport(samples=samples, is_conformal=max_residual < tolerance,
                           max_residual=max_residual, tolerance=tolerance)


def normal_sample_plan(chart, points, per_point, rng):
    """Random unit normals over the given chart points."""
    plan = []
    for u in points:
        sd = shape_data(chart, u)
        for _ in range(per_point):
            coeffs = rng.standard_normal(sd.codim)
            plan.append((np.asarray(u, dtype=float), coeffs))
    return plan
