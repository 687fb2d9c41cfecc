"""Embedded models of the sphere, its unit tangent bundle, and the space
of oriented great circles.

The unit sphere bundle is modelled as pairs ``(p, v)`` of orthonormal
vectors in R^{n+1}; tangent vectors are ambient pairs ``(pdot, vdot)``
subject to the linearized constraints.  The manifold of oriented great
circles is modelled as oriented 2-planes through unit decomposable wedge
vectors ``p ^ v`` in the exterior square Lambda^2 R^{n+1}, whose Euclidean
metric restricted to the embedding coincides with the quotient normal
metric (this identity is tested, not assumed, by the suite).

Conventions (pinned by tests against the algebra in :mod:`liealg`):

* contact form  ``theta(Z) = pdot . v``; the Reeb vector is ``(v, -p)``
  and generates geodesic flow;
* Sasaki metric ``h(Z, W) = pdot_Z . pdot_W + Dv_Z . Dv_W`` with
  ``Dv = vdot - (p . vdot) p``;
* complex structure on the contact distribution
  ``J(a, w) = (-w, a)`` for contact pairs (both components orthogonal to
  p and v), and its quotient action on wedge tangents
  ``a ^ v + p ^ b  ->  (-b) ^ v + p ^ a``;
* symplectic form ``lambda(Z, W) = h(JZ, W)``, which equals ``-d theta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLANE_TOL = 1e-10


class BasePointMismatch(ValueError):
    pass


class NotTangent(ValueError):
    pass


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector in R^{n+1}; renormalized at construction."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        norm = np.linalg.norm(p)
        if norm < 1e-12:
            raise ValueError("cannot normalize near-zero vector")
        p = p / norm
        p.flags.writeable = False
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class UnitSpherePoint:
    """Orthonormal pair (p, v): a point of the unit sphere bundle."""

    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if p.shape != v.shape or p.ndim != 1:
            raise ValueError("p and v must be vectors of equal dimension")
        p = p / np.linalg.norm(p)
        v = v - (v @ p) * p
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            raise ValueError("v is (nearly) parallel to p")
        v = v / norm
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)

    @property
    def ambient_dim(self):
        return self.p.shape[0]


@dataclass(frozen=True)
class AmbientTangentUS:
    """Tangent vector of the unit sphere bundle in ambient coordinates.

    Constraints pdot.p = 0, vdot.v = 0, pdot.v + p.vdot = 0 are enforced by
    exact orthogonal projection; inputs violating them grossly are rejected.
    """

    base: UnitSpherePoint
    pdot: np.ndarray
    vdot: np.ndarray

    def __post_init__(self):
        p, v = self.base.p, self.base.v
        pdot = np.asarray(self.pdot, dtype=float)
        vdot = np.asarray(self.vdot, dtype=float)
        violation = max(abs(pdot @ p), abs(vdot @ v), abs(pdot @ v + p @ vdot))
        scale = 1.0 + np.linalg.norm(pdot) + np.linalg.norm(vdot)
        if violation > 1e-6 * scale:
            raise NotTangent(f"constraint violation {violation:.3e} too large")
        # the three constraint normals (p,0), (0,v), (v,p)/sqrt(2) are orthonormal
        pdot = pdot - (pdot @ p) * p
        vdot = vdot - (vdot @ v) * v
        mixed = 0.5 * (pdot @ v + p @ vdot)
        pdot = pdot - mixed * v
        vdot = vdot - mixed * p
        pdot.flags.writeable = False
        vdot.flags.writeable = False
        object.__setattr__(self, "pdot", pdot)
        object.__setattr__(self, "vdot", vdot)

    @property
    def covariant_v(self):
        """Covariant derivative of v along the footpoint motion."""
        p = self.base.p
        return self.vdot - (p @ self.vdot) * p


def _same_base(x, z):
    if np.linalg.norm(x.p - z.base.p) > 1e-10 or np.linalg.norm(x.v - z.base.v) > 1e-10:
        raise BasePointMismatch("tangent vector is based at a different point")


def group_act(g, x):
    """Rotate a unit-sphere-bundle point by g in SO(n+1)."""
    g = np.asarray(g, dtype=float)
    residual = np.linalg.norm(g.T @ g - np.eye(g.shape[0]), ord=np.inf)
    if residual > 1e-10:
        raise ValueError(f"matrix is not orthogonal (residual {residual:.3e})")
    if np.linalg.det(g) < 0:
        raise ValueError("matrix has negative determinant")
    return UnitSpherePoint(g @ x.p, g @ x.v)


def contact_form(x, z):
    """theta(Z) = pdot . v; its kernel is the contact distribution."""
    _same_base(x, z)
    return float(z.pdot @ x.v)


def sasaki_metric(x, z, w):
    """Sasaki metric pdot.pdot' + Dv.Dv' on tangents at x."""
    _same_base(x, z)
    _same_base(x, w)
    return float(z.pdot @ w.pdot + z.covariant_v @ w.covariant_v)


def reeb_vector(x):
    """Generator of geodesic flow at x; unit length, theta = 1."""
    return AmbientTangentUS(x, x.v, -x.p)


def geodesic_flow(x, t):
    """Flow (p, v) -> (cos t p + sin t v, -sin t p + cos t v)."""
    c, s = np.cos(t), np.sin(t)
    return UnitSpherePoint(c * x.p + s * x.v, -s * x.p + c * x.v)


def project_foot(x):
    """Footpoint projection (p, v) -> p."""
    return SpherePoint(x.p)


def project_direction(x):
    """Direction projection (p, v) -> v; swaps with the footpoint under a
    quarter turn of the geodesic flow."""
    return SpherePoint(x.v)


def complex_structure(x, z):
    """J with J(Reeb) = 0, acting on contact pairs by (a, w) -> (-w, a).

    The Reeb component of z is stripped first, so J is defined on all of
    the tangent space and squares to -identity on the contact distribution.
    """
    _same_base(x, z)
    th = contact_form(x, z)
    a = z.pdot - th * x.v
    w = z.covariant_v  # the Reeb vector has zero covariant part
    return AmbientTangentUS(x, -w, a)


def symplectic_form(x, z, w):
    """lambda(Z, W) = h(JZ, W) on contact vectors; equals -d theta."""
    return sasaki_metric(x, complex_structure(x, z), w)


# -- exterior square utilities ----------------------------------------------

def wedge_pairs(dim):
    """Lexicographic index pairs (i, j), i < j, for the wedge basis."""
    return [(i, j) for i in range(dim) for j in range(i + 1, dim)]


def wedge(a, b):
    """Wedge product a ^ b as a vector over the lexicographic pair basis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    outer = np.outer(a, b)
    skew = outer - outer.T
    iu = np.triu_indices(a.shape[0], k=1)
    return skew[iu]


@dataclass(frozen=True)
class OrientedPlane:
    """Oriented 2-plane represented by an orthonormal pair and its unit
    wedge vector (the decomposable representative is canonical)."""

    rep: UnitSpherePoint
    plucker: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.plucker, dtype=float)
        w = w / np.linalg.norm(w)
        w.flags.writeable = False
        object.__setattr__(self, "plucker", w)

    @property
    def ambient_dim(self):
        return self.rep.ambient_dim

    def close_to(self, other, tol=PLANE_TOL):
        return np.linalg.norm(self.plucker - other.plucker) <= tol


def span_plane(x):
    """Oriented plane spanned by (p, v); invariant under geodesic flow."""
    return OrientedPlane(rep=x, plucker=wedge(x.p, x.v))


def span_plane_pushforward(x, z):
    """Differential of span_plane: Z = (pdot, vdot) -> pdot ^ v + p ^ vdot."""
    _same_base(x, z)
    return wedge(z.pdot, x.v) + wedge(x.p, z.vdot)


def _orthocomplement(p, v):
    """Deterministic orthonormal basis of the complement of span(p, v)."""
    dim = p.shape[0]
    basis = []
    for k in range(dim):
        cand = np.zeros(dim)
        cand[k] = 1.0
        cand = cand - (cand @ p) * p - (cand @ v) * v
        for b in basis:
            cand = cand - (cand @ b) * b
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            basis.append(cand / norm)
        if len(basis) == dim - 2:
            break
    if len(basis) != dim - 2:
        raise RuntimeError("failed to complete orthonormal basis")
    return basis


def tangent_basis_plane(q):
    """Orthonormal basis of the tangent space at q inside the wedge space.

    Returns the 2(dim-2) wedge vectors {a ^ v, p ^ a} over an orthonormal
    basis {a} of the complement of the plane.
    """
    p, v = q.rep.p, q.rep.v
    comp = _orthocomplement(p, v)
    return [wedge(a, v) for a in comp] + [wedge(p, a) for a in comp]


def plane_tangent_project(q, x):
    """Orthogonal projection of a wedge vector onto the tangent space at q."""
    basis = tangent_basis_plane(q)
    out = np.zeros_like(np.asarray(x, dtype=float))
    for b in basis:
        out = out + (x @ b) * b
    return out


def _check_plane_tangent(q, x):
    x = np.asarray(x, dtype=float)
    residual = np.linalg.norm(x - plane_tangent_project(q, x))
    if residual > 1e-8 * (1.0 + np.linalg.norm(x)):
        raise NotTangent(f"wedge vector is not tangent at q (residual {residual:.3e})")
    return x


def plane_inner(q, x, y):
    """Riemannian metric at q: restriction of the wedge Euclidean product."""
    x = _check_plane_tangent(q, x)
    y = _check_plane_tangent(q, y)
    return float(x @ y)


def plane_rotate(q, x):
    """Complex structure at q: components (a, b) over {a^v, p^a} -> (-b, a)."""
    x = _check_plane_tangent(q, x)
    p, v = q.rep.p, q.rep.v
    comp = _orthocomplement(p, v)
    out = np.zeros_like(x)
    for a in comp:
        av, pa = wedge(a, v), wedge(p, a)
        out = out + (x @ av) * pa - (x @ pa) * av
    return out


def plane_symplectic(q, x, y):
    """Kaehler form at q: plane_inner(plane_rotate(x), y)."""
    return plane_inner(q, plane_rotate(q, x), y)
