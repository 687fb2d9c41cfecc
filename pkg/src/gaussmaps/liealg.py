"""Skew-symmetric matrix algebra for rotations of R^{n+1}.

Everything downstream is anchored to the algebra of skew-symmetric
(n+1)x(n+1) matrices with the invariant inner product
``<a, b> = -tr(a b) / 2``, under which the elementary generators
``E_ij = e_i e_j^T - e_j e_i^T`` (i < j) form an orthonormal basis.

The distinguished unit element ``flow_generator(n)`` rotates the last two
coordinate axes; it generates the circle action whose orbits are the unit
tangent great circles, and its adjoint action ``ad_flow`` is a complex
structure on the contact directions.  The four-way splitting produced by
``split_basis`` separates, relative to the base flag (e_{n+1}, e_n):

* ``isotropy``    rotations fixing both e_n and e_{n+1},
* ``vertical``    generators of the fiber directions over the base point,
* ``horizontal``  generators of contact-horizontal base motions,
* ``flow``        the span of the flow generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraElement:
    """A skew-symmetric matrix; inputs are skew-symmetrized exactly."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        m = 0.5 * (m - m.T)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n_plus_1(self):
        return self.matrix.shape[0]


def elementary(dim, i, j):
    """E_ij = e_i e_j^T - e_j e_i^T with 0-based indices i != j."""
    if i == j:
        raise ValueError("elementary generator needs distinct indices")
    m = np.zeros((dim, dim))
    m[i, j] = 1.0
    m[j, i] = -1.0
    return AlgebraElement(m)


def _check_dims(a, b):
    if a.n_plus_1 != b.n_plus_1:
        raise DimensionMismatch(f"dimensions differ: {a.n_plus_1} vs {b.n_plus_1}")


def inner_product(a, b):
    """Invariant inner product -tr(ab)/2; orthonormal on the E_ij."""
    _check_dims(a, b)
    return -0.5 * float(np.trace(a.matrix @ b.matrix))


def bracket(a, b):
    _check_dims(a, b)
    return AlgebraElement(a.matrix @ b.matrix - b.matrix @ a.matrix)


def flow_generator(n):
    """Unit element rotating axes n, n+1 (1-based); defined for n >= 2."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return elementary(n + 1, n - 1, n)


def ad_flow(a):
    """Bracket with the flow generator: a -> [nu, a].

    Restricted to the contact directions (vertical + horizontal) this is an
    isometric complex structure; it kills the flow line and the isotropy
    subalgebra.
    """
    nu = flow_generator(a.n_plus_1 - 1)
    return bracket(nu, a)


def symplectic_pairing(a, b):
    """<nu, [a, b]>, the invariant skew pairing; equals <ad_flow(a), b>."""
    nu = flow_generator(a.n_plus_1 - 1)
    return inner_product(nu, bracket(a, b))


@dataclass(frozen=True)
class SplitBasis:
    """Orthonormal basis of the algebra split along the base flag.

    The four lists are jointly orthonormal.  Index lists address the
    composite subspaces used by the homogeneous models: ``point_stabilizer``
    (isotropy + vertical) fixes the base sphere point, ``base_tangent``
    (horizontal + flow) realizes its tangent space, ``flag_moving``
    (everything but the isotropy) realizes the tangent space of the unit
    sphere bundle, and ``contact`` (vertical + horizontal) the contact
    directions.
    """

    n: int
    isotropy: list = field(repr=False)
    vertical: list = field(repr=False)
    horizontal: list = field(repr=False)
    flow: list = field(repr=False)

    @property
    def all_elements(self):
        return self.isotropy + self.vertical + self.horizontal + self.flow

    @property
    def point_stabilizer(self):
        return self.isotropy + self.vertical

    @property
    def base_tangent(self):
        return self.horizontal + self.flow

    @property
    def flag_moving(self):
        return self.vertical + self.horizontal + self.flow

    @property
    def contact(self):
        return self.vertical + self.horizontal


def split_basis(n):
    """Standard orthonormal split basis for the algebra on R^{n+1}.

    Elementary generators, 0-based: isotropy {E_ij : i<j<=n-2}, vertical
    {E_{i,n-1} : i<=n-2}, horizontal {E_{i,n} : i<=n-2}, flow {E_{n-1,n}}.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    dim = n + 1
    isotropy = [elementary(dim, i, j) for i in range(n - 1) for j in range(i + 1, n - 1)]
    vertical = [elementary(dim, i, n - 1) for i in range(n - 1)]
    horizontal = [elementary(dim, i, n) for i in range(n - 1)]
    flow = [flow_generator(n)]
    return SplitBasis(n=n, isotropy=isotropy, vertical=vertical,
                      horizontal=horizontal, flow=flow)


def project(a, elements):
    """Orthogonal projection of a onto the span of orthonormal elements."""
    out = np.zeros_like(a.matrix)
    for e in elements:
        out = out + inner_product(a, e) * e.matrix
    return AlgebraElement(out)


def split(a, basis):
    """Components of a in (isotropy, vertical, horizontal, flow).

    The four parts are orthogonal projections and re-sum to a.
    """
    if a.n_plus_1 != basis.n + 1:
        raise DimensionMismatch(
            f"element dimension {a.n_plus_1} does not match basis n={basis.n}")
    return (project(a, basis.isotropy), project(a, basis.vertical),
            project(a, basis.horizontal), project(a, basis.flow))


def exp(a):
    """Group element exp(a) as an orthogonal matrix."""
    return scipy.linalg.expm(a.matrix)


def adjoint(g, a):
    """Ad_g(a) = g a g^T for orthogonal g."""
    return AlgebraElement(g @ a.matrix @ g.T)
