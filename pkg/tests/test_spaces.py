import numpy as np
import pytest

from gaussmaps import liealg, spaces
from gaussmaps.liealg import flow_generator, project, split_basis
from gaussmaps.spaces import (
    AmbientTangentUS, NotTangent, UnitSpherePoint, contact_form,
    complex_structure, geodesic_flow, group_act, plane_inner, plane_rotate,
    plane_symplectic, plane_tangent_project, project_direction, project_foot,
    reeb_vector, sasaki_metric, span_plane, span_plane_pushforward,
    symplectic_form, tangent_basis_plane, wedge, wedge_pairs,
)


def base_flag(n):
    """The standard base point (e_{n+1}, e_n)."""
    p = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p[n] = 1.0
    v[n - 1] = 1.0
    return UnitSpherePoint(p, v)


def random_usp(rng, n):
    p = rng.standard_normal(n + 1)
    v = rng.standard_normal(n + 1)
    return UnitSpherePoint(p, v)


def random_tangent(rng, x):
    n1 = x.p.shape[0]
    pdot = rng.standard_normal(n1)
    vdot = rng.standard_normal(n1)
    p, v = x.p, x.v
    pdot = pdot - (pdot @ p) * p
    vdot = vdot - (vdot @ v) * v
    mixed = 0.5 * (pdot @ v + p @ vdot)
    return AmbientTangentUS(x, pdot - mixed * v, vdot - mixed * p)


def element_tangent(x, eta):
    """Tangent at x generated by an algebra element: (eta p, eta v)."""
    return AmbientTangentUS(x, eta.matrix @ x.p, eta.matrix @ x.v)


def test_unit_sphere_point_invariants():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = random_usp(rng, 4)
        assert abs(np.linalg.norm(x.p) - 1) < 1e-12
        assert abs(np.linalg.norm(x.v) - 1) < 1e-12
        assert abs(x.p @ x.v) < 1e-12


def test_group_act_identity_and_orthogonality_check():
    x = base_flag(3)
    y = group_act(np.eye(4), x)
    assert np.allclose(y.p, x.p) and np.allclose(y.v, x.v)
    with pytest.raises(ValueError):
        group_act(np.eye(4) * 1.1, x)


def test_group_act_flow_generator_matches_geodesic_flow():
    for n in (2, 3, 4):
        x = base_flag(n)
        g = liealg.exp(flow_generator(n))
        acted = group_act(g, x)
        flowed = geodesic_flow(x, 1.0)
        assert np.linalg.norm(acted.p - flowed.p) < 1e-13
        assert np.linalg.norm(acted.v - flowed.v) < 1e-13


def test_group_action_preserves_structures():
    rng = np.random.default_rng(1)
    n = 4
    for _ in range(10):
        x = random_usp(rng, n)
        z = random_tangent(rng, x)
        w = random_tangent(rng, x)
        g = liealg.exp(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))))
        gx = group_act(g, x)
        gz = AmbientTangentUS(gx, g @ z.pdot, g @ z.vdot)
        gw = AmbientTangentUS(gx, g @ w.pdot, g @ w.vdot)
        assert contact_form(gx, gz) == pytest.approx(contact_form(x, z), abs=1e-12)
        assert sasaki_metric(gx, gz, gw) == pytest.approx(
            sasaki_metric(x, z, w), abs=1e-10)
        assert symplectic_form(gx, gz, gw) == pytest.approx(
            symplectic_form(x, z, w), abs=1e-10)


def test_contact_form_values():
    rng = np.random.default_rng(2)
    x = random_usp(rng, 3)
    assert contact_form(x, reeb_vector(x)) == pytest.approx(1.0, abs=1e-14)
    # pdot orthogonal to v gives zero
    z = random_tangent(rng, x)
    zc = AmbientTangentUS(x, z.pdot - (z.pdot @ x.v) * x.v,
                          z.vdot + (z.pdot @ x.v) * x.p)
    assert contact_form(x, zc) == pytest.approx(0.0, abs=1e-13)


def test_sasaki_metric_reeb_norm_and_flat_restriction():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = random_usp(rng, 4)
        assert sasaki_metric(x, reeb_vector(x), reeb_vector(x)) == pytest.approx(
            1.0, abs=1e-12)
        # on the contact distribution the metric is the flat ambient product
        z = random_tangent(rng, x)
        w = random_tangent(rng, x)
        for t in (z, w):
            assert abs(t.pdot @ x.p) < 1e-12
        zc = AmbientTangentUS(x, z.pdot - (z.pdot @ x.v) * x.v,
                              z.vdot + (z.pdot @ x.v) * x.p)
        wc = AmbientTangentUS(x, w.pdot - (w.pdot @ x.v) * x.v,
                              w.vdot + (w.pdot @ x.v) * x.p)
        flat = zc.pdot @ wc.pdot + zc.vdot @ wc.vdot
        assert sasaki_metric(x, zc, wc) == pytest.approx(flat, abs=1e-12)


def test_sasaki_metric_positive_definite():
    rng = np.random.default_rng(4)
    n = 3
    x = random_usp(rng, n)
    frame = [random_tangent(rng, x) for _ in range(2 * n - 1)]
    gram = np.array([[sasaki_metric(x, a, b) for b in frame] for a in frame])
    # random frames are almost surely nondegenerate
    assert np.linalg.eigvalsh(gram).min() > 1e-6


def test_sasaki_metric_matches_algebra_inner_product_at_base():
    # h(Z_eta, Z_zeta) = <eta, zeta> for eta, zeta in the moving subspace
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        basis = split_basis(n)
        x = base_flag(n)
        for _ in range(5):
            eta = project(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))),
                          basis.flag_moving)
            zeta = project(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))),
                           basis.flag_moving)
            got = sasaki_metric(x, element_tangent(x, eta), element_tangent(x, zeta))
            assert got == pytest.approx(liealg.inner_product(eta, zeta), abs=1e-13)


def test_geodesic_flow_special_values():
    rng = np.random.default_rng(6)
    x = random_usp(rng, 4)
    y0 = geodesic_flow(x, 0.0)
    assert np.allclose(y0.p, x.p) and np.allclose(y0.v, x.v)
    yq = geodesic_flow(x, np.pi / 2)
    assert np.allclose(yq.p, x.v, atol=1e-15) and np.allclose(yq.v, -x.p, atol=1e-15)
    yf = geodesic_flow(x, 2 * np.pi)
    assert np.allclose(yf.p, x.p, atol=1e-15) and np.allclose(yf.v, x.v, atol=1e-15)


def test_projections():
    rng = np.random.default_rng(7)
    x = random_usp(rng, 3)
    assert np.allclose(project_foot(x).p, x.p)
    assert np.allclose(project_direction(x).p, x.v)
    assert np.allclose(project_foot(geodesic_flow(x, np.pi / 2)).p,
                       project_direction(x).p, atol=1e-15)


def test_projections_are_riemannian_submersions():
    # horizontal lift lengths are preserved and fibers are orthogonal to
    # horizontal spaces, for both the footpoint and direction projections
    rng = np.random.default_rng(16)
    n = 3
    for _ in range(10):
        x = random_usp(rng, n)
        u = rng.standard_normal(n + 1)
        u = u - (u @ x.p) * x.p
        u = u / np.linalg.norm(u)
        # footpoint projection: horizontal lift of u is (u, -(u.v)p)
        lift = AmbientTangentUS(x, u, -(u @ x.v) * x.p)
        assert sasaki_metric(x, lift, lift) == pytest.approx(u @ u, abs=1e-12)
        for w in _vertical_basis(x):
            assert sasaki_metric(x, lift, w) == pytest.approx(0.0, abs=1e-12)
        # direction projection: fibers have vdot = 0 ... lift of w at v is
        # (w - (w.p)v ... ) use characterization: vertical = {(q, 0): q perp p, v}
        q = rng.standard_normal(n + 1)
        q = q - (q @ x.p) * x.p - (q @ x.v) * x.v
        vert_bar = AmbientTangentUS(x, q, np.zeros(n + 1))
        w = rng.standard_normal(n + 1)
        w = w - (w @ x.v) * x.v
        w = w / np.linalg.norm(w)
        lift_bar = AmbientTangentUS(x, -(w @ x.p) * x.v, w)
        assert sasaki_metric(x, lift_bar, lift_bar) == pytest.approx(w @ w, abs=1e-12)
        assert sasaki_metric(x, lift_bar, vert_bar) == pytest.approx(0.0, abs=1e-12)


def _vertical_basis(x):
    n1 = x.p.shape[0]
    out = []
    for k in range(n1):
        q = np.zeros(n1)
        q[k] = 1.0
        q = q - (q @ x.p) * x.p - (q @ x.v) * x.v
        for b in out:
            q = q - (q @ b.vdot) * b.vdot
        norm = np.linalg.norm(q)
        if norm > 1e-6:
            out.append(AmbientTangentUS(x, np.zeros(n1), q / norm))
    return out


def test_parallel_direction_curves_are_horizontal():
    # along a great circle with parallel-transported v, the velocity of
    # (p(t), v(t)) is orthogonal to the vertical distribution
    rng = np.random.default_rng(8)
    n = 4
    for _ in range(5):
        x = random_usp(rng, n)
        w = rng.standard_normal(n + 1)
        w = w - (w @ x.p) * x.p
        w = w / np.linalg.norm(w)

        def curve(t):
            p = np.cos(t) * x.p + np.sin(t) * w
            coef = x.v @ w
            v = x.v + coef * ((np.cos(t) - 1.0) * w - np.sin(t) * x.p)
            return p, v

        h = 1e-6
        (p_hi, v_hi), (p_lo, v_lo) = curve(h), curve(-h)
        z = AmbientTangentUS(x, (p_hi - p_lo) / (2 * h), (v_hi - v_lo) / (2 * h))
        for vert in _vertical_basis(x):
            assert sasaki_metric(x, z, vert) == pytest.approx(0.0, abs=1e-6)


def test_complex_structure_squares_and_kills_reeb():
    rng = np.random.default_rng(9)
    x = random_usp(rng, 4)
    jr = complex_structure(x, reeb_vector(x))
    assert np.linalg.norm(jr.pdot) < 1e-14 and np.linalg.norm(jr.vdot) < 1e-14
    z = random_tangent(rng, x)
    zc = AmbientTangentUS(x, z.pdot - (z.pdot @ x.v) * x.v,
                          z.vdot + (z.pdot @ x.v) * x.p)
    jjz = complex_structure(x, complex_structure(x, zc))
    assert np.linalg.norm(jjz.pdot + zc.pdot) < 1e-13
    assert np.linalg.norm(jjz.vdot + zc.vdot) < 1e-13


def test_symplectic_form_equals_minus_d_theta():
    # FD exterior derivative of theta in an exponential chart at the base
    # flag reproduces -lambda on coordinate fields
    n = 3
    basis = split_basis(n)
    moving = basis.flag_moving
    x0 = base_flag(n)

    def chart(w):
        eta = sum(wk * e.matrix for wk, e in zip(w, moving))
        g = liealg.exp(liealg.AlgebraElement(eta))
        return group_act(g, x0)

    dim = len(moving)
    h = 1e-5

    def theta_at(w, direction):
        # theta of the coordinate field `direction` at chart point w
        e = np.zeros(dim)
        e[direction] = 1.0
        hi, lo = chart(w + h * e), chart(w - h * e)
        x = chart(w)
        z = AmbientTangentUS(x, (hi.p - lo.p) / (2 * h), (hi.v - lo.v) / (2 * h))
        return contact_form(x, z)

    rng = np.random.default_rng(10)
    for _ in range(6):
        j, k = rng.choice(dim, size=2, replace=False)
        ej, ek = np.zeros(dim), np.zeros(dim)
        ej[j], ek[k] = 1.0, 1.0
        w0 = np.zeros(dim)
        dtheta = ((theta_at(w0 + h * ej, k) - theta_at(w0 - h * ej, k)) / (2 * h)
                  - (theta_at(w0 + h * ek, j) - theta_at(w0 - h * ek, j)) / (2 * h))
        lam = symplectic_form(x0, element_tangent(x0, moving[j]),
                              element_tangent(x0, moving[k]))
        assert -dtheta == pytest.approx(lam, abs=1e-6)


def test_wedge_basics():
    dim = 5
    pairs = wedge_pairs(dim)
    assert len(pairs) == dim * (dim - 1) // 2
    a = np.eye(dim)[0]
    b = np.eye(dim)[1]
    w = wedge(a, b)
    assert w[pairs.index((0, 1))] == 1.0
    assert np.linalg.norm(w) == 1.0


def test_span_plane_flow_invariance_and_orientation():
    rng = np.random.default_rng(11)
    x = random_usp(rng, 4)
    q = span_plane(x)
    for t in rng.uniform(-3, 3, size=5):
        qt = span_plane(geodesic_flow(x, t))
        assert qt.close_to(q, tol=1e-12)
    flipped = span_plane(UnitSpherePoint(x.p, -x.v))
    assert np.linalg.norm(flipped.plucker + q.plucker) < 1e-12
    e = np.eye(5)
    q12 = span_plane(UnitSpherePoint(e[0], e[1]))
    expected = wedge(e[0], e[1])
    assert np.allclose(q12.plucker, expected)


def test_tangent_basis_plane_orthonormal_and_spans_fd_secants():
    rng = np.random.default_rng(12)
    n = 4
    x = random_usp(rng, n)
    q = span_plane(x)
    basis = tangent_basis_plane(q)
    assert len(basis) == 2 * (n - 1)
    gram = np.array([[a @ b for b in basis] for a in basis])
    assert np.linalg.norm(gram - np.eye(len(basis)), ord=np.inf) < 1e-13
    # central FD secants of wedge curves through q lie in the span
    for _ in range(6):
        z = random_tangent(rng, x)
        t = 1e-4
        hi = UnitSpherePoint(x.p + t * z.pdot, x.v + t * z.vdot)
        lo = UnitSpherePoint(x.p - t * z.pdot, x.v - t * z.vdot)
        secant = (span_plane(hi).plucker - span_plane(lo).plucker) / (2 * t)
        residual = np.linalg.norm(secant - plane_tangent_project(q, secant))
        assert residual < 1e-6 * max(1.0, np.linalg.norm(secant))


def test_plane_rotate_squares_to_minus_identity():
    rng = np.random.default_rng(13)
    x = random_usp(rng, 4)
    q = span_plane(x)
    for b in tangent_basis_plane(q):
        assert np.linalg.norm(plane_rotate(q, plane_rotate(q, b)) + b) < 1e-13
    coeffs = rng.standard_normal(len(tangent_basis_plane(q)))
    xvec = sum(c * b for c, b in zip(coeffs, tangent_basis_plane(q)))
    assert plane_symplectic(q, xvec, xvec) == pytest.approx(0.0, abs=1e-12)


def test_plane_inner_rejects_non_tangent():
    rng = np.random.default_rng(14)
    x = random_usp(rng, 3)
    q = span_plane(x)
    bad = np.ones(len(wedge_pairs(4)))
    with pytest.raises(NotTangent):
        plane_inner(q, bad, bad)


def test_plane_metric_agrees_with_pushforward_of_sasaki():
    # for contact vectors Z the wedge-space norm of the pushforward equals
    # the Sasaki norm: the embedding realizes the quotient metric
    rng = np.random.default_rng(15)
    n = 4
    for _ in range(10):
        x = random_usp(rng, n)
        q = span_plane(x)
        z = random_tangent(rng, x)
        zc = AmbientTangentUS(x, z.pdot - (z.pdot @ x.v) * x.v,
                              z.vdot + (z.pdot @ x.v) * x.p)
        push = span_plane_pushforward(x, zc)
        assert plane_inner(q, push, push) == pytest.approx(
            sasaki_metric(x, zc, zc), abs=1e-10)


def test_plane_symplectic_pullback_matches_algebra_pairing():
    # lambda_Q(dpi_Q Z_eta, dpi_Q Z_zeta) = <nu, [eta, zeta]> at any flag,
    # transporting the base-flag frame by the group action
    rng = np.random.default_rng(17)
    n = 3
    basis = split_basis(n)
    x0 = base_flag(n)
    for _ in range(8):
        g = liealg.exp(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))))
        x = group_act(g, x0)
        q = span_plane(x)
        eta = project(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))),
                      basis.contact)
        zeta = project(liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1))),
                       basis.contact)
        # frame vectors at x generated by Ad_g eta, Ad_g zeta
        eta_g, zeta_g = liealg.adjoint(g, eta), liealg.adjoint(g, zeta)
        zx = element_tangent(x, eta_g)
        wx = element_tangent(x, zeta_g)
        got = plane_symplectic(q, span_plane_pushforward(x, zx),
                               span_plane_pushforward(x, wx))
        assert got == pytest.approx(liealg.symplectic_pairing(eta, zeta), abs=1e-8)


def test_complex_structures_commute_with_plane_projection():
    # dpi_Q(J Z) = plane_rotate(dpi_Q Z) for contact Z: the two realizations
    # of the complex structure agree through the quotient
    rng = np.random.default_rng(18)
    x = random_usp(rng, 4)
    q = span_plane(x)
    z = random_tangent(rng, x)
    zc = AmbientTangentUS(x, z.pdot - (z.pdot @ x.v) * x.v,
                          z.vdot + (z.pdot @ x.v) * x.p)
    lhs = span_plane_pushforward(x, complex_structure(x, zc))
    rhs = plane_rotate(q, span_plane_pushforward(x, zc))
    assert np.linalg.norm(lhs - rhs) < 1e-12
