"""Named fixtures with closed-form ground truth.

Each immersion fixture builds a unit normal chart whose descriptor records
the closed-form expectations (principal curvatures, mean curvature norm,
conformality, expected plane mean curvature) with a provenance tag and
tolerance, plus declared loops generating the first homology of the chart
torus directions.  Deformation fixtures build families with closed-form
lifts: rotations act on normals by the same rotation, and the degenerating
family of flat tori over shrinking circles carries a quaternionic normal
field that stays smooth through the degeneration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dual
from .immersion import ImmersionChart
from .gaussmap import ExplicitFrame, fiber_coords, unit_normal_chart
from .liealg import AlgebraElement, elementary, exp as algebra_exp
from .variations import DeformationFamily, coordinate_loop

TWO_PI = 2 * math.pi


class UnknownFixture(KeyError):
    pass


class FixtureParamError(ValueError):
    pass


@dataclass(frozen=True)
class Expectation:
    """A closed-form or recorded value with tolerance and provenance."""

    value: object
    tol: float
    source: str  # "closed-form" | "regression" | "property"


@dataclass
class FixtureDescriptor:
    name: str
    params: dict
    kind: str  # "immersion" | "deformation"
    expectations: dict = field(default_factory=dict)
    loops: list = field(default_factory=list)
    palmer_box: object = None  # sample box override for principal-curvature FD


# -- shared building blocks ------------------------------------------------------

def sphere_point(angles):
    """Embedding of k angles into the unit sphere of R^{k+1}; dual-safe.

    First k-1 angles are colatitudes in (0, pi); the last is periodic.
    """
    return fiber_coords(list(angles))


def sphere_box(k, margin=0.45):
    box = [(margin, math.pi - margin)] * (k - 1) + [(0.0, TWO_PI)]
    periodic = [False] * (k - 1) + [True]
    return box, periodic


def matvec(mat, vec):
    """Matrix times list of scalars; dual-safe."""
    return [sum(mat[r][c] * vec[c] for c in range(len(vec)))
            for r in range(mat.shape[0])]


def normalize(vec):
    norm = dual.sqrt(sum(c * c for c in vec))
    return [c / norm for c in vec]


# -- fixture builders ------------------------------------------------------------

def _totally_geodesic(m, n):
    pad = n - m

    def eval_fn(u):
        return sphere_point(u) + [0.0] * pad

    box, periodic = sphere_box(m)
    chart = ImmersionChart(m=m, n=n, eval_fn=eval_fn, domain_box=box,
                           periodic=periodic, name=f"totally_geodesic({m},{n})")
    frame = None
    if pad >= 2:
        # the normal space of the equator is spanned by the constant late axes
        consts = [np.eye(n + 1)[m + 1 + k] for k in range(pad)]
        frame = ExplicitFrame(lambda u, _c=consts: list(_c))
    desc = FixtureDescriptor(
        name="totally_geodesic", params={"m": m, "n": n}, kind="immersion",
        expectations={
            "mean_curvature_norm": Expectation(0.0, 1e-9, "closed-form"),
            "principal_curvatures": Expectation((0.0,) * m, 1e-8, "closed-form"),
            "is_conformal": Expectation(True, 1e-6, "closed-form"),
            "plane_mean_curvature_norm": Expectation(0.0, 1e-4, "closed-form"),
            "isoparametric": Expectation(True, 1e-4, "closed-form"),
        })
    unc = unit_normal_chart(chart, frame=frame, descriptor=desc)
    w0 = _center_point(unc)
    desc.loops = _periodic_loops(unc, w0)
    return unc


def _equator_normal(u, m, n):  # pragma: no cover - unused closure guard
    raise NotImplementedError


def _clifford(n):
    pad = n - 3
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    def eval_fn(u):
        u1, u2 = u
        return [dual.cos(u1) * inv_sqrt2, dual.sin(u1) * inv_sqrt2,
                dual.cos(u2) * inv_sqrt2, dual.sin(u2) * inv_sqrt2] + [0.0] * pad

    chart = ImmersionChart(m=2, n=n, eval_fn=eval_fn,
                           domain_box=[(0.0, TWO_PI)] * 2, periodic=[True, True],
                           name=f"clifford({n})")
    frame = None
    if pad >= 1:
        def frame_fn(u):
            u1, u2 = float(u[0]), float(u[1])
            xi1 = np.array([math.cos(u1), math.sin(u1),
                            -math.cos(u2), -math.sin(u2)] + [0.0] * pad) * inv_sqrt2
            consts = [np.eye(n + 1)[4 + k] for k in range(pad)]
            return [xi1] + consts

        frame = ExplicitFrame(frame_fn)
    desc = FixtureDescriptor(
        name="clifford", params={"n": n}, kind="immersion",
        expectations={
            "mean_curvature_norm": Expectation(0.0, 1e-9, "closed-form"),
            "principal_curvatures": Expectation((-1.0, 1.0), 1e-8, "closed-form"),
            "is_conformal": Expectation(True, 1e-6, "closed-form"),
            "plane_mean_curvature_norm": Expectation(0.0, 1e-4, "closed-form"),
            "conformal_factor": Expectation(0.5, 1e-6, "closed-form"),
            "isoparametric": Expectation(True, 1e-4, "closed-form"),
        })
    unc = unit_normal_chart(chart, frame=frame, descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


def _generalized_clifford(p, q, radius):
    if radius == "minimal":
        r = math.sqrt(p / (p + q))
    else:
        r = float(radius)
        if not 0.05 < r < 0.999:
            raise FixtureParamError("radius must lie in (0.05, 0.999) or 'minimal'")
    s = math.sqrt(1.0 - r * r)
    m = p + q
    n = m + 1

    def eval_fn(u):
        first = sphere_point(u[:p])
        second = sphere_point(u[p:])
        return [r * c for c in first] + [s * c for c in second]

    box_p, per_p = sphere_box(p)
    box_q, per_q = sphere_box(q)
    chart = ImmersionChart(m=m, n=n, eval_fn=eval_fn, domain_box=box_p + box_q,
                           periodic=per_p + per_q,
                           name=f"generalized_clifford({p},{q})")
    kappas = sorted([s / r] * p + [r / s] * q)
    desc = FixtureDescriptor(
        name="generalized_clifford",
        params={"p": p, "q": q, "r": r}, kind="immersion",
        expectations={
            "principal_curvatures_abs": Expectation(tuple(kappas), 1e-7,
                                                    "closed-form"),
            "mean_curvature_norm": Expectation(abs(q * r / s - p * s / r), 1e-7,
                                               "closed-form"),
            "is_conformal": Expectation(abs(r - s) < 1e-12, 1e-6, "closed-form"),
            "plane_mean_curvature_norm": Expectation(0.0, 1e-4, "closed-form"),
            "isoparametric": Expectation(True, 1e-4, "closed-form"),
        })
    unc = unit_normal_chart(chart, descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


def _geodesic_sphere(n, rho):
    if not 0.1 <= rho <= math.pi / 2:
        raise FixtureParamError("rho must lie in [0.1, pi/2]")
    m = n - 1
    sin_r, cos_r = math.sin(rho), math.cos(rho)

    def eval_fn(u):
        return [sin_r * c for c in sphere_point(u)] + [cos_r]

    box, periodic = sphere_box(m)
    chart = ImmersionChart(m=m, n=n, eval_fn=eval_fn, domain_box=box,
                           periodic=periodic, name=f"geodesic_sphere({n})")
    kappa = cos_r / sin_r
    desc = FixtureDescriptor(
        name="geodesic_sphere", params={"n": n, "rho": rho}, kind="immersion",
        expectations={
            "principal_curvatures_abs": Expectation((kappa,) * m, 1e-7,
                                                    "closed-form"),
            "mean_curvature_norm": Expectation(m * kappa, 1e-7, "closed-form"),
            "is_conformal": Expectation(True, 1e-6, "closed-form"),
            "plane_mean_curvature_norm": Expectation(0.0, 1e-4, "closed-form"),
            "isoparametric": Expectation(True, 1e-4, "closed-form"),
            "umbilic": Expectation(True, 1e-7, "closed-form"),
        })
    unc = unit_normal_chart(chart, descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


def _small_circle(n, alpha):
    if not 0.2 <= alpha <= math.pi / 2:
        raise FixtureParamError("alpha must lie in [0.2, pi/2]")
    sin_a, cos_a = math.sin(alpha), math.cos(alpha)
    pad = n - 2

    def eval_fn(u):
        (t,) = u
        return [sin_a * dual.cos(t), sin_a * dual.sin(t), cos_a] + [0.0] * pad

    def frame_fn(u):
        t = float(u[0])
        nu1 = np.array([cos_a * math.cos(t), cos_a * math.sin(t), -sin_a]
                       + [0.0] * pad)
        consts = [np.eye(n + 1)[3 + k] for k in range(pad)]
        return [nu1] + consts

    chart = ImmersionChart(m=1, n=n, eval_fn=eval_fn, domain_box=[(0.0, TWO_PI)],
                           periodic=[True], name=f"small_circle({n})")
    hf = cos_a / sin_a  # geodesic curvature of a colatitude circle
    desc = FixtureDescriptor(
        name="small_circle", params={"n": n, "alpha": alpha}, kind="immersion",
        expectations={
            "mean_curvature_norm": Expectation(hf, 1e-8, "closed-form"),
            "is_conformal": Expectation(True, 1e-6, "closed-form"),
            "plane_mean_curvature_nonzero": Expectation(alpha < math.pi / 2 - 1e-9,
                                                        1e-3, "closed-form"),
        })
    unc = unit_normal_chart(chart, frame=ExplicitFrame(frame_fn), descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


_SQRT3 = math.sqrt(3.0)


def _veronese():
    def eval_fn(u):
        th, ph = u
        x = dual.sin(th) * dual.cos(ph)
        y = dual.sin(th) * dual.sin(ph)
        z = dual.cos(th)
        return [_SQRT3 * y * z, _SQRT3 * z * x, _SQRT3 * x * y,
                0.5 * _SQRT3 * (x * x - y * y),
                0.5 * (x * x + y * y - 2.0 * z * z)]

    def frame_fn(u):
        th, ph = float(u[0]), float(u[1])
        xhat = np.array([math.sin(th) * math.cos(ph),
                         math.sin(th) * math.sin(ph), math.cos(th)])
        w1 = np.array([math.cos(th) * math.cos(ph),
                       math.cos(th) * math.sin(ph), -math.sin(th)])
        w2 = np.array([-math.sin(ph), math.cos(ph), 0.0])
        n1 = (np.outer(w1, w1) - np.outer(w2, w2)) / math.sqrt(2.0)
        n2 = (np.outer(w1, w2) + np.outer(w2, w1)) / math.sqrt(2.0)
        return [_sym3_to_vec5(n1), _sym3_to_vec5(n2)]

    chart = ImmersionChart(m=2, n=4, eval_fn=eval_fn,
                           domain_box=[(0.5, math.pi - 0.5), (0.0, TWO_PI)],
                           periodic=[False, True], name="veronese")
    desc = FixtureDescriptor(
        name="veronese", params={}, kind="immersion",
        expectations={
            "mean_curvature_norm": Expectation(0.0, 1e-8, "closed-form"),
            "is_conformal": Expectation(True, 1e-6, "closed-form"),
            "plane_mean_curvature_norm": Expectation(0.0, 1e-4, "closed-form"),
        })
    unc = unit_normal_chart(chart, frame=ExplicitFrame(frame_fn), descriptor=desc)
    w0 = _center_point(unc)
    desc.loops = [coordinate_loop(w0, 1, TWO_PI, periods=(0.0, TWO_PI, 0.0)),
                  coordinate_loop(w0, 2, TWO_PI, periods=(0.0, 0.0, TWO_PI))]
    return unc


def _sym3_to_vec5(b):
    """Isometric coordinates of a traceless symmetric 3x3 matrix in the
    basis matching the degree-two chart components."""
    return np.array([math.sqrt(2.0) * b[1, 2], math.sqrt(2.0) * b[0, 2],
                     math.sqrt(2.0) * b[0, 1],
                     (b[0, 0] - b[1, 1]) / math.sqrt(2.0),
                     (b[0, 0] + b[1, 1] - 2.0 * b[2, 2]) / math.sqrt(6.0)])


def _rotational_torus(a, b):
    if not (0.1 <= b < a) or a + b >= math.pi / 2 - 0.05:
        raise FixtureParamError("need 0.1 <= b < a and a + b < pi/2 - 0.05")
    centre = np.array([math.cos(a), math.sin(a), 0.0])
    w1 = np.array([-math.sin(a), math.cos(a), 0.0])
    w2 = np.array([0.0, 0.0, 1.0])
    cos_b, sin_b = math.cos(b), math.sin(b)

    def eval_fn(u):
        u1, u2 = u
        prof = [cos_b * centre[k]
                + sin_b * (dual.cos(u1) * w1[k] + dual.sin(u1) * w2[k])
                for k in range(3)]
        return [prof[0] * dual.cos(u2), prof[0] * dual.sin(u2), prof[1], prof[2]]

    chart = ImmersionChart(m=2, n=3, eval_fn=eval_fn,
                           domain_box=[(0.0, TWO_PI)] * 2, periodic=[True, True],
                           name=f"rotational_torus({a},{b})")
    desc = FixtureDescriptor(
        name="rotational_torus", params={"a": a, "b": b}, kind="immersion",
        expectations={
            "is_conformal": Expectation(False, 1e-6, "closed-form"),
            "isoparametric": Expectation(False, 0.0, "closed-form"),
        })
    unc = unit_normal_chart(chart, descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


def _perturbed_torus(eps):
    if not 0.0 < eps <= 0.3:
        raise FixtureParamError("eps must lie in (0, 0.3]")
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    def eval_fn(u):
        u1, u2 = u
        raw = [dual.cos(u1) * inv_sqrt2 + eps * dual.cos(2.0 * u2),
               dual.sin(u1) * inv_sqrt2 + eps * dual.sin(2.0 * u1),
               dual.cos(u2) * inv_sqrt2 + eps * dual.cos(u1 + u2),
               dual.sin(u2) * inv_sqrt2 + eps * dual.sin(u1 - u2)]
        return normalize(raw)

    chart = ImmersionChart(m=2, n=3, eval_fn=eval_fn,
                           domain_box=[(0.0, TWO_PI)] * 2, periodic=[True, True],
                           name=f"perturbed_torus({eps})")
    desc = FixtureDescriptor(
        name="perturbed_torus", params={"eps": eps}, kind="immersion",
        expectations={
            "is_conformal": Expectation(False, 1e-6, "closed-form"),
            # recorded on the fixture at eps = 0.2, seed-independent probe grid
            "conformal_defect_floor": Expectation(0.1, 0.0, "regression"),
        })
    unc = unit_normal_chart(chart, descriptor=desc)
    desc.loops = _periodic_loops(unc, _center_point(unc))
    return unc


def _rigid_rotation(base, base_params, axis, speed):
    base_unc = get(base, **base_params)
    if not hasattr(base_unc, "base"):
        raise FixtureParamError("rigid_rotation needs an immersion fixture base")
    chart0 = base_unc.base
    n1 = chart0.n + 1
    i, j = axis
    if not (0 <= i < j < n1):
        raise FixtureParamError(f"axis indices must satisfy 0 <= i < j < {n1}")
    generator = elementary(n1, i, j)
    frame0 = base_unc.frame_field
    sheet = base_unc.sheet_sign

    def lift_at(t):
        rot = algebra_exp(AlgebraElement(generator.matrix * (speed * t)))

        def eval_fn(u, _r=rot):
            return matvec(_r, chart0.eval_fn(u))

        chart_t = ImmersionChart(m=chart0.m, n=chart0.n, eval_fn=eval_fn,
                                 domain_box=chart0.domain_box,
                                 periodic=chart0.periodic,
                                 derivative_mode=chart0.derivative_mode,
                                 fd_step=chart0.fd_step,
                                 name=f"{chart0.name}@t")

        def frame_fn(u, _r=rot):
            return [_r @ v for v in frame0(u)]

        return unit_normal_chart(chart_t, frame=ExplicitFrame(frame_fn),
                                 sheet_sign=sheet)

    desc = FixtureDescriptor(
        name="rigid_rotation",
        params={"base": base, "base_params": base_params, "axis": list(axis),
                "speed": speed},
        kind="deformation",
        expectations={
            "variation_periods": Expectation(0.0, 1e-4, "property"),
            "monitor_constant": Expectation(True, 1e-6, "closed-form"),
        })
    desc.loops = base_unc.descriptor.loops if base_unc.descriptor else []
    return DeformationFamily(lift_at=lift_at, t_interval=(-1.0, 1.0),
                             name=f"rigid_rotation({base})", descriptor=desc)


# quaternion helpers for the degenerating family of flat tori

def _qmul(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return [w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2]


def _qconj(a):
    return [a[0], -a[1], -a[2], -a[3]]


def _circle_point(t, u):
    """Point of the tilted circle at angle u: geodesic radius t around the
    moving centre (cos t, sin t, 0); degenerates to (1, 0, 0) at t = 0."""
    cos_t, sin_t = math.cos(t), math.sin(t)
    centre = [cos_t, sin_t, 0.0]
    w1 = [-sin_t, cos_t, 0.0]
    w2 = [0.0, 0.0, 1.0]
    return [cos_t * centre[k]
            + sin_t * (dual.cos(u) * w1[k] + dual.sin(u) * w2[k])
            for k in range(3)]


def _circle_tangent(t, u):
    """Unit tangent direction of the circle (well-defined at t = 0 too)."""
    centre = [math.cos(t), math.sin(t), 0.0]
    w1 = np.array([-centre[1], centre[0], 0.0])
    w2 = np.array([0.0, 0.0, 1.0])
    return -math.sin(u) * w1 + math.cos(u) * w2


def _hopf_section(x):
    """Section of the circle fibration: q = (i + x)/|i + x| satisfies
    q i conj(q) = x; smooth away from the antipode of the pole."""
    return normalize([0.0, 1.0 + x[0], x[1], x[2]])


def _hopf_project(q):
    """The fibration q -> q i conj(q) as a 3-vector (i, j, k components)."""
    out = _qmul(_qmul(q, [0.0, 1.0, 0.0, 0.0]), _qconj(q))
    return out[1:]


def _hopf_torus_family():
    def lift_at(t):
        def eval_fn(uv, _t=t):
            u, v = uv
            z = _hopf_section(_circle_point(_t, u))
            return _qmul(z, [dual.cos(v), dual.sin(v), 0.0, 0.0])

        chart_t = ImmersionChart(m=2, n=3, eval_fn=eval_fn,
                                 domain_box=[(0.0, TWO_PI)] * 2,
                                 periodic=[True, True],
                                 name=f"hopf_tilt@{t}")
        return unit_normal_chart(chart_t, frame=_HopfFrame(t, chart_t),
                                 sheet_sign=1.0)

    desc = FixtureDescriptor(
        name="hopf_tilt", params={}, kind="deformation",
        expectations={
            "variation_periods": Expectation(0.0, 1e-4, "property"),
            "monitor_at_zero": Expectation(0.0, 1e-3, "closed-form"),
            # recorded once on the fixture's probe grid
            "monitor_at_half": Expectation(0.2379, 0.01, "regression"),
        })
    w0 = np.array([0.8, 1.3])
    desc.loops = [coordinate_loop(w0, 0, TWO_PI, periods=(TWO_PI, TWO_PI)),
                  coordinate_loop(w0, 1, TWO_PI, periods=(TWO_PI, TWO_PI))]
    return DeformationFamily(lift_at=lift_at, t_interval=(-0.9, 0.9),
                             name="hopf_tilt", descriptor=desc)


class _HopfFrame:
    """Normal field of the flat-torus family; smooth through t = 0.

    Uses the quaternionic horizontal lift of the circle's unit tangent:
    for w = a j + b k the fibration differential sends q w to
    q (w i - i w) conj(q), so the lift of a tangent vector tau at the
    footpoint solves -2a k + 2b j = conj(q) tau q.
    """

    def __init__(self, t, chart):
        self.t = t
        self.chart = chart

    def __call__(self, uv):
        u, v = float(uv[0]), float(uv[1])
        q = [float(c) for c in self.chart.eval_fn([u, v])]
        fiber = _qmul(q, [0.0, 1.0, 0.0, 0.0])
        tau = _circle_tangent(self.t, u)
        rho = _qmul(_qmul(_qconj(q), [0.0, *tau]), q)
        a = -rho[3] / 2.0
        b = rho[2] / 2.0
        lift = _qmul(q, [0.0, 0.0, a, b])
        lift = np.array(lift) / math.hypot(a, b)
        rows = np.vstack([np.array(q), np.array(fiber), lift])
        normal = _cross4(rows)
        return [normal]


def _cross4(rows):
    """Unit vector completing three orthonormal rows in R^4, oriented so the
    4x4 determinant is positive."""
    omega = np.empty(4)
    cols = np.arange(4)
    for k in range(4):
        omega[k] = (-1.0) ** (3 + k) * np.linalg.det(rows[:, cols != k])
    return omega / np.linalg.norm(omega)


# -- registry ---------------------------------------------------------------------

def _build_totally_geodesic(m=2, n=4):
    m, n = int(m), int(n)
    if not (1 <= m <= n - 1 and 2 <= n <= 6):
        raise FixtureParamError("need 1 <= m <= n-1 and 2 <= n <= 6")
    return _totally_geodesic(m, n)


def _build_clifford(n=3):
    n = int(n)
    if not 3 <= n <= 6:
        raise FixtureParamError("need 3 <= n <= 6")
    return _clifford(n)


def _build_generalized_clifford(p=1, q=2, r="minimal"):
    p, q = int(p), int(q)
    if not (p >= 1 and q >= 1 and p + q <= 4):
        raise FixtureParamError("need p, q >= 1 and p + q <= 4")
    return _generalized_clifford(p, q, r)


def _build_geodesic_sphere(n=3, rho=0.8):
    return _geodesic_sphere(int(n), float(rho))


def _build_small_circle(n=3, alpha=0.9):
    n = int(n)
    if not 3 <= n <= 6:
        raise FixtureParamError("need 3 <= n <= 6")
    return _small_circle(n, float(alpha))


def _build_veronese():
    return _veronese()


def _build_rotational_torus(a=0.9, b=0.35):
    return _rotational_torus(float(a), float(b))


def _build_perturbed_torus(eps=0.2):
    return _perturbed_torus(float(eps))


def _build_rigid_rotation(base="clifford", base_params=None, axis=(0, 3),
                          speed=1.0):
    return _rigid_rotation(base, dict(base_params or {}), tuple(axis),
                           float(speed))


def _build_hopf_tilt():
    return _hopf_torus_family()


REGISTRY = {
    "totally_geodesic": (_build_totally_geodesic, "m, n (defaults 2, 4)"),
    "clifford": (_build_clifford, "n (default 3)"),
    "generalized_clifford": (_build_generalized_clifford,
                             "p, q, r='minimal'|float (defaults 1, 2)"),
    "geodesic_sphere": (_build_geodesic_sphere, "n, rho (defaults 3, 0.8)"),
    "small_circle": (_build_small_circle, "n, alpha (defaults 3, 0.9)"),
    "veronese": (_build_veronese, "no parameters"),
    "rotational_torus": (_build_rotational_torus, "a, b (defaults 0.9, 0.35)"),
    "perturbed_torus": (_build_perturbed_torus, "eps (default 0.2)"),
    "rigid_rotation": (_build_rigid_rotation,
                       "base, base_params, axis, speed"),
    "hopf_tilt": (_build_hopf_tilt, "no parameters"),
}


def fixture_names():
    return sorted(REGISTRY)


def get(name, **params):
    """Construct a fixture by name; raises with the valid options listed."""
    if name not in REGISTRY:
        raise UnknownFixture(
            f"unknown fixture {name!r}; valid names: {', '.join(fixture_names())}")
    builder, _ = REGISTRY[name]
    try:
        return builder(**params)
    except TypeError as err:
        raise FixtureParamError(
            f"bad parameters for {name!r} ({REGISTRY[name][1]}): {err}") from None


# -- helpers for loops and sampling ----------------------------------------------

def _center_point(unc):
    box = unc.domain_box
    return np.array([0.5 * (lo + hi) for lo, hi in box])


def _periodic_loops(unc, w0):
    loops = []
    periods = tuple((hi - lo) if per else 0.0
                    for (lo, hi), per in zip(unc.domain_box, unc.periodic))
    for k, per in enumerate(unc.periodic):
        if per:
            loops.append(coordinate_loop(np.array(w0), k, periods[k],
                                         periods=periods))
    return loops


def random_trig_chart(m, n, seed, amplitude=0.25):
    """A random smooth immersion: an equatorial sphere embedding perturbed
    by low-frequency trigonometric fields and renormalized.  Used by the
    property suites as a generic (non-special) chart."""
    rng = np.random.default_rng(seed)
    pad = n - m
    coef_c = amplitude * rng.standard_normal((n + 1, m))
    coef_s = amplitude * rng.standard_normal((n + 1, m))

    def eval_fn(u):
        base = sphere_point(u) + [0.0] * pad
        out = []
        for r in range(n + 1):
            bump = 0.0
            for k in range(m):
                bump = bump + coef_c[r, k] * dual.cos(u[k]) \
                    + coef_s[r, k] * dual.sin(2.0 * u[k])
            out.append(base[r] + bump)
        return normalize(out)

    box, periodic = sphere_box(m)
    return ImmersionChart(m=m, n=n, eval_fn=eval_fn, domain_box=box,
                          periodic=periodic, name=f"random_trig({m},{n},{seed})")
