"""Deformation families and the Hamiltonian-variation checks.

A deformation family carries a chart of immersions for each time and a
compatible unit-normal chart (the lift), supplied in closed form by the
fixtures.  The variation one-form pairs the time derivative of the plane
map with its coordinate pushforwards through the symplectic form; the
suite checks that it is closed and that its periods over declared loops
vanish, and likewise for the one-form of the mean curvature field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spaces import plane_symplectic, plane_tangent_project
from .gaussmap import tension_oracle


class OpenPath(ValueError):
    """Loop integral over a path that does not close."""


@dataclass(frozen=True)
class DeformationFamily:
    """Family t -> unit normal chart over an interval containing 0.

    ``lift_at(t)`` must satisfy the compatibility condition: the footpoint
    of the lifted map at time t is the immersion at time t.
    """

    lift_at: Callable
    t_interval: tuple
    t_step: float = 1e-4
    name: str = "family"
    descriptor: object = None

    def chart_at(self, t):
        return self.lift_at(t).base

    def check_time(self, t, radius=0.0):
        lo, hi = self.t_interval
        if not (lo <= t <= hi):
            raise ValueError(f"time {t!r} outside interval [{lo}, {hi}]")
        if radius > 0.0 and (t - radius < lo or t + radius > hi):
            raise ValueError(
                f"time stencil of radius {radius:.3e} at t = {t!r} leaves "
                f"the interval [{lo}, {hi}]")


def plane_velocity(family, t, w):
    """Time derivative of the plane map at fixed chart point, projected
    onto the tangent space of the plane manifold."""
    dt = family.t_step
    family.check_time(t, radius=dt)
    hi = family.lift_at(t + dt).plane_vector(w)
    lo = family.lift_at(t - dt).plane_vector(w)
    vel = (hi - lo) / (2 * dt)
    q = family.lift_at(t).plane(w)
    return plane_tangent_project(q, vel)


def variation_form(family, t, w):
    """Covector of the variation one-form on chart directions at (t, w)."""
    chart = family.lift_at(t)
    v = plane_velocity(family, t, w)
    q = chart.plane(w)
    return np.array([plane_symplectic(q, v, dg) for dg in chart.plane_tangents(w)])


def mean_curvature_form(chart, w):
    """Covector of the mean-curvature one-form at w, built from the
    finite-difference tension oracle."""
    h_gamma = tension_oracle(chart, w)
    q = chart.plane(w)
    return np.array([plane_symplectic(q, h_gamma, dg)
                     for dg in chart.plane_tangents(w)])


def exterior_derivative(form_fn, w, pairs=None, step=1e-4):
    """FD exterior derivative of a covector field on chart coordinates.

    Returns max |d sigma(e_a, e_b)| over the requested coordinate pairs.
    """
    w = np.asarray(w, dtype=float)
    dim = w.shape[0]
    if pairs is None:
        pairs = [(a, b) for a in range(dim) for b in range(a + 1, dim)]
    worst = 0.0
    cache = {}

    def comp(point, index):
        key = (tuple(np.round(point, 14)), index)
        if key not in cache:
            cache[key] = form_fn(point)[index]
        return cache[key]

    for a, b in pairs:
        ha = step * max(1.0, abs(w[a]))
        hb = step * max(1.0, abs(w[b]))
        ea = np.zeros(dim)
        eb = np.zeros(dim)
        ea[a] = ha
        eb[b] = hb
        d_a_sb = (comp(w + ea, b) - comp(w - ea, b)) / (2 * ha)
        d_b_sa = (comp(w + eb, a) - comp(w - eb, a)) / (2 * hb)
        worst = max(worst, abs(d_a_sb - d_b_sa))
    return worst


# -- paths, loops, quadrature ---------------------------------------------------

@dataclass(frozen=True)
class Path:
    """Piecewise-linear path through chart points."""

    points: tuple

    def __post_init__(self):
        pts = tuple(np.asarray(p, dtype=float) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        object.__setattr__(self, "points", pts)

    @property
    def segments(self):
        return list(zip(self.points[:-1], self.points[1:]))

    def endpoints(self):
        return self.points[0], self.points[-1]


@dataclass(frozen=True)
class Loop:
    """Closed piecewise-linear loop; closure may use declared periods.

    ``periods[k]`` is the period of chart coordinate k (0 for non-periodic
    coordinates): the loop closes when start and end agree modulo periods.
    """

    path: Path
    periods: tuple = None

    def __post_init__(self):
        start, end = self.path.endpoints()
        periods = self.periods
        if periods is None:
            periods = (0.0,) * start.shape[0]
        periods = tuple(float(p) for p in periods)
        gap = np.array(end) - np.array(start)
        for k, per in enumerate(periods):
            if per > 0.0:
                gap[k] -= per * np.round(gap[k] / per)
        if np.linalg.norm(gap) > 1e-10:
            raise OpenPath(f"loop endpoints differ by {gap!r}")
        object.__setattr__(self, "periods", periods)


def coordinate_loop(base_point, axis, length=2 * np.pi, periods=None):
    """Loop running once along one chart coordinate."""
    start = np.asarray(base_point, dtype=float)
    end = start.copy()
    end[axis] += length
    if periods is None:
        periods = tuple(length if k == axis else 0.0 for k in range(start.shape[0]))
    return Loop(Path((start, end)), periods=periods)


def path_integral(form_fn, path, order=8, panels_per_segment=4):
    """Composite Gauss-Legendre integral of a covector field along a path."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a, b in path.segments:
        direction = b - a
        for panel in range(panels_per_segment):
            lo = panel / panels_per_segment
            hi = (panel + 1) / panels_per_segment
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            for x, wgt in zip(nodes, weights):
                tpar = mid + half * x
                covec = form_fn(a + tpar * direction)
                total += wgt * half * float(covec @ direction)
    return total


def loop_integral(form_fn, loop, order=8, panels_per_segment=4):
    """Period of a covector field over a closed loop."""
    return path_integral(form_fn, loop.path, order=order,
                         panels_per_segment=panels_per_segment)


def hamiltonian_potential(form_fn, path_a, path_b, order=8, panels_per_segment=4):
    """Integrate along two paths sharing endpoints; returns (value along the
    first path, discrepancy between the two).  Small discrepancy witnesses
    exactness over the sampled region."""
    start_a, end_a = path_a.endpoints()
    start_b, end_b = path_b.endpoints()
    if (np.linalg.norm(start_a - start_b) > 1e-10
            or np.linalg.norm(end_a - end_b) > 1e-10):
        raise ValueError("paths must share endpoints")
    val_a = path_integral(form_fn, path_a, order, panels_per_segment)
    val_b = path_integral(form_fn, path_b, order, panels_per_segment)
    return val_a, abs(val_a - val_b)


def transversality_monitor(family, t, sample_points):
    """Smallest singular value of the footpoint map differential over the
    sample points: detects the base map ceasing to immerse."""
    family.check_time(t)
    chart = family.lift_at(t)
    worst = np.inf
    for w in sample_points:
        u, _ = chart.split_point(np.asarray(w, dtype=float))
        jac = chart.base.jacobian(u)
        cols = [jac[:, k] for k in range(chart.m)]
        cols += [np.zeros(chart.n + 1)] * chart.fiber_dim
        sing = np.linalg.svd(np.stack(cols, axis=1), compute_uv=False)
        worst = min(worst, float(sing[-1]))
    return worst


def lift_compatibility_residual(family, t, sample_points):
    """Max distance between the lifted footpoint and the immersion value:
    zero for honestly compatible lifts."""
    chart = family.lift_at(t)
    worst = 0.0
    for w in sample_points:
        u, _ = chart.split_point(np.asarray(w, dtype=float))
        x = chart.lift(w)
        worst = max(worst, float(np.linalg.norm(x.p - chart.base.value(u))))
    return worst
