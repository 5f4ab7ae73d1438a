"""Smooth strictly convex approximations of a polygon from inside.

Edge i contributes the normalised coordinate ``x_i = <nu_i, p - o> / c_i``
and an offset bump ``s (max g_i - g_i(t_i(p)))`` where ``t_i`` is the affine
position along the edge and ``g_i`` is a concave profile vanishing at the
endpoints.  The smoothed domain is ``{H_s <= 0}`` with

    H_s = tau log sum_i exp((x_i - 1 + s (max g_i - g_i(t_i))) / tau).

Because every bump term is non-negative and the log-sum-exp dominates its
largest argument, ``H_s <= 0`` forces ``x_i <= 1``: the domain lies in P.
In coupled mode ``tau = kappa * s`` and both terms grow with ``s``, so the
domains decrease as ``s`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .affine_geom import AffinePolygon
from .errors import DegenerateProfile

Profile = Callable[[float], float]


def quadratic_profile(amplitude: float = 1.0) -> Profile:
    return lambda t: 4.0 * amplitude * t * (1.0 - t)


def _profile_max(g: Profile) -> float:
    return max(g(k / 1000) for k in range(1001))


@dataclass
class _EdgeData:
    nu: tuple[float, float]
    c: float
    start: tuple[float, float]
    along: tuple[float, float]  # direction scaled so that t runs over [0, 1]
    g: Profile
    gmax: float


class SmoothedPolygon:
    """Sublevel set ``{H_s <= 0}``; with ``s = 0`` it is the polygon itself."""

    def __init__(self, P: AffinePolygon, s: float, profiles: Sequence | None = None,
                 mode: str = "coupled", tau: float | None = None, kappa: float = 0.5):
        if not P.is_regular:
            raise ValueError("smoothing needs a polygon away from cuts")
        if s < 0:
            raise ValueError("s must be non-negative")
        if mode not in ("coupled", "decoupled"):
            raise ValueError("mode must be 'coupled' or 'decoupled'")
        self.polygon = P
        self.s = float(s)
        self.mode = mode
        if mode == "coupled":
            self.tau = kappa * self.s
        else:
            if tau is None or tau <= 0:
                raise ValueError("decoupled mode needs a positive tau")
            self.tau = float(tau)
        self.center = (float(P.center[0]), float(P.center[1]))
        profiles = list(profiles) if profiles is not None else [1.0] * len(P)
        if len(profiles) != len(P):
            raise ValueError(f"expected {len(P)} edge profiles, got {len(profiles)}")
        self.edges: list[_EdgeData] = []
        for e, prof in zip(P.edges, profiles):
            g = prof if callable(prof) else quadratic_profile(float(prof))
            gmax = _profile_max(g)
            if all(abs(g(k / 64)) < 1e-15 for k in range(65)):
                raise DegenerateProfile(f"profile of edge {e.index} vanishes identically")
            a, b = e.points[0], e.points[-1]
            a = (float(a[0]), float(a[1]))
            b = (float(b[0]), float(b[1]))
            d = (b[0] - a[0], b[1] - a[1])
            n2 = d[0] * d[0] + d[1] * d[1]
            self.edges.append(_EdgeData((float(e.conormal[0]), float(e.conormal[1])), float(e.action), a,
                                        (d[0] / n2, d[1] / n2), g, gmax))
        if self.s > 0 and self.H(*self.center) >= 0:
            raise DegenerateProfile("smoothing parameter too large: the center is not inside")

    def terms(self, x: float, y: float) -> list[float]:
        out = []
        for e in self.edges:
            xi = (e.nu[0] * (x - self.center[0]) + e.nu[1] * (y - self.center[1])) / e.c
            t = e.along[0] * (x - e.start[0]) + e.along[1] * (y - e.start[1])
            out.append(xi - 1.0 + self.s * (e.gmax - e.g(t)))
        return out

    def H(self, x: float, y: float) -> float:
        ys = self.terms(x, y)
        m = max(ys)
        if self.s == 0:
            return m
        return m + self.tau * math.log(sum(math.exp((v - m) / self.tau) for v in ys))

    def contains(self, x: float, y: float, tol: float = 1e-12) -> bool:
        return self.H(x, y) <= tol

    def _exit_radius(self, ux: float, uy: float) -> float:
        best = math.inf
        for e in self.edges:
            rate = e.nu[0] * ux + e.nu[1] * uy
            if rate > 0:
                best = min(best, e.c / rate)
        return best

    def boundary_point(self, theta: float, iterations: int = 80) -> tuple[float, float]:
        """Where the ray from the center at angle theta leaves the domain (bisection)."""
        ux, uy = math.cos(theta), math.sin(theta)
        lo, hi = 0.0, self._exit_radius(ux, uy)
        ox, oy = self.center
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if self.H(ox + mid * ux, oy + mid * uy) <= 0:
                lo = mid
            else:
                hi = mid
        return ox + lo * ux, oy + lo * uy

    def boundary(self, n: int = 720) -> list[tuple[float, float]]:
        return [self.boundary_point(2 * math.pi * k / n) for k in range(n)]

    def is_strictly_convex(self, n: int = 720, tol: float = 0.0) -> bool:
        pts = self.boundary(n)
        for i in range(n):
            (ax, ay), (bx, by), (cx, cy) = pts[i - 1], pts[i], pts[(i + 1) % n]
            if (bx - ax) * (cy - by) - (by - ay) * (cx - bx) <= tol:
                return False
        return True

    def argmax(self, covector, n: int = 3600) -> tuple[float, float]:
        return max(self.boundary(n), key=lambda p: covector[0] * p[0] + covector[1] * p[1])


def smooth_polygon(P: AffinePolygon, s: float, profiles: Sequence | None = None, mode: str = "coupled",
                   tau: float | None = None, kappa: float = 0.5) -> SmoothedPolygon:
    """Strictly convex domain inside P converging to P as s -> 0."""
    return SmoothedPolygon(P, s, profiles, mode, tau, kappa)


def nested(inner: SmoothedPolygon, outer: SmoothedPolygon, n: int = 720, tol: float = 1e-9) -> bool:
    """Does every sampled boundary point of ``inner`` lie in ``outer``?"""
    return all(outer.H(x, y) <= tol for x, y in inner.boundary(n))
