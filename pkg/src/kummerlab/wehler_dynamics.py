"""Numerical dynamics on smooth (2,2,2) surfaces in P1 x P1 x P1.

Each coordinate projection forgetting one factor is a double cover, so each
axis carries an involution that swaps the two sheets; their composition
f = sigma_1 o sigma_2 o sigma_3 (sigma_3 applied first) is an automorphism
of positive entropy.  The engine below works on batches of points in
homogeneous coordinates with forward-mode dual numbers, so derivatives flow
through the exact root-swap formulas rather than finite differences.

State layout: values P with shape (n, 3, 2) over complex128 (lane, axis,
homogeneous component) and tangents T with shape (ndir, n, 3, 2) holding one
directional derivative per chart direction.  Dead lanes are marked with NaN
and dropped at collection time.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ChartFailureError,
    DegenerateFiberError,
    DegenerateRadiiError,
    IndeterminatePointError,
    InsufficientSamplesError,
    InternalInvariantError,
    OffSurfaceError,
    PreconditionError,
    TooFewSaddlesError,
)
from .lattice_algebra import dynamical_degree, wehler_cohomology_action
from .torus_kummer import (
    LyapunovMethod,
    LyapunovReport,
    TorusAutomorphism,
    TorusPoint,
    fix_count,
    half_log_h2_degree,
    haar_samples,
    local_dimension_estimate,
    lyapunov_exact,
    lyapunov_qr_orbit,
    torus_distance,
)

MEMBERSHIP_TOL = 1e-10
NEWTON_ACCEPT_TOL = 1e-11
DEDUP_TOL = 1e-7
CHART_FAIL_TOL = 1e-10
DEGENERATE_FIBER_TOL = 1e-14
REPLAY_TOL = 1e-9
NEWTON_STEP_CAP = 0.3
PERIOD_CAP = 8
SEED_CHUNK = 256


class Axis(Enum):
    X = 0
    Y = 1
    Z = 2


class OrbitType(Enum):
    SADDLE = "SADDLE"
    NONSADDLE = "NONSADDLE"


class RigidityVerdict(Enum):
    KUMMER_CONSISTENT = "KUMMER_CONSISTENT"
    RIGIDITY_GAP = "RIGIDITY_GAP"
    INCONCLUSIVE = "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# points and surfaces


@dataclass(frozen=True)
class P1Point:
    """Projective line point, normalized so the larger component is 1."""

    u: complex
    v: complex

    @classmethod
    def make(cls, u: complex, v: complex) -> "P1Point":
        u, v = complex(u), complex(v)
        if u == 0 and v == 0:
            raise PreconditionError("(0, 0) is not a projective point")
        w = u if abs(u) >= abs(v) else v
        return cls(u / w, v / w)

    def chordal(self, other: "P1Point") -> float:
        return abs(self.u * other.v - other.u * self.v)


@dataclass(frozen=True)
class WehlerSurface:
    """Tridegree (2,2,2) form: coeffs[i][j][k] multiplies
    u_x^i v_x^(2-i) u_y^j v_y^(2-j) u_z^k v_z^(2-k)."""

    coeffs: tuple

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        if arr.shape != (3, 3, 3):
            raise PreconditionError("expected a 3x3x3 coefficient tensor")
        top = np.abs(arr).max()
        if top == 0:
            raise PreconditionError("coefficient tensor is identically zero")
        if not (abs(top - 1.0) <= 1e-12):
            raise PreconditionError("coefficients must be max-modulus normalized")

    @classmethod
    def from_array(cls, arr) -> "WehlerSurface":
        arr = np.array(arr, dtype=complex)
        top = np.abs(arr).max() if arr.size else 0.0
        if top == 0 or not np.isfinite(top):
            raise PreconditionError("coefficient tensor is identically zero")
        arr = arr / top
        return cls(tuple(tuple(tuple(x for x in row) for row in plane) for plane in arr))

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)


@dataclass(frozen=True)
class SurfacePoint:
    x: P1Point
    y: P1Point
    z: P1Point
    residual: float

    def chordal(self, other: "SurfacePoint") -> float:
        return max(
            self.x.chordal(other.x),
            self.y.chordal(other.y),
            self.z.chordal(other.z),
        )


@dataclass(frozen=True)
class SaddleOrbit:
    period: int
    point: object
    multipliers: tuple[complex, complex]
    type: OrbitType


@dataclass(frozen=True)
class Suspect:
    """Candidate singular point found by the advisory probe."""

    point: SurfacePoint
    grad_max: float


def random_surface(seed: int, real_coeffs: bool = False) -> WehlerSurface:
    """Coefficients i.i.d. uniform on the unit disk (or [-1, 1] when real),
    then max-modulus normalized; bit-deterministic in the seed."""
    rng = np.random.default_rng(seed)
    if real_coeffs:
        arr = rng.uniform(-1.0, 1.0, (3, 3, 3)).astype(complex)
    else:
        radius = np.sqrt(rng.random((3, 3, 3)))
        angle = 2 * np.pi * rng.random((3, 3, 3))
        arr = radius * np.exp(1j * angle)
    return WehlerSurface.from_array(arr)


def surface_residual(surface: WehlerSurface, x: P1Point, y: P1Point, z: P1Point) -> float:
    p = _pack_points([(x, y, z)])
    return float(_residuals(surface.array(), p)[0])


def make_surface_point(
    surface: WehlerSurface,
    x: P1Point,
    y: P1Point,
    z: P1Point,
    tol: float = MEMBERSHIP_TOL,
) -> SurfacePoint:
    res = surface_residual(surface, x, y, z)
    if res > tol:
        raise OffSurfaceError(f"residual {res:.3e} exceeds membership tolerance {tol:.1e}")
    return SurfacePoint(x, y, z, res)


# ---------------------------------------------------------------------------
# forward-mode dual numbers over numpy arrays


class _Jet:
    """Value with a stack of directional derivatives on a leading axis."""

    __slots__ = ("val", "tan")

    def __init__(self, val, tan):
        self.val = val
        self.tan = tan

    def __add__(self, o):
        if isinstance(o, _Jet):
            return _Jet(self.val + o.val, self.tan + o.tan)
        return _Jet(self.val + o, self.tan)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, _Jet):
            return _Jet(self.val - o.val, self.tan - o.tan)
        return _Jet(self.val - o, self.tan)

    def __rsub__(self, o):
        return _Jet(o - self.val, -self.tan)

    def __mul__(self, o):
        if isinstance(o, _Jet):
            return _Jet(self.val * o.val, self.tan * o.val + self.val * o.tan)
        return _Jet(self.val * o, self.tan * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, _Jet):
            inv = 1.0 / o.val
            v = self.val * inv
            return _Jet(v, (self.tan - v * o.tan) * inv)
        return _Jet(self.val / o, self.tan / o)

    def __neg__(self):
        return _Jet(-self.val, -self.tan)


def _jet_where(mask, a: _Jet, b: _Jet) -> _Jet:
    return _Jet(np.where(mask, a.val, b.val), np.where(mask[None], a.tan, b.tan))


def _comp(P, T, axis, c) -> _Jet:
    return _Jet(P[:, axis, c], T[:, :, axis, c])


# ---------------------------------------------------------------------------
# fiber algebra


def _fiber_coeffs(carr, axis, P, T):
    """Quadratic F = A u^2 + B uv + C v^2 in the chosen axis; A, B, C are
    jets in the other two coordinates."""
    others = [a for a in range(3) if a != axis]
    cm = np.moveaxis(carr, axis, 2)
    mono = []
    for ax in others:
        u, v = _comp(P, T, ax, 0), _comp(P, T, ax, 1)
        mono.append((v * v, u * v, u * u))
    out = []
    for k in (2, 1, 0):
        acc = None
        for a in range(3):
            for b in range(3):
                term = mono[0][a] * mono[1][b] * cm[a, b, k]
                acc = term if acc is None else acc + term
        out.append(acc)
    return out[0], out[1], out[2]


def _pack_points(points) -> np.ndarray:
    out = np.empty((len(points), 3, 2), dtype=complex)
    for i, (x, y, z) in enumerate(points):
        out[i, 0] = (x.u, x.v)
        out[i, 1] = (y.u, y.v)
        out[i, 2] = (z.u, z.v)
    return out


def _zero_tan(P, ndir=0) -> np.ndarray:
    return np.zeros((ndir,) + P.shape, dtype=complex)


def _residuals(carr, P) -> np.ndarray:
    T = _zero_tan(P)
    A, B, C = _fiber_coeffs(carr, 2, P, T)
    u, v = P[:, 2, 0], P[:, 2, 1]
    return np.abs(A.val * u * u + B.val * u * v + C.val * v * v)


def _fiber_gradients(carr, P) -> np.ndarray:
    """|dF/dw| per axis in that axis's affine chart; shape (3, n)."""
    T = _zero_tan(P)
    out = np.empty((3, P.shape[0]))
    for axis in range(3):
        A, B, C = _fiber_coeffs(carr, axis, P, T)
        u, v = P[:, axis, 0], P[:, axis, 1]
        pick_u = np.abs(u) >= np.abs(v)
        g = np.where(
            pick_u,
            u * (B.val * u + 2 * C.val * v),
            v * (2 * A.val * u + B.val * v),
        )
        out[axis] = np.abs(g)
    return out


def _solve_quadratic(A, B, C):
    """Both homogeneous roots of A u^2 + B uv + C v^2, numerically stable.

    Returns ((u1, v1), (u2, v2)) arrays; lanes with A ~ B ~ C ~ 0 come back
    as NaN.  Double roots are returned twice.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    scale = np.maximum(np.maximum(np.abs(A), np.abs(B)), np.abs(C))
    degenerate = scale <= DEGENERATE_FIBER_TOL
    with np.errstate(all="ignore"):
        sq = np.sqrt(B * B - 4 * A * C)
        plus = B + sq
        minus = B - sq
        big = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
        qq = -big / 2
        # generic pair via Vieta: u/v = qq/A and C/qq
        r1u, r1v = qq, A.copy()
        r2u, r2v = C.copy(), qq.copy()
        # A ~ 0 against the overall scale: roots (1:0) and (-C:B)
        small_a = np.abs(A) <= 1e-14 * scale
        r1u = np.where(small_a, 1.0, r1u)
        r1v = np.where(small_a, 0.0, r1v)
        r2u = np.where(small_a, -C, r2u)
        r2v = np.where(small_a, B, r2v)
        # B ~ C ~ 0 double root at (0:1)
        only_a = (np.abs(B) <= 1e-14 * scale) & (np.abs(C) <= 1e-14 * scale)
        r1u = np.where(only_a & ~small_a, 0.0, r1u)
        r1v = np.where(only_a & ~small_a, 1.0, r1v)
        bad2 = np.maximum(np.abs(r2u), np.abs(r2v)) <= 1e-14 * scale
        r2u = np.where(bad2, r1u, r2u)
        r2v = np.where(bad2, r1v, r2v)
    for arr in (r1u, r1v, r2u, r2v):
        arr[degenerate] = np.nan
    return (r1u, r1v), (r2u, r2v)


def _normalize_pair_arrays(u, v):
    pick_u = np.abs(u) >= np.abs(v)
    w = np.where(pick_u, u, v)
    with np.errstate(all="ignore"):
        return u / w, v / w


# ---------------------------------------------------------------------------
# the involutions


def _sigma_jets(carr, axis, P, T, polish=True):
    """Swap the axis coordinate to the other fiber root, in place on copies.

    Branch formulas (sum and product forms of Vieta plus the A ~ 0
    fallback) are all computed; the candidate with the smallest fiber
    residual wins lane-wise.  A single guarded Newton step in the moved
    coordinate arrests drift.  Lanes with a degenerate fiber become NaN.
    """
    A, B, C = _fiber_coeffs(carr, axis, P, T)
    u, v = _comp(P, T, axis, 0), _comp(P, T, axis, 1)
    cands = [
        (-(B * v) - A * u, A * v),
        (C * v, A * u),
        (-C, B),
    ]
    cscale = np.maximum(np.maximum(np.abs(A.val), np.abs(B.val)), np.abs(C.val))
    res = []
    normed = []
    with np.errstate(all="ignore"):
        for cu, cv in cands:
            size = np.maximum(np.abs(cu.val), np.abs(cv.val))
            pick_u = np.abs(cu.val) >= np.abs(cv.val)
            denom = _jet_where(pick_u, cu, cv)
            nu, nv = cu / denom, cv / denom
            r = np.abs(
                A.val * nu.val * nu.val
                + B.val * nu.val * nv.val
                + C.val * nv.val * nv.val
            )
            r = np.where(size <= 1e-13 * np.maximum(cscale, 1e-300), np.inf, r)
            res.append(r)
            normed.append((nu, nv))
        choice = np.argmin(np.stack(res), axis=0)
        nu, nv = normed[0]
        for k in (1, 2):
            nu = _jet_where(choice == k, normed[k][0], nu)
            nv = _jet_where(choice == k, normed[k][1], nv)
        if polish:
            # one Newton step on the affine fiber equation, skipped where
            # the derivative is tiny (double roots are already exact)
            pick_u = np.abs(nu.val) >= np.abs(nv.val)
            g_v = A + B * nv + C * (nv * nv)
            gp_v = B + 2.0 * (C * nv)
            ok_v = pick_u & (np.abs(gp_v.val) > 1e-8 * np.maximum(cscale, 1e-300))
            nv = _jet_where(ok_v, nv - g_v / gp_v, nv)
            g_u = A * (nu * nu) + B * nu + C
            gp_u = 2.0 * (A * nu) + B
            ok_u = (~pick_u) & (np.abs(gp_u.val) > 1e-8 * np.maximum(cscale, 1e-300))
            nu = _jet_where(ok_u, nu - g_u / gp_u, nu)
        dead = cscale <= DEGENERATE_FIBER_TOL
        uval = np.where(dead, np.nan, nu.val)
        vval = np.where(dead, np.nan, nv.val)
    P2 = P.copy()
    T2 = T.copy()
    P2[:, axis, 0] = uval
    P2[:, axis, 1] = vval
    T2[:, :, axis, 0] = np.where(dead[None], np.nan, nu.tan)
    T2[:, :, axis, 1] = np.where(dead[None], np.nan, nv.tan)
    return P2, T2


FORWARD_AXES = (2, 1, 0)
INVERSE_AXES = (0, 1, 2)


def _apply_chain(carr, P, T, axes, polish=True):
    for axis in axes:
        P, T = _sigma_jets(carr, axis, P, T, polish=polish)
    return P, T


def _unpack_point(surface, P, i, tol) -> SurfacePoint:
    vals = P[i]
    if not np.all(np.isfinite(vals)):
        raise IndeterminatePointError("degenerate fiber encountered", stage=0)
    x = P1Point.make(vals[0, 0], vals[0, 1])
    y = P1Point.make(vals[1, 0], vals[1, 1])
    z = P1Point.make(vals[2, 0], vals[2, 1])
    return make_surface_point(surface, x, y, z, tol=tol)


# ---------------------------------------------------------------------------
# public scalar operations


def solve_fiber(
    surface: WehlerSurface, axis: Axis, p: P1Point, q: P1Point
) -> list[P1Point]:
    """The two points of the fiber of the double cover over (p, q)."""
    P = np.zeros((1, 3, 2), dtype=complex)
    others = [a for a in range(3) if a != axis.value]
    P[0, others[0]] = (p.u, p.v)
    P[0, others[1]] = (q.u, q.v)
    P[0, axis.value] = (1.0, 0.0)
    A, B, C = _fiber_coeffs(surface.array(), axis.value, P, _zero_tan(P))
    scale = max(abs(A.val[0]), abs(B.val[0]), abs(C.val[0]))
    if scale <= DEGENERATE_FIBER_TOL:
        raise DegenerateFiberError("fiber quadratic vanishes identically")
    (r1u, r1v), (r2u, r2v) = _solve_quadratic(A.val, B.val, C.val)
    return [P1Point.make(r1u[0], r1v[0]), P1Point.make(r2u[0], r2v[0])]


def _sigma_index(axis: Axis) -> int:
    # sigma_1 moves X, sigma_2 moves Y, sigma_3 moves Z
    return axis.value + 1


def sigma(
    surface: WehlerSurface,
    axis: Axis,
    p: SurfacePoint,
    tol: float = MEMBERSHIP_TOL,
) -> SurfacePoint:
    """The covering involution of the projection forgetting the axis."""
    if p.residual > tol:
        raise OffSurfaceError("input point fails the membership tolerance")
    P = _pack_points([(p.x, p.y, p.z)])
    T = _zero_tan(P)
    P2, _ = _sigma_jets(surface.array(), axis.value, P, T)
    if not np.all(np.isfinite(P2[0])):
        raise IndeterminatePointError(
            "degenerate fiber under the involution", stage=_sigma_index(axis)
        )
    return _unpack_point(surface, P2, 0, tol)


def wehler_map(
    surface: WehlerSurface, p: SurfacePoint, tol: float = MEMBERSHIP_TOL
) -> SurfacePoint:
    """f = sigma_1 o sigma_2 o sigma_3, with sigma_3 applied first."""
    out = p
    for axis in (Axis.Z, Axis.Y, Axis.X):
        out = sigma(surface, axis, out, tol=tol)
    return out


def wehler_map_inverse(
    surface: WehlerSurface, p: SurfacePoint, tol: float = MEMBERSHIP_TOL
) -> SurfacePoint:
    out = p
    for axis in (Axis.X, Axis.Y, Axis.Z):
        out = sigma(surface, axis, out, tol=tol)
    return out


def random_surface_point(
    surface: WehlerSurface, rng: np.random.Generator, tol: float = MEMBERSHIP_TOL
) -> SurfacePoint:
    """A random point of the surface: random (x, y), random fiber root."""
    carr = surface.array()
    for _ in range(100):
        vals = rng.normal(size=8) + 1j * rng.normal(size=8)
        x = P1Point.make(vals[0], vals[1])
        y = P1Point.make(vals[2], vals[3])
        try:
            roots = solve_fiber(surface, Axis.Z, x, y)
        except DegenerateFiberError:
            continue
        z = roots[int(rng.integers(0, 2))]
        try:
            return make_surface_point(surface, x, y, z, tol=tol)
        except OffSurfaceError:
            continue
    raise InternalInvariantError("could not sample a surface point in 100 tries")


def orbit(
    surface: WehlerSurface,
    p: SurfacePoint,
    n_steps: int,
    tol: float = MEMBERSHIP_TOL,
) -> tuple[list[SurfacePoint], float]:
    """Forward orbit with per-step polish; returns points and max residual."""
    pts = [p]
    worst = p.residual
    cur = p
    for _ in range(n_steps):
        cur = wehler_map(surface, cur, tol=tol)
        worst = max(worst, cur.residual)
        pts.append(cur)
    return pts, worst


# ---------------------------------------------------------------------------
# charts and the tangent map


def _chart_solved_axis(carr, P):
    g = _fiber_gradients(carr, P)
    solved = np.argmax(g, axis=0)
    fail = np.all(g < CHART_FAIL_TOL, axis=0)
    return solved, fail


def _free_axes(solved):
    f0 = np.where(solved == 0, 1, 0)
    f1 = np.where(solved == 2, 1, 2)
    return f0, f1


def _affine_partials(carr, P):
    """Complex dF/dw per axis in the chart branch of the current
    representative (w = v/u when |u| >= |v|, else u/v); shape (3, n)."""
    T = _zero_tan(P)
    out = np.empty((3, P.shape[0]), dtype=complex)
    branch_pick_u = np.empty((3, P.shape[0]), dtype=bool)
    for axis in range(3):
        A, B, C = _fiber_coeffs(carr, axis, P, T)
        u, v = P[:, axis, 0], P[:, axis, 1]
        pick_u = np.abs(u) >= np.abs(v)
        out[axis] = np.where(
            pick_u,
            u * (B.val * u + 2 * C.val * v),
            v * (2 * A.val * u + B.val * v),
        )
        branch_pick_u[axis] = pick_u
    return out, branch_pick_u


def _seed_chart_tangents(carr, P):
    """Tangent frame for the chart at each lane: two directions moving one
    free-axis affine coordinate each, with the solved axis responding per
    the implicit function theorem.  Returns (T, solved, fail, pick_u)."""
    solved, fail = _chart_solved_axis(carr, P)
    partials, pick_u = _affine_partials(carr, P)
    f0, f1 = _free_axes(solved)
    n = P.shape[0]
    lanes = np.arange(n)
    T = np.zeros((2, n, 3, 2), dtype=complex)
    with np.errstate(all="ignore"):
        for d, free in enumerate((f0, f1)):
            # unit affine velocity on the free axis
            fu = P[lanes, free, 0]
            fv = P[lanes, free, 1]
            pick = pick_u[free, lanes]
            T[d, lanes, free, 1] = np.where(pick, fu, 0)
            T[d, lanes, free, 0] = np.where(pick, 0, fv)
            # implicit response of the solved axis
            dws = -partials[free, lanes] / partials[solved, lanes]
            su = P[lanes, solved, 0]
            sv = P[lanes, solved, 1]
            spick = pick_u[solved, lanes]
            T[d, lanes, solved, 1] += np.where(spick, su * dws, 0)
            T[d, lanes, solved, 0] += np.where(spick, 0, sv * dws)
    return T, solved, fail, pick_u


def _extract_velocities(P, T, axes, pick_u_rows):
    """Affine velocities d(w_axis) for the two chart axes; returns a
    (n, 2, 2) Jacobian block J[lane, out, dir]."""
    n = P.shape[0]
    lanes = np.arange(n)
    J = np.empty((n, 2, 2), dtype=complex)
    with np.errstate(all="ignore"):
        for out_i, ax in enumerate(axes):
            u = P[lanes, ax, 0]
            v = P[lanes, ax, 1]
            du = T[:, lanes, ax, 0]
            dv = T[:, lanes, ax, 1]
            pick = pick_u_rows[out_i]
            vel = np.where(
                pick[None],
                (dv * u - v * du) / (u * u),
                (du * v - u * dv) / (v * v),
            )
            J[:, out_i, 0] = vel[0]
            J[:, out_i, 1] = vel[1]
    return J


def tangent_map(
    surface: WehlerSurface,
    p: SurfacePoint,
    axes: tuple[int, ...] = FORWARD_AXES,
) -> np.ndarray:
    """2x2 complex derivative of the axis chain from the chart at p to the
    chart at the image point, by dual-number propagation."""
    carr = surface.array()
    P = _pack_points([(p.x, p.y, p.z)])
    T, solved, fail, _ = _seed_chart_tangents(carr, P)
    if fail[0]:
        raise ChartFailureError("all three fiber gradients are below 1e-10")
    Q, TQ = _apply_chain(carr, P, T, axes)
    if not np.all(np.isfinite(Q[0])):
        raise IndeterminatePointError("chain hit a degenerate fiber", stage=0)
    solved_out, fail_out = _chart_solved_axis(carr, Q)
    if fail_out[0]:
        raise ChartFailureError("image point admits no chart")
    f0, f1 = _free_axes(solved_out)
    out_axes = (f0, f1)
    pick_rows = []
    for ax in out_axes:
        u = Q[np.arange(1), ax, 0]
        v = Q[np.arange(1), ax, 1]
        pick_rows.append(np.abs(u) >= np.abs(v))
    J = _extract_velocities(Q, TQ, out_axes, pick_rows)
    return J[0]


# ---------------------------------------------------------------------------
# Newton search for periodic points


def _chordal_displacement(P, Q):
    """Max over axes of |u1 v2 - u2 v1| for max-normalized representatives."""
    nP = np.empty_like(P)
    nQ = np.empty_like(Q)
    for ax in range(3):
        nP[:, ax, 0], nP[:, ax, 1] = _normalize_pair_arrays(P[:, ax, 0], P[:, ax, 1])
        nQ[:, ax, 0], nQ[:, ax, 1] = _normalize_pair_arrays(Q[:, ax, 0], Q[:, ax, 1])
    cross = np.abs(
        nP[:, :, 0] * nQ[:, :, 1] - nQ[:, :, 0] * nP[:, :, 1]
    )
    return cross.max(axis=1)


def _plain_chain(carr, P, axes, repeats=1):
    T = _zero_tan(P)
    Q = P
    for _ in range(repeats):
        Q, T = _apply_chain(carr, Q, T, axes)
    return Q


def _seed_points(carr, rng, count):
    """Random on-surface start points for one search chunk."""
    vals = rng.normal(size=(count, 8)) + 1j * rng.normal(size=(count, 8))
    P = np.empty((count, 3, 2), dtype=complex)
    P[:, 0, 0], P[:, 0, 1] = _normalize_pair_arrays(vals[:, 0], vals[:, 1])
    P[:, 1, 0], P[:, 1, 1] = _normalize_pair_arrays(vals[:, 2], vals[:, 3])
    P[:, 2] = (1.0, 0.0)
    A, B, C = _fiber_coeffs(carr, 2, P, _zero_tan(P))
    r1, r2 = _solve_quadratic(A.val, B.val, C.val)
    take_second = rng.random(count) < 0.5
    zu = np.where(take_second, r2[0], r1[0])
    zv = np.where(take_second, r2[1], r1[1])
    P[:, 2, 0], P[:, 2, 1] = _normalize_pair_arrays(zu, zv)
    return P


def _rebuild_solved(carr, P, solved, prev_u, prev_v):
    """Re-solve the fiber quadratic on each lane's solved axis and take the
    root chordally closest to the previous coordinate (on-surface return)."""
    n = P.shape[0]
    lanes = np.arange(n)
    roots = []
    for axis in range(3):
        A, B, C = _fiber_coeffs(carr, axis, P, _zero_tan(P))
        roots.append(_solve_quadratic(A.val, B.val, C.val))
    r1u = np.choose(solved, [roots[a][0][0] for a in range(3)])
    r1v = np.choose(solved, [roots[a][0][1] for a in range(3)])
    r2u = np.choose(solved, [roots[a][1][0] for a in range(3)])
    r2v = np.choose(solved, [roots[a][1][1] for a in range(3)])
    n1u, n1v = _normalize_pair_arrays(r1u, r1v)
    n2u, n2v = _normalize_pair_arrays(r2u, r2v)
    pu, pv = _normalize_pair_arrays(prev_u, prev_v)
    d1 = np.abs(n1u * pv - pu * n1v)
    d2 = np.abs(n2u * pv - pu * n2v)
    first = d1 <= d2
    su = np.where(first, n1u, n2u)
    sv = np.where(first, n1v, n2v)
    P2 = P.copy()
    P2[lanes, solved, 0] = su
    P2[lanes, solved, 1] = sv
    return P2


# Stabilizing matrices for the damped Newton step, cycled per seed chunk.
# The step solves (DG - beta*|G|*C) delta = -G: near a root it is plain
# Newton; far away it follows the flow of C^-1 G with bounded steps, which
# turns roots of every multiplier phase into reachable targets and keeps
# the lane away from the singular set of the raw Newton map.
_ROT = cmath.exp(2j * math.pi / 5)
_STABILIZERS = (
    np.eye(2, dtype=complex),
    np.eye(2, dtype=complex) * _ROT,
    np.eye(2, dtype=complex) * _ROT.conjugate(),
    -np.eye(2, dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[-1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1], [-1, 0]], dtype=complex),
)
NEWTON_BETA = 2.0


def _newton_chunk(args):
    (carr, n, count, rng_seed, chunk_index, max_iter) = args
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=rng_seed, spawn_key=(n, chunk_index))
    )
    stab = _STABILIZERS[chunk_index % len(_STABILIZERS)]
    with np.errstate(all="ignore"):
        P = _seed_points(carr, rng, count)
        active = np.all(np.isfinite(P.reshape(count, -1)), axis=1)
        lanes = np.arange(count)
        for _ in range(max_iter):
            if not active.any():
                break
            T, solved, fail, pick_u = _seed_chart_tangents(carr, P)
            active &= ~fail
            Q, TQ = _apply_chain(carr, P, T, FORWARD_AXES)
            for _ in range(n - 1):
                Q, TQ = _apply_chain(carr, Q, TQ, FORWARD_AXES)
            finite = np.all(np.isfinite(Q.reshape(count, -1)), axis=1)
            active &= finite
            f0, f1 = _free_axes(solved)
            # displacement and Jacobian in the source chart, same branch
            pick_rows = [pick_u[f0, lanes], pick_u[f1, lanes]]
            J = _extract_velocities(Q, TQ, (f0, f1), pick_rows)
            G = np.empty((count, 2), dtype=complex)
            W = np.empty((count, 2), dtype=complex)
            for i, ax in enumerate((f0, f1)):
                pu = P[lanes, ax, 0]
                pv = P[lanes, ax, 1]
                qu = Q[lanes, ax, 0]
                qv = Q[lanes, ax, 1]
                pick = pick_rows[i]
                W[:, i] = np.where(pick, pv / pu, pu / pv)
                G[:, i] = np.where(pick, qv / qu, qu / qv) - W[:, i]
            gnorm = np.sqrt(np.abs(G[:, 0]) ** 2 + np.abs(G[:, 1]) ** 2)
            M = J - np.eye(2)[None]
            M = M - (NEWTON_BETA * gnorm)[:, None, None] * stab[None]
            det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
            ok = np.abs(det) > 1e-14
            active &= ok
            delta = np.empty_like(G)
            delta[:, 0] = -(M[:, 1, 1] * G[:, 0] - M[:, 0, 1] * G[:, 1]) / det
            delta[:, 1] = -(-M[:, 1, 0] * G[:, 0] + M[:, 0, 0] * G[:, 1]) / det
            size = np.sqrt(np.abs(delta[:, 0]) ** 2 + np.abs(delta[:, 1]) ** 2)
            damp = np.minimum(1.0, NEWTON_STEP_CAP / np.maximum(size, 1e-300))
            delta *= damp[:, None]
            disp = _chordal_displacement(P, Q)
            done = active & (disp <= NEWTON_ACCEPT_TOL)
            move = active & ~done
            Wn = W + np.where(move[:, None], delta, 0)
            P2 = P.copy()
            for i, ax in enumerate((f0, f1)):
                pick = pick_rows[i]
                P2[lanes, ax, 0] = np.where(pick, 1.0, Wn[:, i])
                P2[lanes, ax, 1] = np.where(pick, Wn[:, i], 1.0)
            prev_u = P[lanes, solved, 0]
            prev_v = P[lanes, solved, 1]
            P2 = _rebuild_solved(carr, P2, solved, prev_u, prev_v)
            P = np.where(move[:, None, None], P2, P)
            still = np.all(np.isfinite(P.reshape(count, -1)), axis=1)
            active &= still
        Q = _plain_chain(carr, P, FORWARD_AXES, repeats=n)
        finite = np.all(np.isfinite(Q.reshape(count, -1)), axis=1)
        disp = np.where(finite, _chordal_displacement(P, Q), np.inf)
        good = active & finite & (disp <= NEWTON_ACCEPT_TOL)
    return P[good]


def _canonical_sort(P):
    if len(P) == 0:
        return P
    flat = P.reshape(len(P), -1)
    keys = []
    for col in range(flat.shape[1]):
        keys.append(flat[:, col].imag)
        keys.append(flat[:, col].real)
    order = np.lexsort(tuple(keys))
    return P[order]


def _greedy_dedup(P, tol=DEDUP_TOL):
    kept: list[np.ndarray] = []
    for row in P:
        cur = row[None]
        dup = False
        for k in kept:
            if _chordal_displacement(cur, k[None])[0] <= tol:
                dup = True
                break
        if not dup:
            kept.append(row)
    if not kept:
        return P[:0]
    return np.stack(kept)


def _exact_period_filter(carr, P, n):
    if len(P) == 0:
        return P
    keep = np.ones(len(P), dtype=bool)
    for m in range(1, n):
        if n % m != 0:
            continue
        Q = _plain_chain(carr, P, FORWARD_AXES, repeats=m)
        with np.errstate(all="ignore"):
            finite = np.all(np.isfinite(Q.reshape(len(P), -1)), axis=1)
            disp = np.where(finite, _chordal_displacement(P, Q), np.inf)
        keep &= disp > DEDUP_TOL
    return P[keep]


def _multipliers_at(carr, P, n, axes=FORWARD_AXES):
    """Eigenvalues of the chart derivative of f^n at each (periodic) lane."""
    T, solved, fail, pick_u = _seed_chart_tangents(carr, P)
    Q, TQ = P, T
    for _ in range(n):
        Q, TQ = _apply_chain(carr, Q, TQ, axes)
    lanes = np.arange(len(P))
    f0, f1 = _free_axes(solved)
    pick_rows = [pick_u[f0, lanes], pick_u[f1, lanes]]
    J = _extract_velocities(Q, TQ, (f0, f1), pick_rows)
    t = J[:, 0, 0] + J[:, 1, 1]
    d = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    with np.errstate(all="ignore"):
        sq = np.sqrt(t * t - 4 * d)
        l1 = (t + sq) / 2
        l2 = (t - sq) / 2
    swap = np.abs(l2) > np.abs(l1)
    big = np.where(swap, l2, l1)
    small = np.where(swap, l1, l2)
    return big, small, fail


def newton_periodic(
    surface: WehlerSurface,
    n: int,
    seeds: int,
    rng_seed: int,
    exact_period: bool = True,
    workers: int = 1,
    max_iter: int = 60,
) -> list[SaddleOrbit]:
    """Periodic points of f^n by damped chart Newton from random seeds.

    Search tasks are keyed by a counter-based stream per 256-seed chunk, and
    candidates are canonically sorted before deduplication, so the result is
    identical for any worker count.
    """
    if n < 1 or n > PERIOD_CAP:
        raise PreconditionError(f"period must be between 1 and {PERIOD_CAP}")
    carr = surface.array()
    chunks = []
    index = 0
    remaining = seeds
    while remaining > 0:
        take = min(SEED_CHUNK, remaining)
        chunks.append((carr, n, take, rng_seed, index, max_iter))
        index += 1
        remaining -= take
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_newton_chunk, chunks))
    else:
        parts = [_newton_chunk(c) for c in chunks]
    cand = (
        np.concatenate(parts)
        if parts
        else np.empty((0, 3, 2), dtype=complex)
    )
    cand = _canonical_sort(cand)
    cand = _greedy_dedup(cand)
    if exact_period:
        cand = _exact_period_filter(carr, cand, n)
    out: list[SaddleOrbit] = []
    if len(cand) == 0:
        return out
    big, small, fail = _multipliers_at(carr, cand, n)
    Q = _plain_chain(carr, cand, FORWARD_AXES, repeats=n)
    disp = _chordal_displacement(cand, Q)
    res = _residuals(carr, cand)
    for i in range(len(cand)):
        if fail[i] or disp[i] > REPLAY_TOL or res[i] > MEMBERSHIP_TOL:
            continue
        if not (np.isfinite(big[i]) and np.isfinite(small[i])):
            continue
        point = SurfacePoint(
            P1Point.make(cand[i, 0, 0], cand[i, 0, 1]),
            P1Point.make(cand[i, 1, 0], cand[i, 1, 1]),
            P1Point.make(cand[i, 2, 0], cand[i, 2, 1]),
            float(res[i]),
        )
        kind = (
            OrbitType.SADDLE
            if abs(big[i]) > 1.0 > abs(small[i])
            else OrbitType.NONSADDLE
        )
        out.append(
            SaddleOrbit(
                period=n,
                point=point,
                multipliers=(complex(big[i]), complex(small[i])),
                type=kind,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Lyapunov and rigidity assembly


def lyapunov_from_saddles(orbits: Sequence[SaddleOrbit]) -> LyapunovReport:
    """Exponent estimates from saddle multipliers: the mean over saddles of
    (1/n) log |multiplier|."""
    saddles = [o for o in orbits if o.type is OrbitType.SADDLE]
    if len(saddles) < 5:
        raise TooFewSaddlesError(f"{len(saddles)} saddles; need at least 5")
    ups = np.array([math.log(abs(o.multipliers[0])) / o.period for o in saddles])
    downs = np.array([math.log(abs(o.multipliers[1])) / o.period for o in saddles])
    stderr = float(ups.std(ddof=1) / math.sqrt(len(ups))) if len(ups) > 1 else 0.0
    return LyapunovReport(
        float(ups.mean()),
        float(downs.mean()),
        LyapunovMethod.SADDLE_MULTIPLIERS,
        stderr,
    )


def torus_control_saddles(
    f: TorusAutomorphism, periods: Iterable[int] = (1, 2, 3, 4), per_period: int = 5
) -> list[SaddleOrbit]:
    """Saddle records for a hyperbolic torus automorphism: every period-n
    point is a saddle with multipliers the eigenvalues of M^n, exactly."""
    out = []
    for n in periods:
        count = fix_count(f, n)
        mn = f.matrix.power(n)
        t, d = mn.trace(), mn.det()
        sq = cmath.sqrt(complex(t * t - 4 * d))
        l1, l2 = (t + sq) / 2, (t - sq) / 2
        if abs(l2) > abs(l1):
            l1, l2 = l2, l1
        kind = OrbitType.SADDLE if abs(l1) > 1.0 > abs(l2) else OrbitType.NONSADDLE
        for _ in range(min(per_period, count)):
            out.append(
                SaddleOrbit(
                    period=n,
                    point=TorusPoint.origin(),
                    multipliers=(l1, l2),
                    type=kind,
                )
            )
    return out


@dataclass(frozen=True)
class RigidityReport:
    lambda_f: float
    lambda_u_est: float | None
    lambda_s_est: float | None
    lyap_stderr: float | None
    dimension_est: float | None
    dimension_stderr: float | None
    gap_u: float | None
    gap_s: float | None
    verdict: RigidityVerdict
    n_saddles: int
    qr_lambda_u: float | None = None
    qr_gap: float | None = None
    per_period: tuple[tuple[int, int, float], ...] | None = None


def pool_period_estimates(
    estimates: Sequence[LyapunovReport],
) -> LyapunovReport:
    """Combine per-period Lyapunov estimates with equal weight per period.

    The standard error includes the between-period sample variance: the
    per-period means drift systematically with the period (finite-period
    saddle samples are not draws from one population), so quoting the
    flat per-saddle standard error would overstate the precision.
    """
    if not estimates:
        raise TooFewSaddlesError("no per-period estimates to pool")
    ups = np.array([e.lambda_u for e in estimates])
    downs = np.array([e.lambda_s for e in estimates])
    k = len(estimates)
    if k == 1:
        stderr = estimates[0].stderr
    else:
        between = float(ups.var(ddof=1)) / k
        within = sum(e.stderr**2 for e in estimates) / k**2
        stderr = math.sqrt(between + within)
    return LyapunovReport(
        float(ups.mean()),
        float(downs.mean()),
        LyapunovMethod.SADDLE_MULTIPLIERS,
        float(stderr),
    )


def assemble_rigidity(
    lambda_f: float,
    half_log_lambda_f: float,
    lyap: LyapunovReport | None,
    dimension: tuple[float, float] | None,
    n_saddles: int,
    qr_lambda_u: float | None = None,
    per_period: tuple[tuple[int, int, float], ...] | None = None,
) -> RigidityReport:
    """Verdict logic shared by the surface pipeline and the torus control.

    KUMMER_CONSISTENT needs both gaps within 3 stderr and the dimension
    within 3 stderr of 4; a positive (Ruelle-direction) gap beyond 3 stderr
    is RIGIDITY_GAP; negative gaps beyond tolerance or missing data give
    INCONCLUSIVE.
    """
    if lyap is None:
        return RigidityReport(
            lambda_f,
            None,
            None,
            None,
            dimension[0] if dimension else None,
            dimension[1] if dimension else None,
            None,
            None,
            RigidityVerdict.INCONCLUSIVE,
            n_saddles,
            qr_lambda_u,
            None,
            per_period,
        )
    gap_u = lyap.lambda_u - half_log_lambda_f
    gap_s = -lyap.lambda_s - half_log_lambda_f
    band = 3 * lyap.stderr
    if gap_u > band or gap_s > band:
        verdict = RigidityVerdict.RIGIDITY_GAP
    elif gap_u < -band or gap_s < -band:
        verdict = RigidityVerdict.INCONCLUSIVE
    elif dimension is not None and abs(dimension[0] - 4.0) <= 3 * dimension[1]:
        verdict = RigidityVerdict.KUMMER_CONSISTENT
    else:
        verdict = RigidityVerdict.INCONCLUSIVE
    return RigidityReport(
        lambda_f,
        lyap.lambda_u,
        lyap.lambda_s,
        lyap.stderr,
        dimension[0] if dimension else None,
        dimension[1] if dimension else None,
        gap_u,
        gap_s,
        verdict,
        n_saddles,
        qr_lambda_u,
        None if qr_lambda_u is None else qr_lambda_u - half_log_lambda_f,
        per_period,
    )


def wehler_lambda_f() -> float:
    """Dynamical degree of f on the (2,2,2) cohomology: 9 + 4 sqrt(5),
    independent of the surface coefficients."""
    m1, m2, m3, _ = wehler_cohomology_action()
    return dynamical_degree(m1 @ m2 @ m3).lambda_f


def saddle_cloud(orbits: Sequence[SaddleOrbit]) -> np.ndarray:
    pts = [o.point for o in orbits if isinstance(o.point, SurfacePoint)]
    return _pack_points([(p.x, p.y, p.z) for p in pts])


def surface_cloud_distance(samples: np.ndarray, i: int) -> np.ndarray:
    """Product chordal metric on (n, 3, 2) homogeneous representatives."""
    x = np.asarray(samples)
    p = x[i]
    cross = np.abs(
        x[:, :, 0] * p[None, :, 1] - p[None, :, 0] * x[:, :, 1]
    )
    norms_x = np.sqrt(np.abs(x[:, :, 0]) ** 2 + np.abs(x[:, :, 1]) ** 2)
    norms_p = np.sqrt(np.abs(p[:, 0]) ** 2 + np.abs(p[:, 1]) ** 2)
    cross = cross / (norms_x * norms_p[None, :])
    return np.sqrt((cross**2).sum(axis=1))


DEFAULT_SURFACE_RADII = tuple(np.geomspace(0.5, 0.05, 8))


def rigidity_report(
    surface: WehlerSurface,
    n_max: int,
    seeds: int,
    rng_seed: int,
    workers: int = 1,
    radii: Sequence[float] = DEFAULT_SURFACE_RADII,
    probes: int = 64,
) -> tuple[RigidityReport, list[SaddleOrbit]]:
    """Pool saddle orbits over periods 1..n_max and assemble the verdict.

    Pooling is stratified by period: each period with enough saddles gets
    its own lyapunov_from_saddles estimate, and the estimates are combined
    with equal weight per period.
    """
    lam_f = wehler_lambda_f()
    orbits: list[SaddleOrbit] = []
    per_period: list[tuple[int, int, float]] = []
    estimates: list[LyapunovReport] = []
    for n in range(1, n_max + 1):
        batch = newton_periodic(surface, n, seeds, rng_seed, workers=workers)
        orbits.extend(batch)
        try:
            est = lyapunov_from_saddles(batch)
        except TooFewSaddlesError:
            continue
        estimates.append(est)
        per_period.append((n, len(batch), est.lambda_u))
    try:
        lyap = pool_period_estimates(estimates)
    except TooFewSaddlesError:
        lyap = None
    dimension = None
    cloud = saddle_cloud(orbits)
    if len(cloud) >= 1000:
        try:
            dimension = local_dimension_estimate(
                cloud,
                surface_cloud_distance,
                radii,
                min(probes, len(cloud)),
                rng_seed,
            )
        except (InsufficientSamplesError, DegenerateRadiiError):
            dimension = None
    report = assemble_rigidity(
        lam_f,
        0.5 * math.log(lam_f),
        lyap,
        dimension,
        len(orbits),
        per_period=tuple(per_period) if per_period else None,
    )
    return report, orbits


def torus_control_report(
    f: TorusAutomorphism,
    qr_steps: int = 10**4,
    n_samples: int = 10**5,
    radii: Sequence[float] = tuple(np.geomspace(0.5, 0.05, 8)),
    probes: int = 64,
    rng_seed: int = 0,
) -> RigidityReport:
    """The exactly-solvable control run through the same report pipeline.

    lambda_u and half the log-degree are computed by one shared closed form,
    so the rigidity gap is exactly zero; a QR-orbit estimate and the Haar
    dimension estimate are attached as numerical cross-checks.
    """
    half = half_log_h2_degree(f)
    exact = lyapunov_exact(f)
    qr = lyapunov_qr_orbit(f, TorusPoint.origin(), qr_steps)
    samples = haar_samples(n_samples, rng_seed)
    dimension = local_dimension_estimate(
        samples, torus_distance(f.lattice), radii, probes, rng_seed + 1
    )
    return assemble_rigidity(
        math.exp(2 * half), half, exact, dimension, 0, qr.lambda_u
    )


# ---------------------------------------------------------------------------
# singularity probe


def _suspect_system(carr, wx, wy, wz):
    """Residual 4-vector (F, dF/dwx, dF/dwy, dF/dwz) at affine (wx, wy, wz)
    in the charts u = 1 per axis."""
    P = np.empty((1, 3, 2), dtype=complex)
    P[0, 0] = (1.0, wx)
    P[0, 1] = (1.0, wy)
    P[0, 2] = (1.0, wz)
    T = _zero_tan(P)
    out = np.empty(4, dtype=complex)
    A, B, C = _fiber_coeffs(carr, 2, P, T)
    out[0] = A.val[0] + B.val[0] * wz + C.val[0] * wz * wz
    for slot, axis in enumerate((0, 1, 2)):
        A, B, C = _fiber_coeffs(carr, axis, P, T)
        w = (wx, wy, wz)[axis]
        out[1 + slot] = B.val[0] + 2 * C.val[0] * w
    return out


def singularity_probe(
    surface: WehlerSurface, trials: int, rng_seed: int = 0
) -> list[Suspect]:
    """Advisory search for singular points: sample fiber points, rank by the
    largest chart gradient, then Gauss-Newton refine the most suspicious
    candidates on (F, grad F) = 0 and flag residuals below 1e-8."""
    carr = surface.array()
    rng = np.random.default_rng(rng_seed)
    with np.errstate(all="ignore"):
        P = _seed_points(carr, rng, max(trials, 1))
        finite = np.all(np.isfinite(P.reshape(len(P), -1)), axis=1)
        P = P[finite]
        if len(P) == 0:
            return []
        grads = _fiber_gradients(carr, P).max(axis=0)
        order = np.argsort(grads)
        best = P[order[: min(20, len(P))]]
        found = []
        for cand in best:
            # move to the all-affine chart; skip candidates near a pole
            if any(abs(cand[ax, 0]) < 1e-6 for ax in range(3)):
                continue
            w = np.array(
                [cand[0, 1] / cand[0, 0], cand[1, 1] / cand[1, 0], cand[2, 1] / cand[2, 0]]
            )
            for _ in range(40):
                r = _suspect_system(carr, *w)
                jac = np.empty((4, 3), dtype=complex)
                h = 1e-7
                for j in range(3):
                    wp = w.copy()
                    wm = w.copy()
                    wp[j] += h
                    wm[j] -= h
                    jac[:, j] = (
                        _suspect_system(carr, *wp) - _suspect_system(carr, *wm)
                    ) / (2 * h)
                step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
                if not np.all(np.isfinite(step)):
                    break
                size = np.abs(step).max()
                if size > 0.5:
                    step = step * (0.5 / size)
                w = w + step
                if np.abs(step).max() < 1e-14:
                    break
            r = _suspect_system(carr, *w)
            score = float(np.abs(r).max())
            if score < 1e-8 and np.all(np.isfinite(w)):
                x = P1Point.make(1.0, w[0])
                y = P1Point.make(1.0, w[1])
                z = P1Point.make(1.0, w[2])
                pt = SurfacePoint(x, y, z, float(np.abs(r[0])))
                if all(
                    pt.chordal(s.point) > 1e-6 for s in found
                ):
                    found.append(Suspect(point=pt, grad_max=score))
    return found


# ---------------------------------------------------------------------------
# density histogram


def density_histogram(
    surface: WehlerSurface,
    p0: SurfacePoint,
    iters: int,
    proj: tuple[str, str] = ("x", "y"),
    bins: int = 512,
) -> np.ndarray:
    """Log-scaled 2D histogram of an orbit under a coordinate-pair
    projection; each P1 coordinate maps to its chordal height
    |v|^2/(|u|^2+|v|^2) in [0, 1]."""
    names = {"x": 0, "y": 1, "z": 2}
    ax_a, ax_b = names[proj[0]], names[proj[1]]
    heights = np.empty((iters + 1, 2))
    cur = p0
    pts = [p0]
    for _ in range(iters):
        cur = wehler_map(surface, cur)
        pts.append(cur)
    for i, p in enumerate(pts):
        for slot, ax in enumerate((ax_a, ax_b)):
            coord = (p.x, p.y, p.z)[ax]
            au, av = abs(coord.u) ** 2, abs(coord.v) ** 2
            heights[i, slot] = av / (au + av)
    hist, _, _ = np.histogram2d(
        heights[:, 0], heights[:, 1], bins=bins, range=[[0, 1], [0, 1]]
    )
    img = np.log1p(hist)
    top = img.max()
    if top > 0:
        img = img / top
    return (img * 255).astype(np.uint8)
