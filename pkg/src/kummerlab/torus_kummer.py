"""Exact dynamics of linear automorphisms of a product of elliptic curves.

A point of E x E with E = C/(Z + Z*tau) is stored in lattice coordinates
(a1, b1, a2, b2), each in [0, 1), for (x, y) = (a1 + b1*tau, a2 + b2*tau).
An integer matrix M acts complex-linearly on (x, y); in lattice coordinates
it transforms (a1, a2) and (b1, b2) separately, so periodic-point work can
run in exact rational arithmetic while long orbits use floats.

The module also hosts the quotient projections (the sign involution with its
sixteen fixed points, and multiplication by tau on the square lattices), the
induced action on degree-2 cohomology, exact and orbit-based Lyapunov
exponents, Lefschetz periodic-point counting and enumeration, Weyl-sum
equidistribution reports, and the shared local-dimension estimator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CapExceededError,
    DegeneratePeriodError,
    DegenerateRadiiError,
    EmptyEnsembleError,
    InsufficientSamplesError,
    InternalInvariantError,
    NotHyperbolicError,
    PreconditionError,
    UnsupportedTauError,
)
from .lattice_algebra import IntMatrix, smith_normal_form

TAU_I = complex(0.0, 1.0)
TAU_ZETA3 = complex(-0.5, math.sqrt(3.0) / 2.0)

# lattice-linear action of multiplication by tau on (a, b), z = a + b*tau
ETA_TAU_MATRICES = {
    "i": IntMatrix.from_rows([[0, -1], [1, 0]]),
    "zeta3": IntMatrix.from_rows([[0, -1], [1, -1]]),
}
ETA_TAU_ORDERS = {"i": 4, "zeta3": 3}

WEYL_TRIVIAL_TOL = 1e-10


class Quotient(Enum):
    NONE = "NONE"
    KUMMER_ETA = "KUMMER_ETA"
    ETA_TAU = "ETA_TAU"


class LyapunovMethod(Enum):
    EXACT_EIGEN = "EXACT_EIGEN"
    QR_ORBIT = "QR_ORBIT"
    SADDLE_MULTIPLIERS = "SADDLE_MULTIPLIERS"


@dataclass(frozen=True)
class TorusLattice:
    """Modulus of the elliptic curve E = C/(Z + Z*tau)."""

    tau: complex = TAU_I

    def __post_init__(self):
        if not self.tau.imag > 0:
            raise PreconditionError("tau must lie in the upper half plane")


def _tau_key(lattice: TorusLattice) -> str:
    for key, tau in (("i", TAU_I), ("zeta3", TAU_ZETA3)):
        if abs(lattice.tau - tau) <= 1e-12:
            return key
    raise UnsupportedTauError(
        "multiplication by tau is lattice-linear only for tau = i or zeta3"
    )


@dataclass(frozen=True, order=True)
class TorusPoint:
    """Point of the torus in lattice coordinates (a1, b1, a2, b2)."""

    coords: tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self):
        if len(self.coords) != 4:
            raise PreconditionError("a torus point has 4 lattice coordinates")
        for c in self.coords:
            if not (0 <= c < 1):
                raise PreconditionError("lattice coordinates live in [0, 1)")

    @classmethod
    def from_rationals(cls, a1, b1, a2, b2) -> "TorusPoint":
        return cls(tuple(Fraction(c) % 1 for c in (a1, b1, a2, b2)))

    @classmethod
    def origin(cls) -> "TorusPoint":
        return cls.from_rationals(0, 0, 0, 0)

    def __neg__(self) -> "TorusPoint":
        return TorusPoint(tuple((-c) % 1 for c in self.coords))

    def add(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(
            tuple((a + b) % 1 for a, b in zip(self.coords, other.coords))
        )

    def to_floats(self) -> tuple[float, float, float, float]:
        return tuple(float(c) for c in self.coords)


@dataclass(frozen=True)
class TorusAutomorphism:
    """Action of an integer matrix on the torus, with an optional quotient tag."""

    matrix: IntMatrix
    lattice: TorusLattice = TorusLattice()
    quotient: Quotient = Quotient.NONE

    def __post_init__(self):
        if self.matrix.dim != 2:
            raise PreconditionError("the acting matrix must be 2x2")
        if self.matrix.det() not in (1, -1):
            raise PreconditionError("the acting matrix must be invertible over Z")
        if self.quotient is Quotient.ETA_TAU:
            _tau_key(self.lattice)

    @property
    def is_hyperbolic(self) -> bool:
        """Eigenvalue moduli distinct: |trace| > 2, or det = -1 with trace != 0."""
        t = self.matrix.trace()
        if self.matrix.det() == 1:
            return abs(t) > 2
        return t != 0

    def apply(self, p: TorusPoint) -> TorusPoint:
        (a, b), (c, d) = self.matrix.entries
        a1, b1, a2, b2 = p.coords
        return TorusPoint(
            (
                (a * a1 + b * a2) % 1,
                (a * b1 + b * b2) % 1,
                (c * a1 + d * a2) % 1,
                (c * b1 + d * b2) % 1,
            )
        )

    def apply_n(self, p: TorusPoint, n: int) -> TorusPoint:
        return replace_matrix(self, self.matrix.power(n)).apply(p)

    def inverse(self) -> "TorusAutomorphism":
        return replace_matrix(self, self.matrix.inverse_unimodular())

    def project(self, p: TorusPoint) -> TorusPoint:
        """Canonical representative of p on the tagged quotient."""
        if self.quotient is Quotient.KUMMER_ETA:
            return kummer_project(p)
        if self.quotient is Quotient.ETA_TAU:
            return eta_tau_project(p, self.lattice)
        return p


def replace_matrix(f: TorusAutomorphism, m: IntMatrix) -> TorusAutomorphism:
    return TorusAutomorphism(matrix=m, lattice=f.lattice, quotient=f.quotient)


@dataclass(frozen=True)
class PeriodicEnsemble:
    """Fixed points of the n-th iterate, enumerated exactly."""

    period: int
    points: tuple[TorusPoint, ...]
    count: int


@dataclass(frozen=True)
class LyapunovReport:
    lambda_u: float
    lambda_s: float
    method: LyapunovMethod
    stderr: float

    def __post_init__(self):
        if self.lambda_s > self.lambda_u:
            raise InternalInvariantError("exponents out of order")
        if self.stderr < 0:
            raise InternalInvariantError("negative standard error")


# ---------------------------------------------------------------------------
# Lyapunov exponents


def _spectral_radius_2x2(m: IntMatrix) -> float:
    """Largest eigenvalue modulus of an integer 2x2 matrix, closed form.

    Shared by lyapunov_exact and half_log_h2_degree so the rigidity gap
    lambda_u - (1/2) log lambda_f vanishes exactly in floating point.
    """
    t = m.trace()
    d = m.det()
    disc = t * t - 4 * d
    if disc > 0:
        return (abs(t) + math.sqrt(disc)) / 2.0
    # complex pair; modulus^2 equals the determinant
    return math.sqrt(abs(d))


def lyapunov_exact(f: TorusAutomorphism) -> LyapunovReport:
    """Exact Lyapunov exponents of the constant-derivative torus map.

    One complex exponent per eigenvalue of M; |det M| = 1 makes them
    opposite: lambda_u = log rho(M), lambda_s = -lambda_u.
    """
    if not f.is_hyperbolic:
        raise NotHyperbolicError("both eigenvalue moduli equal 1")
    lam_u = math.log(_spectral_radius_2x2(f.matrix))
    return LyapunovReport(lam_u, -lam_u, LyapunovMethod.EXACT_EIGEN, 0.0)


def half_log_h2_degree(f: TorusAutomorphism) -> float:
    """Half the entropy: (1/2) log of the induced degree-2 cohomology degree.

    The H2 spectral radius is exactly rho(M)^2, so this equals log(rho(M))
    computed through the same closed form as lyapunov_exact; the two floats
    are bit-identical and the Kummer rigidity gap is exactly zero.
    """
    if not f.is_hyperbolic:
        raise NotHyperbolicError("both eigenvalue moduli equal 1")
    return math.log(_spectral_radius_2x2(f.matrix))


def lyapunov_qr_orbit(
    f: TorusAutomorphism, p0: TorusPoint, n_steps: int, warmup: int = 100
) -> LyapunovReport:
    """Lyapunov exponents by orthogonalized norm-growth accumulation.

    The derivative of a torus automorphism is the constant matrix M, so the
    orbit of p0 only fixes the sampling protocol; the warmup discards the
    O(1/n) transient from aligning the frame with the eigendirections.
    """
    if n_steps < 100:
        raise PreconditionError("need at least 100 accumulation steps")
    m = np.array(f.matrix.entries, dtype=float)
    q = np.eye(2)
    p = np.array(p0.to_floats())
    step4 = np.array(
        [
            [m[0, 0], 0, m[0, 1], 0],
            [0, m[0, 0], 0, m[0, 1]],
            [m[1, 0], 0, m[1, 1], 0],
            [0, m[1, 0], 0, m[1, 1]],
        ]
    )
    for _ in range(warmup):
        q, _ = np.linalg.qr(m @ q)
    logs = np.empty((n_steps, 2))
    for k in range(n_steps):
        q, r = np.linalg.qr(m @ q)
        logs[k] = np.log(np.abs(np.diagonal(r)))
        p = (step4 @ p) % 1.0
    means = logs.mean(axis=0)
    lam_u, lam_s = float(means.max()), float(means.min())
    batch = np.array([b.mean(axis=0) for b in np.array_split(logs, 10)])
    top = batch.max(axis=1)
    stderr = float(top.std(ddof=1) / math.sqrt(len(top))) if len(top) > 1 else 0.0
    return LyapunovReport(lam_u, lam_s, LyapunovMethod.QR_ORBIT, stderr)


# ---------------------------------------------------------------------------
# periodic points


def lattice_action_4x4(f: TorusAutomorphism) -> IntMatrix:
    """Action of M on the rank-4 lattice in the (a1, b1, a2, b2) basis."""
    (a, b), (c, d) = f.matrix.entries
    return IntMatrix.from_rows(
        [
            [a, 0, b, 0],
            [0, a, 0, b],
            [c, 0, d, 0],
            [0, c, 0, d],
        ]
    )


def fix_count(f: TorusAutomorphism, n: int) -> int:
    """Number of fixed points of the n-th iterate: |det(M^n - I)|^2 exactly."""
    mn = f.matrix.power(n)
    delta = mn + IntMatrix.identity(2).scale(-1)
    d = delta.det()
    if d == 0:
        raise DegeneratePeriodError(f"M^{n} has eigenvalue 1; fixed set not finite")
    return d * d


def fix_enumerate(f: TorusAutomorphism, n: int, cap: int = 10**6) -> PeriodicEnsemble:
    """All fixed points of the n-th iterate by Smith-form coset enumeration."""
    count = fix_count(f, n)
    if count > cap:
        raise CapExceededError(f"{count} fixed points exceed the cap {cap}")
    a4 = lattice_action_4x4(replace_matrix(f, f.matrix.power(n)))
    delta = a4 + IntMatrix.identity(4).scale(-1)
    _, d, v = smith_normal_form(delta)
    diag = [d.entries[i][i] for i in range(4)]
    if any(di == 0 for di in diag):
        raise InternalInvariantError("nonzero determinant left a zero divisor")
    points = []
    for ks in itertools.product(*(range(di) for di in diag)):
        y = [Fraction(ks[i], diag[i]) for i in range(4)]
        coords = tuple(
            sum((v.entries[r][c] * y[c] for c in range(4)), Fraction(0)) % 1
            for r in range(4)
        )
        points.append(TorusPoint(coords))
    if len(points) != count:
        raise InternalInvariantError("enumeration disagrees with the Lefschetz count")
    return PeriodicEnsemble(period=n, points=tuple(points), count=count)


# ---------------------------------------------------------------------------
# equidistribution


@dataclass(frozen=True)
class WeylReport:
    """Character sums of an ensemble over all nonzero frequencies up to k_max."""

    k_max: int
    max_abs: float
    max_nontrivial_abs: float
    trivial_frequencies: tuple[tuple[int, int, int, int], ...]


def _frequency_vectors(k_max: int):
    for k in itertools.product(range(-k_max, k_max + 1), repeat=4):
        if k != (0, 0, 0, 0):
            yield k


def equidistribution_test(e: PeriodicEnsemble, k_max: int) -> WeylReport:
    """Weyl sums W(k) = mean of exp(2 pi i <k, coords>) over the ensemble.

    For a periodic ensemble the points form a subgroup, so each |W(k)| is
    exactly 0 or 1; frequencies with |W(k)| > 1e-10 are the characters
    trivial on that subgroup.
    """
    if not e.points:
        raise EmptyEnsembleError("no points to average over")
    x = np.array([p.to_floats() for p in e.points])
    ks = np.array(list(_frequency_vectors(k_max)))
    chunk_rows = max(1, 4_000_000 // max(1, len(e.points)))
    max_abs = 0.0
    max_nontrivial = 0.0
    trivial: list[tuple[int, int, int, int]] = []
    for start in range(0, len(ks), chunk_rows):
        block = ks[start : start + chunk_rows]
        w = np.abs(np.exp(2j * np.pi * (block @ x.T)).mean(axis=1))
        max_abs = max(max_abs, float(w.max()))
        for kvec, wa in zip(block, w):
            if wa > WEYL_TRIVIAL_TOL:
                trivial.append(tuple(int(c) for c in kvec))
            else:
                max_nontrivial = max(max_nontrivial, float(wa))
    return WeylReport(
        k_max=k_max,
        max_abs=max_abs,
        max_nontrivial_abs=max_nontrivial,
        trivial_frequencies=tuple(trivial),
    )


def trivial_character_count(
    f: TorusAutomorphism, n: int, k_max: int
) -> tuple[int, int]:
    """Exact count of frequencies trivial on the period-n subgroup.

    Works from the Smith-form generators without enumerating points, so it
    stays cheap when the fixed-point count is far beyond the enumeration
    cap.  Returns (trivial, total) over nonzero frequencies with
    sup-norm at most k_max.
    """
    fix_count(f, n)
    a4 = lattice_action_4x4(replace_matrix(f, f.matrix.power(n)))
    delta = a4 + IntMatrix.identity(4).scale(-1)
    _, d, v = smith_normal_form(delta)
    diag = [d.entries[i][i] for i in range(4)]
    cols = [[v.entries[r][j] for r in range(4)] for j in range(4)]
    trivial = 0
    total = 0
    for k in _frequency_vectors(k_max):
        total += 1
        if all(
            sum(k[r] * cols[j][r] for r in range(4)) % diag[j] == 0
            for j in range(4)
        ):
            trivial += 1
    return trivial, total


# ---------------------------------------------------------------------------
# quotient projections


def kummer_project(p: TorusPoint) -> TorusPoint:
    """Canonical representative on the sign-involution quotient: the
    lexicographic minimum of {p, -p}."""
    neg = -p
    return p if p.coords <= neg.coords else neg


def eta_tau_project(p: TorusPoint, lattice: TorusLattice) -> TorusPoint:
    """Canonical representative under multiplication by tau (order 4 or 3)."""
    key = _tau_key(lattice)
    eta = ETA_TAU_MATRICES[key]
    best = p
    cur = p
    for _ in range(ETA_TAU_ORDERS[key] - 1):
        cur = _apply_per_factor(eta, cur)
        if cur.coords < best.coords:
            best = cur
    return best


def _apply_per_factor(eta: IntMatrix, p: TorusPoint) -> TorusPoint:
    (e00, e01), (e10, e11) = eta.entries
    a1, b1, a2, b2 = p.coords
    return TorusPoint(
        (
            (e00 * a1 + e01 * b1) % 1,
            (e10 * a1 + e11 * b1) % 1,
            (e00 * a2 + e01 * b2) % 1,
            (e10 * a2 + e11 * b2) % 1,
        )
    )


# ---------------------------------------------------------------------------
# induced cohomology action

H2_BASIS_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def h2_action(f: TorusAutomorphism) -> IntMatrix:
    """Induced action on degree-2 cohomology of the 4-torus: the exterior
    square of the rank-4 lattice action, basis e_i ^ e_j in lex order."""
    a = lattice_action_4x4(f).entries
    rows = []
    for i, j in H2_BASIS_PAIRS:
        rows.append(
            [
                a[i][k] * a[j][l] - a[i][l] * a[j][k]
                for k, l in H2_BASIS_PAIRS
            ]
        )
    return IntMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# sampling, distance, local dimension


def haar_samples(n: int, rng_seed: int) -> np.ndarray:
    """n uniform points in lattice coordinates, shape (n, 4)."""
    return np.random.default_rng(rng_seed).random((n, 4))


def torus_distance(
    lattice: TorusLattice,
) -> Callable[[np.ndarray, int], np.ndarray]:
    """Flat quotient metric from the embedding z = a + b*tau per coordinate.

    Coordinates are wrapped to the centered cell and the quadratic form is
    minimized over the 3x3 grid of lattice translates, which is exhaustive
    when tau lies in the standard fundamental domain |Re tau| <= 1/2.
    """
    re = lattice.tau.real
    gram = np.array([[1.0, re], [re, abs(lattice.tau) ** 2]])
    shifts = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=2)))

    def dist(samples: np.ndarray, i: int) -> np.ndarray:
        x = np.asarray(samples, dtype=float)
        d = x - x[i]
        d -= np.round(d)
        total = np.zeros(len(x))
        for pair in ((0, 1), (2, 3)):
            v = d[:, pair]
            cand = v[:, None, :] + shifts[None, :, :]
            q = np.einsum("nsa,ab,nsb->ns", cand, gram, cand)
            total += q.min(axis=1)
        return np.sqrt(total)

    return dist


def local_dimension_estimate(
    samples: Sequence,
    dist: Callable[[Sequence, int], np.ndarray],
    radii: Sequence[float],
    probes: int,
    rng_seed: int = 0,
) -> tuple[float, float]:
    """Local dimension from ball-count scaling at randomly chosen probes.

    For each probe the slope of log(neighbor fraction within r) against
    log r is fit by least squares over the radii with at least one
    neighbor (the probe itself is excluded).  Returns the mean slope over
    probes and its standard error.
    """
    n = len(samples)
    if n < 1000:
        raise InsufficientSamplesError(f"{n} samples; need at least 1000")
    if probes < 1 or probes > n:
        raise PreconditionError("probes must be between 1 and the sample count")
    r_arr = np.array(sorted((float(r) for r in radii), reverse=True))
    if len(r_arr) < 2 or r_arr[-1] <= 0:
        raise PreconditionError("need at least two positive radii")
    if r_arr[0] / r_arr[-1] < 10.0:
        raise PreconditionError("radii must span at least one decade")
    log_r = np.log(r_arr)
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(n, size=probes, replace=False)
    slopes = []
    empty_at_largest = 0
    for i in idx:
        d = np.asarray(dist(samples, int(i)), dtype=float)
        d = np.delete(d, int(i))
        counts = (d[None, :] <= r_arr[:, None]).sum(axis=1)
        if counts[0] == 0:
            empty_at_largest += 1
            continue
        mask = counts > 0
        if mask.sum() < 2:
            continue
        y = np.log(counts[mask] / n)
        slopes.append(float(np.polyfit(log_r[mask], y, 1)[0]))
    if 2 * empty_at_largest > probes or not slopes:
        raise DegenerateRadiiError(
            "most probes see no neighbors at the largest radius"
        )
    mean = float(np.mean(slopes))
    stderr = (
        float(np.std(slopes, ddof=1) / math.sqrt(len(slopes)))
        if len(slopes) > 1
        else 0.0
    )
    return mean, stderr
