"""Command line harness: configuration, seeded runs, and report emission.

Every run is deterministic in (rng_seed, worker_count is irrelevant to the
bytes produced), result files are JSON, CSV, or binary PGM depending on the
subcommand, and a manifest with input digests and timings is written next
to the result file whenever --out is given.  Exit codes: 0 success, 2 for
usage and precondition failures, 3 for internal invariant violations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import blanc_cremona as bc
from . import lattice_algebra as la
from . import torus_kummer as tk
from . import wehler_dynamics as wd
from .errors import ConfigError, InternalInvariantError, KummerlabError

# tolerance overrides accepted as --tol.<name> with their sane ranges
TOL_RANGES = {
    "membership": (1e-14, 1e-6),
}

BIG_INT = 2**53

LEHMER_COEFFS = (1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1)

QUOTIENTS = {
    "none": tk.Quotient.NONE,
    "kummer": tk.Quotient.KUMMER_ETA,
    "eta_tau": tk.Quotient.ETA_TAU,
}


def fnv1a64(data: bytes) -> int:
    acc = 0xCBF29CE484222325
    for byte in data:
        acc ^= byte
        acc = (acc * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return acc


def json_int(value: int):
    """Exact integers above 2^53 go to JSON as decimal strings."""
    value = int(value)
    return value if abs(value) <= BIG_INT else str(value)


def sig15(value: float) -> str:
    return f"{float(value):.15g}"


def _plain(value):
    """Recursively convert numpy scalars so json emits stable reprs."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def json_bytes(payload: dict) -> bytes:
    return (json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n").encode()


def csv_bytes(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue().encode()


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    rng_seed: int
    worker_count: int
    output_path: str | None
    tolerances: dict

    def __post_init__(self):
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng seed must fit in 64 bits")
        if self.worker_count < 1:
            raise ConfigError("worker count must be positive")
        for name, value in self.tolerances.items():
            if name not in TOL_RANGES:
                raise ConfigError(f"unknown tolerance override: {name}")
            lo, hi = TOL_RANGES[name]
            if not lo <= value <= hi:
                raise ConfigError(
                    f"tolerance {name}={value:g} outside sane range [{lo:g}, {hi:g}]"
                )

    def tol(self, name: str, default: float) -> float:
        return self.tolerances.get(name, default)


def extract_tol_overrides(argv):
    """Pull --tol.<name> pairs (or --tol.<name>=v) out of the raw argv."""
    clean: list[str] = []
    tols: dict[str, float] = {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg.startswith("--tol."):
            body = arg[len("--tol."):]
            if "=" in body:
                name, text = body.split("=", 1)
            else:
                name = body
                i += 1
                if i >= len(argv):
                    raise ConfigError(f"missing value for --tol.{name}")
                text = argv[i]
            try:
                tols[name] = float(text)
            except ValueError:
                raise ConfigError(f"bad value for --tol.{name}: {text}") from None
        else:
            clean.append(arg)
        i += 1
    return clean, tols


class _RunFiles:
    """Tracks every input file read so the manifest can digest them."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def read(self, path: str) -> bytes:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read {path}: {err}") from None
        self.digests[os.path.basename(path)] = str(fnv1a64(data))
        return data

    def read_json(self, path: str):
        try:
            return json.loads(self.read(path).decode())
        except (ValueError, UnicodeDecodeError) as err:
            raise ConfigError(f"malformed JSON in {path}: {err}") from None


# ---------------------------------------------------------------------------
# input parsing


def parse_int_matrix(text_or_obj) -> la.IntMatrix:
    obj = text_or_obj
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except ValueError as err:
            raise ConfigError(f"malformed matrix JSON: {err}") from None
    if isinstance(obj, dict):
        if "entries" not in obj:
            raise ConfigError("matrix object needs an 'entries' field")
        obj = obj["entries"]
    if not isinstance(obj, list) or not obj:
        raise ConfigError("matrix must be a non-empty list of rows")
    try:
        return la.IntMatrix.from_rows(obj)
    except (KummerlabError, TypeError, ValueError) as err:
        raise ConfigError(f"bad matrix: {err}") from None


def parse_poly(text: str) -> la.IntPolynomial:
    if text == "lehmer":
        return la.IntPolynomial(LEHMER_COEFFS)
    try:
        coeffs = json.loads(text)
    except ValueError as err:
        raise ConfigError(f"malformed polynomial JSON: {err}") from None
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError("polynomial must be a list of integer coefficients")
    try:
        return la.IntPolynomial.from_coeffs(coeffs)
    except (KummerlabError, TypeError, ValueError) as err:
        raise ConfigError(f"bad polynomial: {err}") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"bad complex literal: {text}") from None


def _pair(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, list) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise ConfigError("complex values must be numbers or [re, im] pairs")


def torus_automorphism(args, files: _RunFiles) -> tk.TorusAutomorphism:
    matrix_obj = args.matrix
    tau = None
    quotient = getattr(args, "quotient", None)
    if getattr(args, "file", None):
        data = files.read_json(args.file)
        if not isinstance(data, dict) or "matrix" not in data:
            raise ConfigError("automorphism file needs a 'matrix' field")
        matrix_obj = data["matrix"]
        if "tau" in data:
            t = data["tau"]
            if not isinstance(t, dict) or "re" not in t or "im" not in t:
                raise ConfigError("tau must be {\"re\": ..., \"im\": ...}")
            tau = complex(float(t["re"]), float(t["im"]))
        if quotient is None and "quotient" in data:
            quotient = data["quotient"]
    if matrix_obj is None:
        matrix_obj = [[2, 1], [1, 1]]
    if getattr(args, "tau", None):
        tau = parse_complex(args.tau)
    if quotient is None:
        quotient = "none"
    if quotient not in QUOTIENTS:
        raise ConfigError(f"unknown quotient: {quotient}")
    matrix = parse_int_matrix(matrix_obj)
    lattice = tk.TorusLattice(tau) if tau is not None else tk.TorusLattice()
    return tk.TorusAutomorphism(matrix, lattice, QUOTIENTS[quotient])


def load_surface(args, files: _RunFiles) -> wd.WehlerSurface:
    if getattr(args, "surface", None):
        data = files.read_json(args.surface)
        if not isinstance(data, dict) or "coeffs" not in data:
            raise ConfigError("surface file needs a 'coeffs' field")
        coeffs = data["coeffs"]
        try:
            arr = np.array(
                [[[_pair(coeffs[i][j][k]) for k in range(3)] for j in range(3)]
                 for i in range(3)],
                dtype=complex,
            )
        except (IndexError, TypeError, ConfigError):
            raise ConfigError(
                "surface coeffs must be a 3x3x3 nest of [re, im] pairs"
            ) from None
        try:
            return wd.WehlerSurface.from_array(arr)
        except KummerlabError as err:
            raise ConfigError(f"bad surface: {err}") from None
    if getattr(args, "random", False):
        return wd.random_surface(args.seed)
    raise ConfigError("need --surface FILE or --random")


def load_cubic(args, files: _RunFiles) -> bc.PlaneCubic:
    if getattr(args, "cubic", None):
        data = files.read_json(args.cubic)
        if not isinstance(data, list) or len(data) != 10:
            raise ConfigError("cubic file must hold a list of 10 coefficients")
        return bc.PlaneCubic.from_coefficients([_pair(c) for c in data])
    return bc.fermat_cubic()


def load_base_points(args, cubic: bc.PlaneCubic, files: _RunFiles):
    if getattr(args, "base_points", None):
        data = files.read_json(args.base_points)
        if not isinstance(data, list) or not data:
            raise ConfigError("base point file must hold a list of triples")
        pts = []
        for row in data:
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError("each base point must be a homogeneous triple")
            pts.append(bc.P2Point.make(*(_pair(c) for c in row)))
        return tuple(pts)
    return tuple(bc.distinct_cubic_points(cubic, args.l, args.seed))


# ---------------------------------------------------------------------------
# serializers


def spectral_json(rep: la.SpectralReport) -> dict:
    return {
        "char_poly": [json_int(c) for c in rep.char_poly.coeffs],
        "lambda_f": sig15(rep.lambda_f),
        "residual": float(rep.residual),
        "classification": rep.classification.value,
        "min_poly_degree": rep.min_poly_degree,
        "kummer_possible": rep.kummer_possible,
        "verdict": "undetermined by degree" if rep.kummer_possible else "mu_f singular",
    }


def lyapunov_json(rep: tk.LyapunovReport) -> dict:
    return {
        "lambda_u": float(rep.lambda_u),
        "lambda_s": float(rep.lambda_s),
        "method": rep.method.value,
        "stderr": float(rep.stderr),
    }


def rigidity_json(rep: wd.RigidityReport) -> dict:
    def opt(x):
        return None if x is None else float(x)

    return {
        "lambda_f": float(rep.lambda_f),
        "half_log_lambda_f": 0.5 * math.log(rep.lambda_f),
        "lambda_u_est": opt(rep.lambda_u_est),
        "lambda_s_est": opt(rep.lambda_s_est),
        "lyap_stderr": opt(rep.lyap_stderr),
        "dimension_est": opt(rep.dimension_est),
        "dimension_stderr": opt(rep.dimension_stderr),
        "gap_u": opt(rep.gap_u),
        "gap_s": opt(rep.gap_s),
        "verdict": rep.verdict.value,
        "n_saddles": json_int(rep.n_saddles),
        "qr_lambda_u": opt(rep.qr_lambda_u),
        "qr_gap": opt(rep.qr_gap),
        "per_period": None
        if rep.per_period is None
        else [[int(n), int(c), float(e)] for (n, c, e) in rep.per_period],
    }


def _complex_cells(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def saddles_csv(orbits) -> bytes:
    header = ["period"]
    for name in ("x_u", "x_v", "y_u", "y_v", "z_u", "z_v", "m1", "m2"):
        header += [f"{name}_re", f"{name}_im"]
    header.append("type")
    rows = []
    for orb in orbits:
        p = orb.point
        cells = [orb.period]
        for z in (p.x.u, p.x.v, p.y.u, p.y.v, p.z.u, p.z.v, *orb.multipliers):
            cells += [repr(float(z.real)), repr(float(z.imag))]
        cells.append(orb.type.value)
        rows.append(cells)
    return csv_bytes(header, rows)


# ---------------------------------------------------------------------------
# lattice subcommands


def cmd_lattice_degree(args, cfg, files):
    rep = la.dynamical_degree(parse_int_matrix(args.matrix or "[[2,1],[1,1]]"))
    return json_bytes(spectral_json(rep)), "json"


def cmd_lattice_salem(args, cfg, files):
    rep = la.spectral_report(parse_poly(args.poly))
    return json_bytes(spectral_json(rep)), "json"


def cmd_lattice_rank2(args, cfg, files):
    lattice = la.QuadraticLattice(parse_int_matrix(args.gram))
    analysis = la.rank2_analysis(lattice, search_bound=args.bound)
    payload = {
        "represents_zero": analysis.represents_zero,
        "represents_minus_two": analysis.represents_minus_two,
        "aut_infinite": analysis.aut_infinite,
        "lambda_psi": None if analysis.lambda_psi is None else sig15(analysis.lambda_psi),
    }
    return json_bytes(payload), "json"


def cmd_lattice_wehler_action(args, cfg, files):
    m1, m2, m3, lattice = la.wehler_cohomology_action()
    product = m1 @ m2 @ m3
    rep = la.dynamical_degree(product)
    ident = la.IntMatrix.identity(m1.dim)
    payload = spectral_json(rep)
    payload["involution_check"] = all((m @ m) == ident for m in (m1, m2, m3))
    payload["isometry_check"] = all(
        la.isometry_check(m, lattice) for m in (m1, m2, m3)
    )
    return json_bytes(payload), "json"


def cmd_lattice_enriques(args, cfg, files):
    lattice = la.enriques_lattice()
    pos, neg, zero = la.signature(lattice)
    entries = lattice.gram.entries
    payload = {
        "rank": lattice.gram.dim,
        "signature": [pos, neg, zero],
        "det": json_int(lattice.gram.det()),
        "even": all(entries[i][i] % 2 == 0 for i in range(lattice.gram.dim)),
    }
    return json_bytes(payload), "json"


# ---------------------------------------------------------------------------
# torus subcommands


def cmd_torus_lyapunov(args, cfg, files):
    f = torus_automorphism(args, files)
    if args.method == "exact":
        rep = tk.lyapunov_exact(f)
    else:
        rep = tk.lyapunov_qr_orbit(f, tk.TorusPoint.origin(), args.steps)
    return json_bytes(lyapunov_json(rep)), "json"


def cmd_torus_fix_count(args, cfg, files):
    f = torus_automorphism(args, files)
    payload = {"n": args.n, "count": json_int(tk.fix_count(f, args.n))}
    return json_bytes(payload), "json"


def cmd_torus_fix_enum(args, cfg, files):
    f = torus_automorphism(args, files)
    ensemble = tk.fix_enumerate(f, args.n, cap=args.cap)
    rows = [
        [f"{c.numerator}/{c.denominator}" for c in p.coords]
        for p in ensemble.points
    ]
    return csv_bytes(["a1", "b1", "a2", "b2"], rows), "csv"


def cmd_torus_equidist(args, cfg, files):
    f = torus_automorphism(args, files)
    ensemble = tk.fix_enumerate(f, args.n, cap=args.cap)
    weyl = tk.equidistribution_test(ensemble, args.kmax)
    payload = {
        "period": args.n,
        "count": json_int(ensemble.count),
        "k_max": weyl.k_max,
        "max_abs": float(weyl.max_abs),
        "max_nontrivial_abs": float(weyl.max_nontrivial_abs),
        "n_trivial_frequencies": len(weyl.trivial_frequencies),
    }
    return json_bytes(payload), "json"


def cmd_torus_dimension(args, cfg, files):
    f = torus_automorphism(args, files)
    samples = tk.haar_samples(args.samples, cfg.rng_seed)
    radii = tuple(np.geomspace(0.5, 0.05, 8))
    est, err = tk.local_dimension_estimate(
        samples, tk.torus_distance(f.lattice), radii, args.probes, cfg.rng_seed + 1
    )
    payload = {"dimension": float(est), "stderr": float(err), "n_samples": args.samples}
    return json_bytes(payload), "json"


def cmd_torus_rigidity(args, cfg, files):
    f = torus_automorphism(args, files)
    report = wd.torus_control_report(f, rng_seed=cfg.rng_seed)
    return json_bytes(rigidity_json(report)), "json"


# ---------------------------------------------------------------------------
# wehler subcommands


def cmd_wehler_orbit(args, cfg, files):
    surface = load_surface(args, files)
    rng = np.random.default_rng(cfg.rng_seed)
    tol = cfg.tol("membership", wd.MEMBERSHIP_TOL)
    p0 = wd.random_surface_point(surface, rng, tol=tol)
    points, worst = wd.orbit(surface, p0, args.n, tol=tol)
    header = ["step"]
    for name in ("x_u", "x_v", "y_u", "y_v", "z_u", "z_v"):
        header += [f"{name}_re", f"{name}_im"]
    header.append("residual")
    rows = []
    for step, p in enumerate(points):
        cells = [step]
        for z in (p.x.u, p.x.v, p.y.u, p.y.v, p.z.u, p.z.v):
            cells += [repr(float(z.real)), repr(float(z.imag))]
        cells.append(repr(float(p.residual)))
        rows.append(cells)
    return csv_bytes(header, rows), "csv"


def _collect_saddles(surface, args, cfg):
    orbits = []
    for n in range(1, args.nmax + 1):
        orbits.extend(
            wd.newton_periodic(
                surface, n, args.seeds, cfg.rng_seed, workers=cfg.worker_count
            )
        )
    return orbits


def cmd_wehler_saddles(args, cfg, files):
    surface = load_surface(args, files)
    orbits = _collect_saddles(surface, args, cfg)
    return saddles_csv(orbits), "csv"


def cmd_wehler_lyapunov(args, cfg, files):
    surface = load_surface(args, files)
    estimates = []
    per_period = []
    for n in range(1, args.nmax + 1):
        batch = wd.newton_periodic(
            surface, n, args.seeds, cfg.rng_seed, workers=cfg.worker_count
        )
        try:
            est = wd.lyapunov_from_saddles(batch)
        except KummerlabError:
            continue
        estimates.append(est)
        per_period.append([n, len(batch), float(est.lambda_u)])
    pooled = wd.pool_period_estimates(estimates)
    payload = lyapunov_json(pooled)
    payload["per_period"] = per_period
    return json_bytes(payload), "json"


def cmd_wehler_rigidity(args, cfg, files):
    surface = load_surface(args, files)
    report, _ = wd.rigidity_report(
        surface, args.nmax, args.seeds, cfg.rng_seed, workers=cfg.worker_count
    )
    return json_bytes(rigidity_json(report)), "json"


def cmd_wehler_probe(args, cfg, files):
    surface = load_surface(args, files)
    suspects = wd.singularity_probe(surface, args.trials, cfg.rng_seed)
    payload = {
        "n_suspects": len(suspects),
        "suspects": [
            {
                "grad_max": float(s.grad_max),
                "x": _complex_cells(s.point.x.u) + _complex_cells(s.point.x.v),
                "y": _complex_cells(s.point.y.u) + _complex_cells(s.point.y.v),
                "z": _complex_cells(s.point.z.u) + _complex_cells(s.point.z.v),
            }
            for s in suspects
        ],
    }
    return json_bytes(payload), "json"


def cmd_wehler_density(args, cfg, files):
    surface = load_surface(args, files)
    if len(args.proj) != 2 or any(c not in "xyz" for c in args.proj):
        raise ConfigError("projection must be two of x, y, z")
    rng = np.random.default_rng(cfg.rng_seed)
    p0 = wd.random_surface_point(surface, rng)
    img = wd.density_histogram(
        surface, p0, args.iters, proj=(args.proj[0], args.proj[1]), bins=512
    )
    header = f"P5 {img.shape[1]} {img.shape[0]} 255\n".encode()
    return header + img.tobytes(), "pgm"


# ---------------------------------------------------------------------------
# blanc subcommands


def _blanc_map(args, cfg, files):
    cubic = load_cubic(args, files)
    points = load_base_points(args, cubic, files)
    try:
        return bc.BlancMap(cubic, points)
    except KummerlabError as err:
        raise ConfigError(str(err)) from None


def cmd_blanc_check_involution(args, cfg, files):
    B = _blanc_map(args, cfg, files)
    q = B.base_points[0]
    rng = np.random.default_rng(cfg.rng_seed)
    rows = []
    for idx in range(args.points):
        p = bc.P2Point.make(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
        defect = bc.sigma_q(B.cubic, q, bc.sigma_q(B.cubic, q, p)).chordal(p)
        rows.append([idx, repr(float(defect))])
    return csv_bytes(["index", "defect"], rows), "csv"


def cmd_blanc_check_fixed_cubic(args, cfg, files):
    B = _blanc_map(args, cfg, files)
    pts = bc.cubic_points(B.cubic, args.points, cfg.rng_seed + 1)
    rows = []
    idx = 0
    for p in pts:
        if min(p.chordal(q) for q in B.base_points) < 1e-4:
            continue
        rows.append([idx, repr(float(bc.blanc_compose(B, p).chordal(p)))])
        idx += 1
    return csv_bytes(["index", "displacement"], rows), "csv"


def cmd_blanc_check_two_form(args, cfg, files):
    B = _blanc_map(args, cfg, files)
    rng = np.random.default_rng(cfg.rng_seed)
    rows = []
    idx = 0
    guard = 0
    while idx < args.points:
        guard += 1
        if guard > 50 * args.points:
            raise InternalInvariantError("two-form sampling stalled")
        x = rng.normal() + 1j * rng.normal()
        y = rng.normal() + 1j * rng.normal()
        try:
            defect = bc.two_form_check(B, bc.P2Point.make(x, y, 1.0))
        except KummerlabError:
            continue
        rows.append([idx, repr(float(x.real)), repr(float(x.imag)),
                     repr(float(y.real)), repr(float(y.imag)), repr(float(defect))])
        idx += 1
    return csv_bytes(["index", "x_re", "x_im", "y_re", "y_im", "defect"], rows), "csv"


def cmd_blanc_orbit(args, cfg, files):
    B = _blanc_map(args, cfg, files)
    rng = np.random.default_rng(cfg.rng_seed)
    p = bc.P2Point.make(rng.normal() + 1j * rng.normal(), rng.normal() + 1j * rng.normal(), 1.0)
    rows = []
    for idx in range(args.n):
        p = bc.blanc_compose(B, p)
        arr = p.array()
        if not np.all(np.isfinite(arr)):
            raise InternalInvariantError("orbit left the finite range")
        cells = [idx + 1]
        for z in arr:
            cells += [repr(float(z.real)), repr(float(z.imag))]
        rows.append(cells)
    header = ["step", "x0_re", "x0_im", "x1_re", "x1_im", "x2_re", "x2_im"]
    return csv_bytes(header, rows), "csv"


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    common.add_argument("--workers", type=int, default=None,
                        help="worker count (default: KUMMERLAB_WORKERS or 1)")
    common.add_argument("--out", default=None,
                        help="result file path (default: stdout); a manifest "
                             "is written alongside")

    parser = argparse.ArgumentParser(
        prog="kummerlab",
        description="Invariants of surface automorphisms: exact lattice "
                    "algebra, torus models, (2,2,2) surface dynamics, and "
                    "plane Cremona involutions.  Tolerance overrides are "
                    "accepted as --tol.<name> VALUE (known: "
                    + ", ".join(sorted(TOL_RANGES)) + ").",
    )
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True)

    lat = top.add_parser("lattice", help="integer cohomology computations")
    sub = lat.add_subparsers(dest="command", required=True)
    p = sub.add_parser("degree", parents=[common], help="dynamical degree of a matrix")
    p.add_argument("--matrix", help="JSON rows or {\"dim\":..,\"entries\":..}")
    p.set_defaults(func=cmd_lattice_degree)
    p = sub.add_parser("salem", parents=[common], help="classify a polynomial")
    p.add_argument("--poly", required=True,
                   help="JSON coefficient list, constant term first, or 'lehmer'")
    p.set_defaults(func=cmd_lattice_salem)
    p = sub.add_parser("rank2", parents=[common], help="rank-2 lattice analysis")
    p.add_argument("--gram", required=True, help="2x2 Gram matrix JSON")
    p.add_argument("--bound", type=int, default=10000)
    p.set_defaults(func=cmd_lattice_rank2)
    p = sub.add_parser("wehler-action", parents=[common],
                       help="cohomology action of the three involutions")
    p.set_defaults(func=cmd_lattice_wehler_action)
    p = sub.add_parser("enriques", parents=[common], help="rank-10 lattice summary")
    p.set_defaults(func=cmd_lattice_enriques)

    tor = top.add_parser("torus", help="linear torus automorphisms")
    sub = tor.add_subparsers(dest="command", required=True)

    def torus_parser(name, help_text):
        q = sub.add_parser(name, parents=[common], help=help_text)
        q.add_argument("--matrix", help="2x2 integer matrix JSON")
        q.add_argument("--file", help="automorphism JSON file")
        q.add_argument("--tau", help="lattice parameter as a complex literal")
        q.add_argument("--quotient", choices=sorted(QUOTIENTS))
        return q

    p = torus_parser("lyapunov", "Lyapunov exponents")
    p.add_argument("--method", choices=("exact", "qr"), default="exact")
    p.add_argument("--steps", type=int, default=10000)
    p.set_defaults(func=cmd_torus_lyapunov)
    p = torus_parser("fix-count", "periodic point count")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_torus_fix_count)
    p = torus_parser("fix-enum", "enumerate periodic points as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cap", type=int, default=1000000)
    p.set_defaults(func=cmd_torus_fix_enum)
    p = torus_parser("equidist", "Weyl sum equidistribution report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--cap", type=int, default=1000000)
    p.set_defaults(func=cmd_torus_equidist)
    p = torus_parser("dimension", "local dimension of Haar samples")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--probes", type=int, default=64)
    p.set_defaults(func=cmd_torus_dimension)
    p = torus_parser("rigidity", "exactly solvable rigidity control")
    p.set_defaults(func=cmd_torus_rigidity)

    weh = top.add_parser("wehler", help="(2,2,2) surface dynamics")
    sub = weh.add_subparsers(dest="command", required=True)

    def wehler_parser(name, help_text):
        q = sub.add_parser(name, parents=[common], help=help_text)
        q.add_argument("--surface", help="surface coefficient JSON file")
        q.add_argument("--random", action="store_true",
                       help="random surface from --seed")
        return q

    p = wehler_parser("orbit", "forward orbit as CSV")
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_wehler_orbit)
    p = wehler_parser("saddles", "periodic saddle search as CSV")
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--seeds", type=int, default=512)
    p.set_defaults(func=cmd_wehler_saddles)
    p = wehler_parser("lyapunov", "saddle-multiplier Lyapunov estimate")
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--seeds", type=int, default=512)
    p.set_defaults(func=cmd_wehler_lyapunov)
    p = wehler_parser("rigidity", "full rigidity report")
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--seeds", type=int, default=2000)
    p.set_defaults(func=cmd_wehler_rigidity)
    p = wehler_parser("probe", "advisory singular point search")
    p.add_argument("--trials", type=int, default=3000)
    p.set_defaults(func=cmd_wehler_probe)
    p = wehler_parser("density", "orbit density histogram as PGM")
    p.add_argument("--proj", default="xy")
    p.add_argument("--iters", type=int, default=20000)
    p.set_defaults(func=cmd_wehler_density)

    bl = top.add_parser("blanc", help="plane Cremona involutions")
    sub = bl.add_subparsers(dest="command", required=True)

    def blanc_parser(name, help_text):
        q = sub.add_parser(name, parents=[common], help=help_text)
        q.add_argument("--cubic", help="cubic coefficient JSON file (default: Fermat)")
        q.add_argument("--base-points", dest="base_points",
                       help="JSON file of homogeneous triples")
        q.add_argument("--l", type=int, default=1,
                       help="number of generated base points when none given")
        return q

    p = blanc_parser("check-involution", "sigma_q round-trip defects")
    p.add_argument("--points", type=int, default=1000)
    p.set_defaults(func=cmd_blanc_check_involution)
    p = blanc_parser("check-fixed-cubic", "displacement of cubic points")
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_blanc_check_fixed_cubic)
    p = blanc_parser("check-two-form", "meromorphic 2-form defects")
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_blanc_check_two_form)
    p = blanc_parser("orbit", "composition orbit as CSV")
    p.add_argument("--n", type=int, default=100)
    p.set_defaults(func=cmd_blanc_orbit)

    return parser


def _worker_count(args) -> int:
    if getattr(args, "workers", None) is not None:
        return args.workers
    env = os.environ.get("KUMMERLAB_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"bad KUMMERLAB_WORKERS value: {env}") from None
    return 1


def _echo_config(args) -> dict:
    skip = {"func"}
    echo = {}
    for key, value in vars(args).items():
        if key in skip or callable(value):
            continue
        echo[key] = value
    return echo


def run(argv) -> int:
    argv, tols = extract_tol_overrides(list(argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = ExperimentConfig(
        command=f"{args.group} {args.command}",
        rng_seed=args.seed,
        worker_count=_worker_count(args),
        output_path=args.out,
        tolerances=tols,
    )
    files = _RunFiles()
    started = time.perf_counter()
    payload, kind = args.func(args, cfg, files)
    compute_time = time.perf_counter() - started
    if cfg.output_path is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
        return 0
    with open(cfg.output_path, "wb") as fh:
        fh.write(payload)
    emit_time = time.perf_counter() - started - compute_time
    manifest = {
        "artifact_version": __version__,
        "command": cfg.command,
        "config": _plain(_echo_config(args)) | {"tolerances": tols},
        "result_file": os.path.basename(cfg.output_path),
        "result_kind": kind,
        "result_digest": str(fnv1a64(payload)),
        "input_digests": files.digests,
        "wall_time_s": compute_time + emit_time,
        "stages": {"compute_s": compute_time, "emit_s": emit_time},
    }
    with open(cfg.output_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except InternalInvariantError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return 3
    except KummerlabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
