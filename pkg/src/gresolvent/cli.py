"""Command line front end.

    gresolvent generate --kind pair --seed 1 --dim 2 --big-dim 4 --grid 4 --out pair.json
    gresolvent verify pair.json --theorem t31
    gresolvent reconstruct pair.json --grid 4 --out dilation.json
    gresolvent factor unitary.json
    gresolvent sample pair.json --out samples.csv

Exit codes: 0 pass, 1 fail, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import generate as gen
from . import serialize as ser
from .dilation import certify, reconstruct_and_certify, reconstruct_from_measure
from .errors import GridMismatch, InvalidSpec, NegativeAtom, NotAResolvent, ResolventError
from .isounitary import (
    IsoUnitaryPair,
    build_theta,
    godic_lucenko_factor,
    thm41_sampler,
)
from .linalg import EPS_ORTHO, Conjugation, Subspace, compose_antilinear, orthonormalize
from .moments import GridOperatorMeasure, chart_nodes, fft_parameters, operator_kernel_sampler
from .pair import H2Grid, PairSampler, h2_from_table, test_vectors, verify_theorem_3_1, verify_theorem_3_2
from .single import (
    PartialIsometry,
    ResolventSampler,
    SchurParameter,
    VerificationReport,
    chumakin_sampler,
    verify_theorem_1_2,
    verify_theorem_1_3,
)

KINDS = ("pair", "iso-unitary", "measure", "resolvent-samples")
GRID_SIZES = (2, 4, 8, 16, 32, 64)
THEOREMS = ("t12", "t13", "t31", "t32", "h2")
ZETA0 = 0.5


class InputError(Exception):
    """Malformed or unsupported input; exit code 2."""


@dataclass
class InstanceSpec:
    seed: int
    dim: int
    big_dim: int
    grid_n: int
    kind: str

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"kind must be one of {KINDS}")
        if self.grid_n not in GRID_SIZES:
            raise InvalidSpec(f"grid_n must be one of {GRID_SIZES}")
        if not 1 <= self.dim <= self.big_dim <= 256:
            raise InvalidSpec("need 1 <= dim <= big_dim <= 256")


# --------------------------------------------------------------------------
# generate
# --------------------------------------------------------------------------


def resolvent_sample_blocks(r: PairSampler, grid_n: int) -> list:
    """Samples on the verification grid and on the Taylor chart circles for ``grid_n``."""
    pts = H2Grid.default().points
    blocks = [ser.samples_to_json(r.dim, pts, pts, r.grid(pts, pts))]
    radius, n_nodes = fft_parameters(grid_n, grid_n)
    nodes = chart_nodes(radius, n_nodes)
    for a in ("z", "u"):
        for b in ("z", "u"):
            blocks.append(ser.samples_to_json(r.dim, nodes[a], nodes[b], r.grid(nodes[a], nodes[b])))
    return blocks


def generate_instance(spec: InstanceSpec, off_grid: bool = False, scale: float = 1.0) -> dict:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    out = {"kind": spec.kind, "spec": asdict(spec)}
    n = spec.grid_n
    if spec.kind == "pair":
        out["pair"] = ser.pair_to_json(gen.commuting_pair(spec.dim, spec.big_dim, n, n, rng, off_grid))
    elif spec.kind == "resolvent-samples":
        pair = gen.commuting_pair(spec.dim, spec.big_dim, n, n, rng, off_grid)
        r = pair.sampler()
        if scale != 1.0:
            r = r.scaled(scale)
        out["dim"] = spec.dim
        out["blocks"] = resolvent_sample_blocks(r, n)
    elif spec.kind == "measure":
        out["measure"] = ser.measure_to_json(gen.operator_measure(spec.dim, n, n, rng))
    else:
        v, u, j = gen.iso_unitary_instance(spec.dim, rng)
        phi = SchurParameter.zero(v.defect_source(), v.defect_target())
        out.update({"V": ser.partial_isometry_to_json(v), "U": ser.enc_matrix(u),
                    "J": ser.conjugation_to_json(j), "phi": ser.schur_to_json(phi)})
    return out


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _iso_pair(doc: dict, phi_file: Optional[str] = None):
    v = ser.partial_isometry_from_json(doc["V"])
    u = ser.dec_matrix(doc["U"], (v.dim, v.dim))
    j = Conjugation(ser.dec_matrix(doc["J"], (v.dim, v.dim)))
    if phi_file:
        phi = ser.schur_from_json(load_json(phi_file))
    elif "phi" in doc:
        phi = ser.schur_from_json(doc["phi"])
    else:
        phi = SchurParameter.zero(v.defect_source(), v.defect_target())
    return IsoUnitaryPair(v, u), j, phi


def load_pair_sampler(doc: dict, phi_file: Optional[str] = None) -> PairSampler:
    kind = doc.get("kind")
    if kind == "pair":
        return ser.pair_from_json(doc["pair"]).sampler()
    if kind == "resolvent-samples":
        return ser.TabulatedSampler(int(doc["dim"]), doc["blocks"])
    if kind == "measure":
        m = ser.measure_from_json(doc["measure"])
        if not isinstance(m, GridOperatorMeasure):
            raise InputError("measure file must hold an operator measure")
        return operator_kernel_sampler(m)
    if kind == "iso-unitary":
        pair, _, phi = _iso_pair(doc, phi_file)
        return thm41_sampler(pair, phi)
    raise InputError(f"unknown instance kind {kind!r}")


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


def _h2_report(r: PairSampler, tol: float) -> VerificationReport:
    grid = H2Grid.default()
    pts = grid.points
    table = r.grid(pts, pts)
    report = VerificationReport()
    for i, h in enumerate(test_vectors(r.dim)):
        f = np.einsum("i,abij,j->ab", h.conj(), table, h)
        rep = h2_from_table(f, grid, tol)
        report.add(f"h{i}.a", rep.condition_a_residual, tol)
        report.add(f"h{i}.b", max(0.0, -rep.condition_b_min), tol)
        report.add(f"h{i}.c", rep.condition_c_residual, tol)
    return report


def _slice_sampler(r: PairSampler) -> ResolventSampler:
    """Single-variable slice ``(I + R(z, 0)) / 2``."""
    eye = np.eye(r.dim)
    return ResolventSampler(r.dim, lambda z: 0.5 * (eye + r(z, 0.0)))


def run_verify(doc: dict, theorem: str, tol: Optional[float] = None,
               phi_file: Optional[str] = None) -> VerificationReport:
    tol = 1e-8 if tol is None else tol
    kind = doc.get("kind")
    if theorem not in THEOREMS:
        raise InputError(f"theorem must be one of {THEOREMS}")
    if kind == "iso-unitary" and theorem in ("t12", "t13"):
        pair, _, phi = _iso_pair(doc, phi_file)
        r1 = chumakin_sampler(pair.v, phi)
        if theorem == "t13":
            return verify_theorem_1_3(pair.v, r1, tol=tol)
        l_space = orthonormalize(pair.v.domain.basis - ZETA0 * pair.v.action)
        return verify_theorem_1_2(r1, ZETA0, l_space, tol=tol)
    r = load_pair_sampler(doc, phi_file)
    if theorem == "t31":
        return verify_theorem_3_1(r, tol=tol)
    if theorem == "h2":
        return _h2_report(r, tol)
    if theorem == "t32":
        if kind == "iso-unitary":
            pair, _, _ = _iso_pair(doc, phi_file)
            return verify_theorem_3_2(pair.v, pair.unitary_as_isometry(), r, tol=tol)
        trivial = PartialIsometry.trivial(r.dim)
        return verify_theorem_3_2(trivial, trivial, r, tol=tol)
    # single-variable checks on the first slice, as resolvents of the trivial operator
    s = _slice_sampler(r)
    if theorem == "t13":
        return verify_theorem_1_3(PartialIsometry.trivial(r.dim), s, tol=tol)
    return verify_theorem_1_2(s, ZETA0, Subspace.zero(r.dim), tol=tol)


def run_report(doc: dict, checks: VerificationReport, started: float, extra=None) -> dict:
    out = {"instance": doc.get("spec", {"kind": doc.get("kind")}),
           "checks": [{"name": c.id, "max_residual": c.max_residual, "tolerance": c.tolerance,
                       "pass": c.passed} for c in checks.conditions],
           "overall_pass": checks.overall_pass,
           "wall_time": round(time.perf_counter() - started, 6)}
    if extra:
        out.update(extra)
    return out


# --------------------------------------------------------------------------
# reconstruct / factor / sample
# --------------------------------------------------------------------------


def run_reconstruct(doc: dict, grid_n: Optional[int], minimal: bool, tol: Optional[float]):
    tol = 1e-7 if tol is None else tol
    if grid_n is None:
        grid_n = int(doc.get("spec", {}).get("grid_n", 0)) or None
    if doc.get("kind") == "measure":
        m = ser.measure_from_json(doc["measure"])
        pair, dil = reconstruct_from_measure(m, minimal=minimal)
        residual = certify(operator_kernel_sampler(m), pair)
        report = {"residual": residual, "tolerance": tol, "pass": residual <= tol,
                  "grid": {"n1": m.n1, "n2": m.n2}, "compression_residual": dil.compression_residual(m)}
        return report, {"dilation": ser.dilation_to_json(dil), "pair": ser.pair_to_json(pair)}
    if grid_n is None:
        raise InputError("--grid is required for this input")
    r = load_pair_sampler(doc)
    try:
        res = reconstruct_and_certify(r, grid_n, grid_n, minimal=minimal, tol=tol)
    except (NotAResolvent, NegativeAtom) as exc:
        report = {"pass": False, "error": type(exc).__name__, "message": str(exc),
                  "tolerance": tol, "grid": {"n1": grid_n, "n2": grid_n}}
        return report, None
    return res.to_dict(), {"dilation": ser.dilation_to_json(res.dilation), "pair": ser.pair_to_json(res.pair)}


def run_factor(doc, tol: Optional[float]):
    tol = EPS_ORTHO if tol is None else tol
    if isinstance(doc, dict) and doc.get("kind") == "iso-unitary":
        pair, j, _ = _iso_pair(doc)
        fr = build_theta(j, pair.u, pair.v, tol=max(tol, EPS_ORTHO))
        k, l, u0 = fr.k, fr.l, fr.u0
        payload = ser.frame_to_json(fr)
    else:
        m = doc.get("U") if isinstance(doc, dict) else doc
        if m is None:
            raise InputError("expected a matrix or an object with key 'U'")
        u0 = ser.dec_matrix(m)
        try:
            k, l = godic_lucenko_factor(u0)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        payload = {"K": ser.conjugation_to_json(k), "L": ser.conjugation_to_json(l)}
    comp = float(np.linalg.norm(compose_antilinear(k, l) - u0, 2)) if u0.size else 0.0
    checks = VerificationReport()
    checks.add("K(L(x)) = U0 x", comp, tol)
    checks.add("K symmetric", k.symmetry_residual(), tol)
    checks.add("K unitary", k.unitarity_residual() if u0.size else 0.0, tol)
    checks.add("L symmetric", l.symmetry_residual(), tol)
    checks.add("L unitary", l.unitarity_residual() if u0.size else 0.0, tol)
    return checks, payload


def run_sample(doc: dict, entry=(0, 0), z1=None, z2=None, phi_file=None):
    r = load_pair_sampler(doc, phi_file)
    if z1 is not None and z2 is not None:
        return None, ser.enc_matrix(r(ser.dec_complex(_parse_point(z1)), ser.dec_complex(_parse_point(z2))))
    i, j = entry
    if not (0 <= i < r.dim and 0 <= j < r.dim):
        raise InputError("entry out of range")
    pts = H2Grid.default().points
    vals = r.grid(pts, pts)[:, :, i, j]
    return ser.sampled_function_to_csv(pts, pts, vals), None


def _parse_point(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return "inf"
    try:
        z = complex(text.replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"bad point {text!r}") from exc
    return [z.real, z.imag]


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--grid", type=int, help="grid size n (n1 = n2 = n)")
    common.add_argument("--minimal", action="store_true", help="minimal Naimark dilation")
    common.add_argument("--seed", type=int, default=0, help="random seed")

    p = argparse.ArgumentParser(prog="gresolvent", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a seeded instance file")
    g.add_argument("--kind", choices=KINDS, default="pair")
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--big-dim", type=int, default=None)
    g.add_argument("--off-grid", action="store_true", help="joint spectrum off the grid")
    g.add_argument("--scale", type=float, default=1.0, help="scale resolvent samples")

    v = sub.add_parser("verify", parents=[common], help="run a characterization check")
    v.add_argument("file")
    v.add_argument("--theorem", choices=THEOREMS, default="t31")
    v.add_argument("--phi-file")

    r = sub.add_parser("reconstruct", parents=[common], help="recover a commuting unitary pair")
    r.add_argument("file")

    f = sub.add_parser("factor", parents=[common], help="factor a unitary into two conjugations")
    f.add_argument("file")

    s = sub.add_parser("sample", parents=[common], help="dump R on the sample grid as CSV")
    s.add_argument("file")
    s.add_argument("--entry", type=int, nargs=2, default=(0, 0), metavar=("I", "J"))
    s.add_argument("--z1")
    s.add_argument("--z2")
    s.add_argument("--phi-file")
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "generate":
            spec = InstanceSpec(args.seed, args.dim, args.big_dim or 2 * args.dim,
                                args.grid or 4, args.kind)
            doc = generate_instance(spec, off_grid=args.off_grid, scale=args.scale)
            _emit(ser.dumps(doc) + "\n", args.out)
            return 0
        doc = load_json(args.file)
        if args.command == "verify":
            checks = run_verify(doc, args.theorem, args.tol, args.phi_file)
            report = run_report(doc, checks, started, {"theorem": args.theorem})
            _emit(json.dumps(report, indent=2) + "\n", args.out)
            return 0 if checks.overall_pass else 1
        if args.command == "reconstruct":
            report, payload = run_reconstruct(doc, args.grid, args.minimal, args.tol)
            sys.stdout.write(json.dumps(report, indent=2) + "\n")
            if args.out and payload is not None:
                _emit(ser.dumps(dict(payload, report=report)) + "\n", args.out)
            return 0 if report["pass"] else 1
        if args.command == "factor":
            checks, payload = run_factor(doc, args.tol)
            report = run_report(doc if isinstance(doc, dict) else {}, checks, started)
            sys.stdout.write(json.dumps(report, indent=2) + "\n")
            if args.out:
                _emit(ser.dumps(payload) + "\n", args.out)
            return 0 if checks.overall_pass else 1
        if args.command == "sample":
            text, point = run_sample(doc, tuple(args.entry), args.z1, args.z2, args.phi_file)
            _emit(text if point is None else json.dumps(point) + "\n", args.out)
            return 0
    except (InputError, InvalidSpec, GridMismatch, KeyError, TypeError, ValueError, IndexError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except ResolventError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
