"""Command-line driver: design, check, and report on chain extensions.

Subcommands
-----------
extend
    network.json -> design.json, spectrum.csv and figures.  Exit 0 only
    when the encoded transfer fidelity clears the gate; 2 when the two
    subspace spectra share an eigenvalue (no extension can separate
    them); 3 when the shrink loop hits its floor.
verify
    Recheck a stored design.json from first principles — rebuild the
    blocks, re-evaluate every invariant and the fidelity, without
    touching the solver.  Exit 1 on any breach.
random-trials
    Seeded random-chain sweep -> summary.csv (+ figure).  The same seed
    always produces byte-identical output.
spectrum
    Eigenvalue table of a stored design as CSV.
creation
    Singular values of the state-creation map of a stored design.

Every real number in a file is a decimal (or exact rational / sqrt)
string tagged with the precision it was written at; no binary floats.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np

from . import linalg, precision
from .errors import SharedSpectraFatal, ShrinkFloorReached, SpinextError
from .exact import ExactReal, parse_exact
from .inverse import TridiagonalChain
from .network import SpinNetwork, supported_blocks, symmetrize
from .pipeline import (
    FIDELITY_GATE,
    SHRINK_FLOOR,
    SHRINK_START,
    PipelineResult,
    design_pipeline,
    design_with_targets,
)
from .precision import decimal_str
from .selector import Target, TargetSpectrum
from .transfer import (
    assemble,
    build_design,
    creation_rank_check,
    encoded_transfer_fidelity,
    ghz_fidelity,
    mirror_permutation,
    state_creation_map,
)
from .trials import GHZ_GATE, run_trials, write_summary_csv

__all__ = ["RunConfig", "load_network", "main"]

FORMAT = "spinext-design/1"
#: Invariant tolerances the verify path holds a stored design to.
CONTAINMENT_TOL = mp.mpf("1e-20")
UNITARITY_TOL = mp.mpf("1e-20")


# ----------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by the design-producing commands."""

    precision_bits: int = precision.DEFAULT_BITS
    shrink_start: Fraction = SHRINK_START
    shrink_floor: Fraction = SHRINK_FLOOR
    J_prime: ExactReal = parse_exact(1)
    region_mode: str = "auto"
    seed: int = 0
    trials: int = 20

    def __post_init__(self):
        if self.precision_bits < 128:
            raise ValueError("precision must be at least 128 bits")
        if not 0 < self.shrink_floor <= self.shrink_start <= 1:
            raise ValueError("need 0 < shrink floor <= shrink start <= 1")
        if self.region_mode not in ("auto", "NA", "NA+1"):
            raise ValueError("region must be auto, NA or NA+1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        precision_bits=args.precision,
        shrink_start=Fraction(args.shrink_start),
        shrink_floor=Fraction(args.shrink_floor),
        J_prime=parse_exact(args.jprime),
        region_mode=args.region,
        seed=getattr(args, "seed", 0),
        trials=getattr(args, "trials", 20),
    )


# ----------------------------------------------------------------------
# Network files


def load_network(path) -> SpinNetwork:
    """Read a network file in the 1-based interchange form.

    ``{"n": 6, "edges": [{"i": 1, "j": 2, "w": "1"}, ...],
    "fields": ["0", ...], "in": 1, "out": 6}`` — weights and fields may
    be ints, exact decimal/rational strings, or ``sqrt`` expressions;
    any float literal in the file is read exactly.
    """
    with open(path) as f:
        doc = json.load(f, parse_float=Fraction)
    return SpinNetwork.from_json(doc)


def _network_doc(net: SpinNetwork) -> dict:
    return {
        "n": net.n,
        "edges": [{"i": a + 1, "j": b + 1, "w": str(w)}
                  for (a, b), w in sorted(net.couplings.items())],
        "fields": [str(h) for h in net.fields],
        "in": net.input + 1,
        "out": net.output + 1,
    }


# ----------------------------------------------------------------------
# Design serialization


def _parse_real(s):
    """A stored real: exact rational/sqrt forms or a decimal string."""
    if isinstance(s, (int, Fraction)):
        return precision.to_mpf(s)
    text = str(s)
    if "/" in text or "sqrt" in text:
        return parse_exact(text).to_mpf()
    return mp.mpf(text)


def _phase_doc(phase, digits) -> list[str]:
    z = mp.mpc(phase)
    return [decimal_str(z.real, digits), decimal_str(z.imag, digits)]


def serialize_design(res: PipelineResult, cfg: RunConfig, mode: str,
                     net: SpinNetwork, creation=None,
                     targets_exact: tuple[list, list] | None = None) -> dict:
    """Everything needed to rebuild and recheck the design, as one dict."""
    design = res.design
    sys_ = design.system
    r = res.interpolant
    hi = int(r.bits * 0.30103) + 5
    lo = int(cfg.precision_bits * 0.30103) + 5
    ts = res.spectrum

    target_rows = []
    for t in ts.targets:
        target_rows.append({"value": decimal_str(t.value, hi),
                            "m": t.m, "subspace": t.subspace})
    if targets_exact is not None:
        plus, minus = targets_exact
        targets_block_exact = {"plus": [str(Fraction(v)) for v in plus],
                               "minus": [str(Fraction(v)) for v in minus]}
    else:
        targets_block_exact = None

    subspaces = [0] * design.dim
    for k, t in zip(design.controlled, ts.targets):
        subspaces[k] = t.subspace
    for k in design.uncontrolled:
        subspaces[k] = 1 if design.uncontrolled_parity(k) > 0 else -1

    doc = {
        "format": FORMAT,
        "precision_bits": cfg.precision_bits,
        "solve": {
            "method": r.method,
            "bits": r.bits,
            "residual": decimal_str(r.residual, 8),
            "solved_J": r.solved_J,
        },
        "network": _network_doc(net),
        "j_prime": str(cfg.J_prime) if sys_.mirrored else None,
        "symmetrization": {
            "mode": mode,
            "mirrored": sys_.mirrored,
            "involution": None if sys_.mirrored else list(sys_.S),
        },
        "classification": {
            "bipartite": res.prepared.classification.bipartite,
            "field_free": res.prepared.classification.field_free,
            "even": res.prepared.classification.even,
        },
        "targets": {
            "delta": decimal_str(ts.delta, hi),
            "delta_exact": (str(ts.delta_frac)
                            if ts.delta_frac is not None else None),
            "shrink": str(res.shrink) if res.shrink is not None else None,
            "residue_plus": ts.residue_plus,
            "residue_minus": ts.residue_minus,
            "exact": targets_block_exact,
            "list": target_rows,
        },
        "chain": {
            "couplings": [decimal_str(c, hi) for c in design.chain.couplings],
            "fields": [decimal_str(a, hi) for a in design.chain.fields],
            "orientation": design.chain.orientation,
        },
        "J": decimal_str(design.J, hi),
        "t0": decimal_str(design.t0, hi),
        "region_size": design.region_size,
        "encoding": {
            "dimension": len(design.encode),
            "vectors": [[decimal_str(x, lo) for x in v[: design.region_size]]
                        for v in design.encode],
        },
        "certificate": {
            "ok": bool(res.certificate.ok),
            "real_roots": res.certificate.real_roots,
            "j_positive": res.certificate.j_positive,
            "interlacing": res.certificate.interlacing,
        },
        "alternation_ok": bool(res.alternation.ok),
        "attempts": list(res.attempts),
        "spectrum": {
            "eigenvalues": [decimal_str(v, lo) for v in design.eigenvalues],
            "subspace": subspaces,
            "controlled": list(design.controlled),
        },
        "fidelity_report": {
            "t0": decimal_str(design.t0, hi),
            "phase": _phase_doc(res.fidelity.phase, lo),
            "per_vector_fidelity": [decimal_str(f, lo)
                                    for f in res.fidelity.per_vector],
            "minimum": decimal_str(res.fidelity.minimum, lo),
            "min_singular_value": (decimal_str(creation.min_singular_value, lo)
                                   if creation is not None else None),
            "ghz_fidelity": (decimal_str(ghz_fidelity(creation.singular_values), lo)
                             if creation is not None else None),
            "spectrum": {
                "controlled": [decimal_str(design.eigenvalues[k], lo)
                               for k in design.controlled],
                "uncontrolled": [decimal_str(design.eigenvalues[k], lo)
                                 for k in design.uncontrolled],
            },
            "containment_max": decimal_str(max(res.containment), 8),
        },
        "creation": ({"singular_values": [decimal_str(s, lo)
                                          for s in creation.singular_values]}
                     if creation is not None else None),
        "metadata": {"tool": "spinext", "format_version": 1},
    }
    return doc


def _write_json(doc: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def write_spectrum_csv(doc: dict, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["value", "subspace", "controlled"])
    controlled = set(doc["spectrum"]["controlled"])
    for k, (v, s) in enumerate(zip(doc["spectrum"]["eigenvalues"],
                                   doc["spectrum"]["subspace"])):
        w.writerow([v, s, int(k in controlled)])


# ----------------------------------------------------------------------
# Rebuilding a stored design (shared by verify / spectrum / creation)


def _spectrum_from_doc(tdoc) -> TargetSpectrum:
    rows = tdoc.get("list") or []
    have_m = bool(rows) and all(r.get("m") is not None for r in rows)
    if not have_m and tdoc.get("exact"):
        return TargetSpectrum.from_values(tdoc["exact"]["plus"],
                                          tdoc["exact"].get("minus", ()))
    targets = tuple(sorted(
        (Target(value=_parse_real(r["value"]), subspace=int(r["subspace"]),
                m=(int(r["m"]) if r.get("m") is not None else None))
         for r in rows),
        key=lambda t: t.value, reverse=True))
    rp = {t.m % 4 for t in targets if t.subspace > 0 and t.m is not None}
    rm = {t.m % 4 for t in targets if t.subspace < 0 and t.m is not None}
    delta_exact = tdoc.get("delta_exact")
    shrink = tdoc.get("shrink")
    return TargetSpectrum(
        targets=targets, delta=_parse_real(tdoc["delta"]),
        residue_plus=rp.pop() if len(rp) == 1 else None,
        residue_minus=rm.pop() if len(rm) == 1 else None,
        delta_frac=Fraction(delta_exact) if delta_exact else None,
        shrink=Fraction(shrink) if shrink else None)


def _rebuild_system(doc):
    net = SpinNetwork.from_json(doc["network"])
    sym = doc["symmetrization"]
    if sym["mirrored"]:
        sys_ = symmetrize(net, J_prime=parse_exact(doc["j_prime"]),
                          mode="mirror")
    else:
        sys_ = symmetrize(net, involution=sym["involution"])
    return net, sys_


def _rebuild_design(doc):
    """Stored document -> assembled TransferDesign, via the library's
    assembly path only (no solver involvement)."""
    net, sys_ = _rebuild_system(doc)
    Cp, Cm = supported_blocks(sys_)
    ts = _spectrum_from_doc(doc["targets"])
    chain = TridiagonalChain(
        couplings=tuple(_parse_real(c) for c in doc["chain"]["couplings"]),
        fields=tuple(_parse_real(a) for a in doc["chain"]["fields"]),
        orientation=doc["chain"]["orientation"])
    J = _parse_real(doc["J"])
    design = build_design(chain, sys_, J, ts,
                          region_size=int(doc["region_size"]),
                          blocks=(Cp, Cm))
    return design


def _stored_residuals(chain: TridiagonalChain, J, Cp, Cm,
                      ts: TargetSpectrum) -> list:
    """Sector char-poly residual of every target, from stored data only.

    Pointwise evaluation of Q_A(z) Q_C(z) - J^2 P_A(z) P_C(z): the chain
    polynomials come straight from the stored tridiagonal, the block
    polynomials from the reduced blocks' spectral data.
    """
    d = [mp.mpf(a) for a in chain.fields]
    e = [mp.mpf(b) for b in chain.couplings]
    j2 = mp.mpf(J) ** 2
    data = {+1: Cp.spectral_data(), -1: Cm.spectral_data()}

    def _cp(dd, ee, x):
        if not dd:
            return mp.mpf(1)
        return linalg.charpoly_tridiag_eval(dd, ee, x)[0]

    out = []
    for t in ts.targets:
        nodes, weights = data[t.subspace]
        qc = mp.fprod(t.value - x for x in nodes)
        pc = mp.fsum(
            w * mp.fprod(t.value - x for j, x in enumerate(nodes) if j != i)
            for i, w in enumerate(weights))
        qa = _cp(d, e, t.value)
        pa = _cp(d[:-1], e[:-1], t.value)
        lhs, rhs = qa * qc, j2 * pa * pc
        scale = max(abs(lhs), abs(rhs), mp.mpf(1))
        out.append(abs(lhs - rhs) / scale)
    return out


# ----------------------------------------------------------------------
# extend


def _print_result_lines(res: PipelineResult, out: Path) -> None:
    print(f"shrink        {res.shrink if res.shrink is not None else '-'}")
    print(f"method        {res.interpolant.method} ({res.interpolant.bits} bits)")
    print(f"chain sites   {res.design.n_ext}  (total dimension {res.design.dim})")
    print(f"J             {mp.nstr(res.design.J, 12)}")
    print(f"t0            {mp.nstr(res.design.t0, 12)}")
    print(f"region        {res.design.region_size} sites, "
          f"{len(res.design.encode)} encoded vector(s)")
    print(f"fidelity      {mp.nstr(res.fidelity.minimum, 12)}")
    print(f"written       {out}")


def cmd_extend(args) -> int:
    try:
        cfg = _config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    net = load_network(args.network)
    outdir = Path(args.out)
    t_start = time.perf_counter()
    try:
        with precision.bits(cfg.precision_bits):
            if args.targets_plus or args.targets_minus:
                plus = [s for s in (args.targets_plus or "").split(",") if s]
                minus = [s for s in (args.targets_minus or "").split(",") if s]
                res = design_with_targets(
                    net, plus, minus, J_prime=cfg.J_prime, mode=args.mode,
                    region_mode=cfg.region_mode, bits=cfg.precision_bits)
                targets_exact = ([Fraction(s) for s in plus],
                                 [Fraction(s) for s in minus])
            else:
                res = design_pipeline(
                    net, J_prime=cfg.J_prime, mode=args.mode,
                    shrink_start=cfg.shrink_start,
                    shrink_floor=cfg.shrink_floor,
                    region_mode=cfg.region_mode, bits=cfg.precision_bits)
                targets_exact = None
            creation = (state_creation_map(res.design)
                        if res.design.system.mirrored else None)
            doc = serialize_design(res, cfg, args.mode, net,
                                   creation=creation,
                                   targets_exact=targets_exact)
    except SharedSpectraFatal as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 2
    except ShrinkFloorReached as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 3
    except (SpinextError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    design_path = outdir / "design.json"
    _write_json(doc, design_path)
    with open(outdir / "spectrum.csv", "w") as f:
        write_spectrum_csv(doc, f)
    if not args.no_figures:
        from . import plots
        plots.plot_spectrum(res.design, outdir / "spectrum.png")
        plots.plot_couplings(res.design, outdir / "couplings.png")
        if creation is not None:
            plots.plot_singular_values(creation.singular_values,
                                       outdir / "creation.png")
    _print_result_lines(res, design_path)
    print(f"elapsed       {time.perf_counter() - t_start:.1f}s",
          file=sys.stderr)
    if res.fidelity.minimum < 1 - FIDELITY_GATE:
        print("fidelity below gate", file=sys.stderr)
        return 1
    return 0


# ----------------------------------------------------------------------
# verify


def _check(checks: list, name: str, ok: bool, detail: str = "") -> None:
    checks.append((name, bool(ok), detail))
    tag = "ok    " if ok else "BREACH"
    line = f"{tag} {name}"
    if detail:
        line += f"  {detail}"
    print(line)


def cmd_verify(args) -> int:
    with open(args.design) as f:
        doc = json.load(f, parse_float=Fraction)
    checks: list = []
    if not str(doc.get("format", "")).startswith("spinext-design"):
        _check(checks, "format", False, f"unrecognized {doc.get('format')!r}")
        return 1
    bits = args.precision or int(doc["precision_bits"])
    with precision.bits(max(bits, 128)):
        try:
            net, sys_ = _rebuild_system(doc)
            Cp, Cm = supported_blocks(sys_)
            _check(checks, "system",
                   True, f"{'doubled' if sys_.mirrored else 'as given'}, "
                         f"blocks {Cp.matrix.rows}+{Cm.matrix.rows}")
        except (SpinextError, ValueError, KeyError) as exc:
            _check(checks, "system", False, str(exc))
            return 1

        ts = _spectrum_from_doc(doc["targets"])
        lattice_ok, worst = ts.pst_parity_report()
        _check(checks, "lattice", lattice_ok,
               f"worst residual {mp.nstr(worst, 3)}")

        t0 = _parse_real(doc["t0"])
        rel = abs(ts.t0 - t0) / t0 if t0 else mp.inf
        _check(checks, "transfer-time", rel <= mp.mpf("1e-30"),
               f"pi/delta vs stored t0: {mp.nstr(rel, 3)}")

        chain = TridiagonalChain(
            couplings=tuple(_parse_real(c) for c in doc["chain"]["couplings"]),
            fields=tuple(_parse_real(a) for a in doc["chain"]["fields"]),
            orientation=doc["chain"]["orientation"])
        J = _parse_real(doc["J"])

        H = assemble(chain, sys_, J)
        mirror = mirror_permutation(chain.n, sys_)
        sym_ok = all(H[mirror[i], mirror[j]] == H[i, j]
                     for i in range(H.rows) for j in range(H.rows))
        _check(checks, "mirror-symmetry", sym_ok, "exact")

        residuals = _stored_residuals(chain, J, Cp, Cm, ts)
        worst_r = max(residuals) if residuals else mp.mpf(0)
        _check(checks, "containment", worst_r <= CONTAINMENT_TOL,
               f"max sector char-poly residual {mp.nstr(worst_r, 3)}")

        design = None
        try:
            design = build_design(chain, sys_, J, ts,
                                  region_size=int(doc["region_size"]),
                                  blocks=(Cp, Cm))
            _check(checks, "spectrum", True,
                   f"{len(design.controlled)} controlled + "
                   f"{len(design.uncontrolled)} uncontrolled")
        except (SpinextError, ValueError) as exc:
            _check(checks, "spectrum", False, str(exc))

        if design is not None:
            Q = design.eigenvectors
            n = design.dim
            worst_u = mp.mpf(0)
            for i in range(n):
                for j in range(i, n):
                    g = mp.fsum(Q[k, i] * Q[k, j] for k in range(n))
                    worst_u = max(worst_u, abs(g - (1 if i == j else 0)))
            _check(checks, "unitarity", worst_u <= UNITARITY_TOL,
                   f"max Gram defect {mp.nstr(worst_u, 3)}")

            enc_ok = (len(design.encode) == int(doc["encoding"]["dimension"])
                      and len(design.encode) >= 1)
            _check(checks, "encoding", enc_ok,
                   f"dimension {len(design.encode)} over "
                   f"{design.region_size} sites")

            fid = encoded_transfer_fidelity(design)
            _check(checks, "fidelity", fid.minimum >= 1 - FIDELITY_GATE,
                   f"minimum {mp.nstr(fid.minimum, 12)}")

            if sys_.mirrored:
                creation = state_creation_map(design)
                s = creation.min_singular_value
                _check(checks, "creation",
                       0 < s <= 1 + mp.mpf("1e-25"),
                       f"min singular {mp.nstr(s, 10)}, GHZ "
                       f"{mp.nstr(ghz_fidelity(creation.singular_values), 10)}")

    bad = [name for name, ok, _ in checks if not ok]
    if bad:
        print(f"breached: {', '.join(bad)}", file=sys.stderr)
        return 1
    print("all invariants hold")
    return 0


# ----------------------------------------------------------------------
# random-trials


def cmd_random_trials(args) -> int:
    try:
        cfg = _config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()

    def progress(rec):
        status = "ok" if rec.success else f"FAILED ({rec.failure})"
        print(f"trial {rec.trial}: {status}  [{rec.elapsed:.1f}s]",
              file=sys.stderr)

    with precision.bits(cfg.precision_bits):
        summary = run_trials(
            cfg.seed, cfg.trials, sites=args.sites,
            shrink_start=cfg.shrink_start, shrink_floor=cfg.shrink_floor,
            ghz_gate=None if args.no_ghz_gate else GHZ_GATE,
            bits=cfg.precision_bits, progress=progress)

    with open(outdir / "summary.csv", "w") as f:
        write_summary_csv(summary, f)
    meta = {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "sites": args.sites,
        "precision_bits": cfg.precision_bits,
        "prng": {
            "bit_generator": "PCG64",
            "seeding": "SeedSequence(seed, spawn_key=(trial,))",
            "library": f"numpy {np.__version__}",
            "draw": "0.9 + 0.2 * k / 2^53, k uniform 53-bit integer",
        },
        "success_rate": str(summary.success_rate),
    }
    _write_json(meta, outdir / "summary.json")
    if not args.no_figures and summary.records:
        from . import plots
        plots.plot_trials(summary, outdir / "trials.png")
    print(f"{summary.successes}/{len(summary.records)} trials succeeded "
          f"-> {outdir / 'summary.csv'}")
    print(f"elapsed {time.perf_counter() - t_start:.1f}s", file=sys.stderr)
    return 0 if summary.successes == len(summary.records) else 1


# ----------------------------------------------------------------------
# spectrum / creation reports


def cmd_spectrum(args) -> int:
    with open(args.design) as f:
        doc = json.load(f, parse_float=Fraction)
    buf = io.StringIO()
    write_spectrum_csv(doc, buf)
    if args.out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as f:
            f.write(buf.getvalue())
        print(f"written {args.out}")
    return 0


def cmd_creation(args) -> int:
    with open(args.design) as f:
        doc = json.load(f, parse_float=Fraction)
    bits = args.precision or int(doc["precision_bits"])
    with precision.bits(max(bits, 128)):
        try:
            design = _rebuild_design(doc)
            creation = state_creation_map(design)
        except (SpinextError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        rank = creation_rank_check(design)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "singular_value"])
        for k, s in enumerate(creation.singular_values):
            w.writerow([k, decimal_str(s, 20)])
        if args.out == "-":
            sys.stdout.write(buf.getvalue())
        else:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            with open(args.out, "w") as f:
                f.write(buf.getvalue())
            print(f"written {args.out}")
        print(f"min singular value  {mp.nstr(creation.min_singular_value, 12)}")
        print(f"GHZ fidelity        "
              f"{mp.nstr(ghz_fidelity(creation.singular_values), 12)}")
        print(f"obstruction rank    "
              f"{'full (no perfect creation)' if rank.ok else 'degenerate'}")
    return 0


# ----------------------------------------------------------------------
# Argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision", type=int, default=precision.DEFAULT_BITS,
                   help="working precision in bits (>= 128)")
    p.add_argument("--jprime", default="1",
                   help="joining coupling for the mirror-doubled centre")
    p.add_argument("--region", default="auto",
                   choices=("auto", "NA", "NA+1"),
                   help="encoding region size policy")
    p.add_argument("--shrink-start", default=str(SHRINK_START),
                   help="initial pinning shrink factor (rational)")
    p.add_argument("--shrink-floor", default=str(SHRINK_FLOOR),
                   help="smallest shrink factor before giving up (rational)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinext",
        description="Engineered chain extensions for perfect encoded "
                    "state transfer on spin networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="design an extension for a network")
    p.add_argument("network", help="network description (JSON)")
    p.add_argument("--mode", default="auto",
                   choices=("auto", "detect", "mirror"),
                   help="symmetrization strategy")
    p.add_argument("--targets-plus", default="",
                   help="comma-separated exact symmetric-subspace targets "
                        "(skips the automatic pinning)")
    p.add_argument("--targets-minus", default="",
                   help="comma-separated exact antisymmetric-subspace targets")
    _add_common(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify", help="recheck a stored design")
    p.add_argument("design", help="design.json to verify")
    p.add_argument("--precision", type=int, default=0,
                   help="override the stored working precision")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random-trials", help="seeded random-chain sweep")
    p.add_argument("--seed", type=int, default=0, help="64-bit PRNG seed")
    p.add_argument("--trials", type=int, default=20, help="number of trials")
    p.add_argument("--sites", type=int, default=20,
                   help="coupling draws per trial (sites-1 chain couplings "
                        "plus the joining coupling)")
    p.add_argument("--no-ghz-gate", action="store_true",
                   help="stop each trial at first certified design instead "
                        "of refining for creation quality")
    _add_common(p)
    p.set_defaults(func=cmd_random_trials)

    p = sub.add_parser("spectrum", help="eigenvalue CSV of a stored design")
    p.add_argument("design")
    p.add_argument("--out", default="-", help="output file, - for stdout")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("creation", help="state-creation SVD of a stored design")
    p.add_argument("design")
    p.add_argument("--out", default="-", help="output file, - for stdout")
    p.add_argument("--precision", type=int, default=0,
                   help="override the stored working precision")
    p.set_defaults(func=cmd_creation)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
