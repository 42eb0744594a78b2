"""Inverse problem: from targets to the tridiagonal extension.

Given the contact resolvents of the two symmetry blocks and a target
spectrum, the eigenvalue condition ``J^2 mu_A(lambda) mu_C(lambda) = 1``
is linear in the coefficients of ``J^2 P_A`` and ``Q_A``.  We solve that
system at high precision, certify the three reconstruction conditions
(real roots, positive J^2, strict interlacing), convert ``P/Q`` to
spectral nodes and weights, and run the three-term recurrence to rebuild
the chain itself.

Field-free systems with targets in exact +/- pairs admit a half-size
solve in the variable ``y = z^2``, which both halves the system and
forces an identically zero chain diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from . import precision
from .errors import (
    BreakdownAtStep,
    ComplexRoots,
    NegativeJSquared,
    NonPositiveWeight,
    ParityMismatch,
    PoleTarget,
    SingularSystem,
)
from .linalg import lanczos_jacobi, solve_full_pivot
from .network import SupportedBlock
from .selector import TargetSpectrum
from .spectral import (
    MonicPolynomial,
    check_strict_interlacing,
    isolate_real_roots,
    mu_from_data,
    real_root_count,
    refine_in_brackets,
)

__all__ = [
    "RationalInterpolant",
    "TridiagonalChain",
    "SpectralWeights",
    "Certificate",
    "solve_interpolation",
    "solve_field_free",
    "certify_conditions",
    "to_spectral_weights",
    "reconstruct_tridiagonal",
]


@dataclass(frozen=True, eq=False)
class RationalInterpolant:
    """The solved extension resolvent mu_A = P/Q with its boundary coupling.

    ``P`` is stored monic (in J-unknown mode the raw leading coefficient
    is J^2, kept in ``j_squared``); ``Q`` is monic of degree one higher.
    ``residual`` is the worst relative defect of the defining equations
    at the precision ``bits`` the solve finally ran at.
    """

    P: MonicPolynomial
    Q: MonicPolynomial
    J: mp.mpf
    solved_J: bool
    j_squared: mp.mpf
    residual: mp.mpf
    bits: int
    method: str

    @property
    def degree(self) -> int:
        return self.Q.degree


@dataclass(frozen=True, eq=False)
class TridiagonalChain:
    """An open chain, stored outer end first; the contact sits last.

    All couplings are positive — reconstruction guarantees it, and the
    constructor enforces it.
    """

    couplings: tuple
    fields: tuple
    orientation: str = "contact-last"

    def __post_init__(self):
        if len(self.couplings) != max(len(self.fields) - 1, 0):
            raise ValueError("need one coupling fewer than fields")
        if any(c <= 0 for c in self.couplings):
            raise ValueError("chain couplings must be positive")

    @property
    def n(self) -> int:
        return len(self.fields)

    def matrix(self) -> mp.matrix:
        M = mp.zeros(self.n)
        for i, f in enumerate(self.fields):
            M[i, i] = mp.mpf(f)
        for i, c in enumerate(self.couplings):
            M[i, i + 1] = M[i + 1, i] = mp.mpf(c)
        return M

    def reversed(self) -> "TridiagonalChain":
        return TridiagonalChain(
            couplings=tuple(reversed(self.couplings)),
            fields=tuple(reversed(self.fields)),
            orientation=("contact-first" if self.orientation == "contact-last"
                         else "contact-last"))


@dataclass(frozen=True, eq=False)
class SpectralWeights:
    """Partial-fraction data of mu_A: nodes descending, positive weights."""

    nodes: tuple
    weights: tuple
    total: mp.mpf


@dataclass(frozen=True, eq=False)
class Certificate:
    """The three reconstruction conditions, checked independently."""

    real_roots: bool
    j_positive: bool
    interlacing: bool
    nonreal_q: int = 0
    nonreal_p: int = 0
    j_squared: mp.mpf | None = None
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.real_roots and self.j_positive and self.interlacing

    def __bool__(self) -> bool:
        return self.ok


# ----------------------------------------------------------------------
# mu evaluation


def _block_for(t, Cp: SupportedBlock, Cm: SupportedBlock) -> SupportedBlock:
    return Cp if t.subspace > 0 else Cm


def _mu_at_targets(Cp: SupportedBlock, Cm: SupportedBlock,
                   targets: TargetSpectrum) -> list:
    """Contact resolvent of each target's own block, with a pole guard."""
    out = []
    for t in targets.targets:
        vals, ws = _block_for(t, Cp, Cm).spectral_data()
        scale = max(max(abs(v) for v in vals), abs(t.value), mp.mpf(1))
        guard = scale * mp.mpf(2) ** (-mp.mp.prec // 2)
        if min(abs(t.value - v) for v in vals) <= guard:
            raise PoleTarget(t.value)
        out.append(mu_from_data(vals, ws, t.value))
    return out


# ----------------------------------------------------------------------
# Linear solves


def _solve_rows(rows, rhs):
    try:
        return solve_full_pivot(rows, rhs)
    except ValueError as exc:
        raise SingularSystem(str(exc)) from None


def _residual_tol(bits: int) -> mp.mpf:
    return mp.mpf(2) ** (-(bits // 4))


def _full_residual(Cp, Cm, targets, P, Q, j2) -> mp.mpf:
    worst = mp.mpf(0)
    mus = _mu_at_targets(Cp, Cm, targets)
    for t, mu_v in zip(targets.targets, mus):
        lhs = j2 * mu_v * P(t.value)
        rhs = Q(t.value)
        scale = max(abs(lhs), abs(rhs), mp.mpf(1))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def solve_interpolation(Cp: SupportedBlock, Cm: SupportedBlock,
                        targets: TargetSpectrum,
                        J=None) -> RationalInterpolant:
    """Solve the target conditions for P_A, Q_A (and J if not given).

    Each target contributes one linear equation ``J^2 mu(lambda)
    P(lambda) = Q(lambda)`` in the coefficients of ``J^2 P`` and the
    non-leading coefficients of monic ``Q``.  With J unknown the even
    target count fixes deg Q = count/2 and J^2 appears as the leading
    coefficient of ``J^2 P``; with J known one equation fewer is needed
    and P is monic by construction.

    The solve starts at 512 bits and doubles (re-evaluating the block
    resolvents) until the defining equations hold to the working
    tolerance or the precision cap is reached.
    """
    count = targets.size
    if J is None:
        if count == 0 or count % 2:
            raise ValueError("J-unknown solve needs an even number of targets")
        na = count // 2
    else:
        J = mp.mpf(J)
        if count % 2 == 0:
            raise ValueError("J-known solve needs an odd number of targets")
        na = (count + 1) // 2

    bits = max(precision.SOLVE_BITS, mp.mp.prec)
    cap = max(precision.MAX_SOLVE_BITS, bits)
    while True:
        with precision.bits(bits):
            mus = _mu_at_targets(Cp, Cm, targets)
            rows, rhs = [], []
            for t, mu_v in zip(targets.targets, mus):
                lam = t.value
                pows = [mp.mpf(1)]
                for _ in range(na):
                    pows.append(pows[-1] * lam)
                if J is None:
                    rows.append([mu_v * pows[i] for i in range(na)]
                                + [-pows[i] for i in range(na)])
                    rhs.append(pows[na])
                else:
                    j2known = J ** 2
                    rows.append([j2known * mu_v * pows[i] for i in range(na - 1)]
                                + [-pows[i] for i in range(na)])
                    rhs.append(pows[na] - j2known * mu_v * pows[na - 1])
            sol = _solve_rows(rows, rhs)
            if J is None:
                alphas, betas = sol[:na], sol[na:]
                j2 = alphas[-1]
                if j2 <= 0:
                    raise NegativeJSquared(j2)
                Jval = mp.sqrt(j2)
                P = MonicPolynomial.from_coeffs([a / j2 for a in alphas])
            else:
                alphas, betas = sol[: na - 1], sol[na - 1:]
                j2 = J ** 2
                Jval = J
                P = MonicPolynomial.from_coeffs(alphas + [mp.mpf(1)])
            Q = MonicPolynomial.from_coeffs(betas + [mp.mpf(1)])
            residual = _full_residual(Cp, Cm, targets, P, Q, j2)
        if residual <= _residual_tol(bits) or bits >= cap:
            break
        bits *= 2
    return RationalInterpolant(P=P, Q=Q, J=Jval, solved_J=J is None,
                               j_squared=j2, residual=residual, bits=bits,
                               method="full")


def _paired_targets(targets: TargetSpectrum) -> list:
    """Group targets into exact (+lambda, -lambda) pairs by lattice index.

    Returns the positive member of each pair.  Raises ParityMismatch for
    zero targets, unpaired values, or targets without lattice indices.
    """
    by_m = {}
    for t in targets.targets:
        if t.m is None:
            raise ParityMismatch("half-size solve needs lattice-indexed targets")
        if t.m == 0 or t.value == 0:
            raise ParityMismatch("zero target cannot be +/- paired; "
                                 "use the full solve")
        by_m[t.m] = t
    if len(by_m) != targets.size:
        raise ParityMismatch("duplicate lattice indices")
    pos = []
    for m, t in by_m.items():
        if -m not in by_m:
            raise ParityMismatch(f"target with index {m} has no mirror partner")
        if m > 0:
            pos.append(t)
    return pos


def solve_field_free(Cp: SupportedBlock, Cm: SupportedBlock,
                     targets: TargetSpectrum) -> RationalInterpolant:
    """Half-size solve for field-free systems with +/- paired targets.

    Odd resolvents factor through ``y = z^2``: even degree gives ``Q =
    q(z^2)``, ``P = z p(z^2)``; odd degree gives ``Q = z q(z^2)``, ``P =
    p(z^2)``.  One equation per pair solves for p and q, and the lifted
    chain has an identically zero diagonal.  J is always solved for.

    The block resolvents must themselves be odd across each pair
    (mu(-lambda) = -mu(lambda) on the paired subspaces); this is checked
    numerically and violations raise ParityMismatch.
    """
    count = targets.size
    if count == 0 or count % 2:
        raise ValueError("field-free solve needs an even number of targets")
    na = count // 2
    pos = sorted(_paired_targets(targets), key=lambda t: t.value, reverse=True)
    neg_of = {t.m: u for u in targets.targets for t in pos if u.m == -t.m}

    bits = max(precision.SOLVE_BITS, mp.mp.prec)
    cap = max(precision.MAX_SOLVE_BITS, bits)
    while True:
        with precision.bits(bits):
            mu_pos, mu_neg = [], []
            for t in pos:
                u = neg_of[t.m]
                vp, wp = _block_for(t, Cp, Cm).spectral_data()
                vn, wn = _block_for(u, Cp, Cm).spectral_data()
                mu_p = mu_from_data(vp, wp, t.value)
                mu_n = mu_from_data(vn, wn, u.value)
                odd_defect = abs(mu_p + mu_n) / max(abs(mu_p), abs(mu_n))
                if odd_defect > mp.mpf(2) ** (-mp.mp.prec // 3):
                    raise ParityMismatch(
                        "block resolvents are not odd across the pair at "
                        f"lambda = {mp.nstr(t.value, 12)}")
                mu_pos.append(mu_p)
                mu_neg.append(mu_n)

            h = na // 2
            rows, rhs = [], []
            for t, mu_v in zip(pos, mu_pos):
                lam = t.value
                y = lam * lam
                ypows = [mp.mpf(1)]
                for _ in range(h + 1):
                    ypows.append(ypows[-1] * y)
                if na % 2 == 0:
                    # J^2 p(y) * lam * mu = q(y); deg p = h-1, deg q = h
                    rows.append([lam * mu_v * ypows[j] for j in range(h)]
                                + [-ypows[j] for j in range(h)])
                    rhs.append(ypows[h])
                else:
                    # J^2 p(y) * mu = lam q(y); deg p = h, deg q = h
                    rows.append([mu_v * ypows[j] for j in range(h + 1)]
                                + [-lam * ypows[j] for j in range(h)])
                    rhs.append(lam * ypows[h])
            sol = _solve_rows(rows, rhs)
            if na % 2 == 0:
                alphas, betas = sol[:h], sol[h:]
            else:
                alphas, betas = sol[: h + 1], sol[h + 1:]
            j2 = alphas[-1]
            if j2 <= 0:
                raise NegativeJSquared(j2)
            Jval = mp.sqrt(j2)
            p_monic = [a / j2 for a in alphas]
            q_coeffs = betas + [mp.mpf(1)]
            P_cs = [mp.mpf(0)] * na
            Q_cs = [mp.mpf(0)] * (na + 1)
            if na % 2 == 0:
                for j, c in enumerate(q_coeffs):
                    Q_cs[2 * j] = c
                for j, c in enumerate(p_monic):
                    P_cs[2 * j + 1] = c
            else:
                for j, c in enumerate(q_coeffs):
                    Q_cs[2 * j + 1] = c
                for j, c in enumerate(p_monic):
                    P_cs[2 * j] = c
            P = MonicPolynomial.from_coeffs(P_cs)
            Q = MonicPolynomial.from_coeffs(Q_cs)
            residual = _full_residual(Cp, Cm, targets, P, Q, j2)
        if residual <= _residual_tol(bits) or bits >= cap:
            break
        bits *= 2
    return RationalInterpolant(P=P, Q=Q, J=Jval, solved_J=True,
                               j_squared=j2, residual=residual, bits=bits,
                               method="field-free")


# ----------------------------------------------------------------------
# Certification and reconstruction


def certify_conditions(r: RationalInterpolant, q_roots=None) -> Certificate:
    """Check the three conditions a valid extension needs.

    Real-rootedness is counted by Sturm sign variations at the Cauchy
    bound (cheap; no isolation).  When the roots of Q are already known
    they can be passed in and strict interlacing reduces to a sign
    alternation of P along them; otherwise full root isolation runs.
    """
    nonreal_q = r.Q.degree - real_root_count(r.Q)
    nonreal_p = r.P.degree - real_root_count(r.P)
    real_ok = nonreal_q == 0 and nonreal_p == 0
    j_ok = r.j_squared > 0

    witness = None
    if not real_ok:
        inter_ok = False
        witness = ("nonreal", nonreal_q, nonreal_p)
    elif q_roots is not None:
        qs = sorted(q_roots, reverse=True)
        inter_ok = True
        for i, lam in enumerate(qs):
            v = r.P(lam)
            want = 1 if i % 2 == 0 else -1
            if v == 0 or (1 if v > 0 else -1) != want:
                inter_ok = False
                witness = (lam, v)
                break
    else:
        res = check_strict_interlacing(r.Q, r.P)
        inter_ok = bool(res)
        witness = res.witness if not inter_ok else None
    return Certificate(real_roots=real_ok, j_positive=j_ok,
                       interlacing=inter_ok, nonreal_q=nonreal_q,
                       nonreal_p=nonreal_p, j_squared=r.j_squared,
                       witness=witness)


def to_spectral_weights(r: RationalInterpolant,
                        brackets=None) -> SpectralWeights:
    """Partial fractions of mu_A = P/Q: nodes and (positive) weights.

    With isolating brackets for the roots of Q (one root per bracket,
    e.g. the flanking intervals of a pinned spectrum) refinement is a
    plain bracketed Newton per root; otherwise full Sturm isolation runs.
    """
    roots = None
    if brackets is not None and len(brackets) == r.Q.degree:
        cand = refine_in_brackets(list(r.Q.coeffs), brackets)
        if all(c is not None for c in cand):
            roots = sorted(cand, reverse=True)
    if roots is None:
        rep = isolate_real_roots(r.Q)
        if rep.nonreal_count or any(m != 1 for *_, m in rep.roots):
            raise ComplexRoots(rep.nonreal_count,
                               "Q has complex or repeated roots")
        roots = sorted(rep.values, reverse=True)
    weights = []
    for i, lam in enumerate(roots):
        denom = mp.mpf(1)
        for j, other in enumerate(roots):
            if j != i:
                denom *= lam - other
        w = r.P(lam) / denom
        if w <= 0:
            raise NonPositiveWeight(lam, w)
        weights.append(w)
    return SpectralWeights(nodes=tuple(roots), weights=tuple(weights),
                           total=mp.fsum(weights))


def reconstruct_tridiagonal(w: SpectralWeights) -> TridiagonalChain:
    """Rebuild the chain from its spectral nodes and weights.

    The three-term recurrence (Lanczos on diag(nodes) started from the
    weight vector) yields the contact-first diagonal and couplings; the
    chain is stored outer end first, so the output is reversed.
    """
    alphas, betas = lanczos_jacobi(list(w.nodes), list(w.weights))
    return TridiagonalChain(couplings=tuple(reversed(betas)),
                            fields=tuple(reversed(alphas)))
