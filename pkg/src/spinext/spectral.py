"""Characteristic polynomials, resolvent functions, and real-root machinery.

Everything here is real-coefficient polynomial work at the ambient mpmath
precision: monic characteristic polynomials of symmetric matrices, the
diagonal resolvent element mu(z) = <1|(zI-M)^-1|1> evaluated stably from
spectral data, Sturm-sequence root isolation with bisection refinement
(no companion matrices), sign-band profiles, and the strict-interlacing
test that underpins tridiagonal reconstructibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from . import linalg
from .errors import CoincidentRoots, ComplexRoots, DimensionTooSmall, PoleAt

__all__ = [
    "MonicPolynomial",
    "SignBandProfile",
    "RootReport",
    "char_poly",
    "principal_char_poly",
    "mu",
    "mu_from_data",
    "sign_bands",
    "real_root_count",
    "isolate_real_roots",
    "refine_in_brackets",
    "check_strict_interlacing",
    "verify_identity_eq1",
    "coincidence_tolerance",
]


# ----------------------------------------------------------------------
# Plain coefficient-list helpers (ascending order)


def poly_trim(cs: list) -> list:
    while len(cs) > 1 and cs[-1] == 0:
        cs = cs[:-1]
    return cs


def poly_eval(cs, z):
    acc = mp.mpf(0)
    for c in reversed(cs):
        acc = acc * z + c
    return acc


def poly_derivative(cs) -> list:
    if len(cs) <= 1:
        return [mp.mpf(0)]
    return [i * cs[i] for i in range(1, len(cs))]


def poly_mul(a, b) -> list:
    out = [mp.mpf(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def poly_divmod(num, den) -> tuple[list, list]:
    num = [mp.mpf(x) for x in num]
    den = poly_trim([mp.mpf(x) for x in den])
    q = [mp.mpf(0)] * max(1, len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        f = num[k + len(den) - 1] / lead
        q[k] = f
        if f != 0:
            for i, d in enumerate(den):
                num[k + i] -= f * d
    rem = poly_trim(num[: len(den) - 1] or [mp.mpf(0)])
    return poly_trim(q), rem


def poly_from_roots(roots) -> list:
    cs = [mp.mpf(1)]
    for r in roots:
        cs = poly_mul(cs, [-mp.mpf(r), mp.mpf(1)])
    return cs


def _normalize(cs, tol_rel) -> list:
    m = max(abs(c) for c in cs)
    if m == 0:
        return [mp.mpf(0)]
    cs = [c / m for c in cs]
    cs = [c if abs(c) > tol_rel else mp.mpf(0) for c in cs]
    return poly_trim(cs)


def cauchy_bound(cs) -> mp.mpf:
    lead = cs[-1]
    return 1 + max(abs(c / lead) for c in cs[:-1]) if len(cs) > 1 else mp.mpf(1)


# ----------------------------------------------------------------------
# Types


@dataclass(frozen=True, eq=False)
class MonicPolynomial:
    """Real polynomial with leading coefficient exactly 1, ascending coeffs."""

    coeffs: tuple
    precision: int

    @classmethod
    def from_coeffs(cls, cs) -> "MonicPolynomial":
        cs = poly_trim([mp.mpf(c) for c in cs])
        lead = cs[-1]
        if lead == 0:
            raise ValueError("zero polynomial is not monic")
        if lead != 1:
            cs = [c / lead for c in cs]
        cs[-1] = mp.mpf(1)
        return cls(tuple(cs), mp.mp.prec)

    @classmethod
    def from_roots(cls, roots) -> "MonicPolynomial":
        return cls.from_coeffs(poly_from_roots(roots))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return poly_eval(self.coeffs, z)

    def derivative(self) -> list:
        return poly_derivative(list(self.coeffs))

    def __repr__(self):
        return f"MonicPolynomial(degree={self.degree})"


@dataclass(frozen=True, eq=False)
class SignBandProfile:
    """Sign-change positions of a rational P/Q, descending, + at z -> +inf.

    Each breakpoint is (position, source) with source "Q" (pole) or "P"
    (zero); the sign of P/Q alternates across consecutive breakpoints.
    """

    breakpoints: tuple
    initial_sign: int = 1

    def sign_at(self, z) -> int:
        s = self.initial_sign
        for pos, _src in self.breakpoints:
            if z > pos:
                return s
            s = -s
        return s


@dataclass(frozen=True, eq=False)
class RootReport:
    """Real roots with isolating brackets and multiplicities."""

    roots: tuple          # of (lo, hi, root, multiplicity)
    nonreal_count: int

    @property
    def values(self) -> list:
        return [r for _, _, r, _ in self.roots]

    @property
    def real_count(self) -> int:
        return sum(m for _, _, _, m in self.roots)


# ----------------------------------------------------------------------
# Characteristic polynomials


def char_poly(M: mp.matrix) -> MonicPolynomial:
    """Monic characteristic polynomial det(zI - M) of a symmetric matrix."""
    if M.rows == 0:
        return MonicPolynomial.from_coeffs([1])
    if linalg.is_tridiagonal(M):
        d, e = linalg.tridiag_bands(M)
    else:
        d, e = linalg.householder_tridiag(M)
    return MonicPolynomial.from_coeffs(linalg.charpoly_tridiag_coeffs(d, e))


def principal_char_poly(M: mp.matrix) -> MonicPolynomial:
    """char_poly of M with its first row and column removed."""
    n = M.rows
    if n == 0:
        raise DimensionTooSmall("cannot take a principal submatrix of a 0x0 matrix")
    if n == 1:
        return MonicPolynomial.from_coeffs([1])
    sub = mp.matrix(n - 1, n - 1)
    for i in range(1, n):
        for j in range(1, n):
            sub[i - 1, j - 1] = M[i, j]
    return char_poly(sub)


# ----------------------------------------------------------------------
# mu functions


def mu_from_data(nodes, weights, z):
    """Resolvent diagonal sum_i w_i/(z - lambda_i); raises PoleAt near a node."""
    z = mp.mpf(z)
    scale = max(max((abs(x) for x in nodes), default=mp.mpf(0)), abs(z), mp.mpf(1))
    tol = scale * mp.mpf(2) ** (-mp.mp.prec + 16)
    for lam in nodes:
        if abs(z - lam) <= tol:
            raise PoleAt(z, lam)
    return mp.fsum(w / (z - lam) for w, lam in zip(weights, nodes))


def mu(M: mp.matrix, z):
    """mu_M(z) = <1|(zI - M)^-1|1>, evaluated by spectral expansion."""
    vals, Q = linalg.eigh(M)
    weights = [Q[0, j] ** 2 for j in range(len(vals))]
    return mu_from_data(vals, weights, z)


# ----------------------------------------------------------------------
# Root isolation


def _sturm_chain(cs, tol_rel):
    chain = [_normalize(cs, tol_rel)]
    d = poly_derivative(chain[0])
    if poly_trim(d) != [mp.mpf(0)]:
        chain.append(_normalize(d, tol_rel))
        while len(chain[-1]) > 1:
            _, r = poly_divmod(chain[-2], chain[-1])
            # operands are max-normalized, so a remainder this small is
            # roundoff around an exact zero (a shared factor)
            if max(abs(x) for x in r) <= tol_rel:
                break
            chain.append(_normalize([-x for x in r], tol_rel))
    return chain


def _variations(chain, x) -> int:
    count, prev = 0, 0
    for cs in chain:
        v = poly_eval(cs, x)
        s = 1 if v > 0 else (-1 if v < 0 else 0)
        if s == 0:
            continue
        if prev != 0 and s != prev:
            count += 1
        prev = s
    return count


def _split_point(fac, a, b):
    """Bisection point that is not an exact root (Sturm counts need a sign)."""
    m = (a + b) / 2
    step = (b - a) * mp.mpf("0.0137")
    for _ in range(80):
        if poly_eval(fac, m) != 0:
            return m
        m += step
    return m


def _bisect_sign(cs, lo, hi, flo):
    tol = mp.mpf(2) ** (-mp.mp.prec + 4)
    for _ in range(mp.mp.prec + 40):
        mid = (lo + hi) / 2
        fm = poly_eval(cs, mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1, abs(lo), abs(hi)):
            break
    return (lo + hi) / 2


def _refine_root(cs, dcs, lo, hi):
    """Newton polish safeguarded by a sign-change bracket."""
    flo = poly_eval(cs, lo)
    fhi = poly_eval(cs, hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        return None
    x = (lo + hi) / 2
    tol = mp.mpf(2) ** (-mp.mp.prec + 4)
    for _ in range(mp.mp.prec + 60):
        f = poly_eval(cs, x)
        if f == 0:
            return x
        if (f > 0) == (flo > 0):
            lo = x
        else:
            hi = x
        df = poly_eval(dcs, x)
        xn = x - f / df if df != 0 else None
        if xn is None or not (lo < xn < hi):
            xn = (lo + hi) / 2
        if abs(xn - x) <= tol * max(1, abs(xn)):
            return xn
        x = xn
    return x


def _squarefree_factors(cs, tol_rel) -> list[tuple[list, int]]:
    """Yun decomposition [(factor, multiplicity)]; factors squarefree."""
    p = _normalize(cs, tol_rel)
    dp = poly_derivative(p)
    g = _poly_gcd(p, dp, tol_rel)
    if len(g) == 1:
        return [(p, 1)]
    out = []
    w, _ = poly_divmod(p, g)
    k = 1
    while len(w) > 1:
        wn = _poly_gcd(w, g, tol_rel)
        f, _ = poly_divmod(w, wn)
        if len(f) > 1:
            out.append((f, k))
        g2, _ = poly_divmod(g, wn)
        w, g = wn, g2
        k += 1
        if k > len(cs):
            break
    return out


def _poly_gcd(a, b, tol_rel) -> list:
    a = _normalize(a, tol_rel)
    b = _normalize(b, tol_rel)
    if b == [mp.mpf(0)]:
        return a
    while True:
        _, r = poly_divmod(a, b)
        if max(abs(x) for x in r) <= tol_rel:
            return b
        a, b = b, _normalize(r, tol_rel)
        if len(b) == 1:
            return [mp.mpf(1)]


def real_root_count(p: MonicPolynomial | list) -> int:
    """Number of distinct real roots, by Sturm counts at the Cauchy bound.

    Much cheaper than full isolation; repeated roots count once.
    """
    cs = list(p.coeffs) if isinstance(p, MonicPolynomial) else poly_trim([mp.mpf(c) for c in p])
    if len(cs) <= 1:
        return 0
    tol_rel = mp.mpf(2) ** (-mp.mp.prec + 24)
    chain = _sturm_chain(cs, tol_rel)
    bound = cauchy_bound(cs) + 1
    return _variations(chain, -bound) - _variations(chain, bound)


def isolate_real_roots(p: MonicPolynomial | list) -> RootReport:
    """All real roots with isolating brackets, bisection-refined.

    Multiple roots are handled by squarefree (Yun) factorization; the
    count of non-real roots is reported as degree minus the real count.
    """
    cs = list(p.coeffs) if isinstance(p, MonicPolynomial) else poly_trim([mp.mpf(c) for c in p])
    tol_rel = mp.mpf(2) ** (-mp.mp.prec + 24)
    if len(cs) == 1:
        return RootReport((), 0)
    found: list[tuple] = []
    for fac, mult in _squarefree_factors(cs, tol_rel):
        chain = _sturm_chain(fac, tol_rel)
        bound = cauchy_bound(fac) + 1
        lo, hi = -bound, bound
        total = _variations(chain, lo) - _variations(chain, hi)
        work = [(lo, hi, total)]
        dfac = poly_derivative(fac)
        while work:
            a, b, cnt = work.pop()
            if cnt == 0:
                continue
            if cnt == 1:
                r = _refine_root(fac, dfac, a, b)
                if r is None:
                    if b - a <= mp.mpf(2) ** (-mp.mp.prec + 8) * max(1, abs(a), abs(b)):
                        # Sturm count insists on a root with no sign change
                        # (even multiplicity that survived deflation)
                        found.append((a, b, (a + b) / 2, mult))
                        continue
                    m = _split_point(fac, a, b)
                    ca = _variations(chain, a) - _variations(chain, m)
                    work.append((a, m, ca))
                    work.append((m, b, cnt - ca))
                    continue
                found.append((a, b, r, mult))
                continue
            m = _split_point(fac, a, b)
            ca = _variations(chain, a) - _variations(chain, m)
            work.append((a, m, ca))
            work.append((m, b, cnt - ca))
    found.sort(key=lambda t: t[2])
    deg = len(cs) - 1
    return RootReport(tuple(found), deg - sum(m for *_ , m in found))


def refine_in_brackets(p: MonicPolynomial | list, brackets) -> list:
    """Refine one simple root inside each (lo, hi) sign-change bracket.

    Fast path for callers that already know where the roots are (pinning
    windows); returns the refined roots in bracket order, or None entries
    where the bracket shows no sign change.
    """
    cs = list(p.coeffs) if isinstance(p, MonicPolynomial) else [mp.mpf(c) for c in p]
    dcs = poly_derivative(cs)
    return [_refine_root(cs, dcs, mp.mpf(lo), mp.mpf(hi)) for lo, hi in brackets]


def coincidence_tolerance(values) -> mp.mpf:
    """Shared-root tolerance: 1e-10 of the mean adjacent gap (scale fallback)."""
    vs = sorted(values)
    gaps = [vs[i + 1] - vs[i] for i in range(len(vs) - 1)]
    gaps = [g for g in gaps if g > 0]
    if gaps:
        return mp.mpf("1e-10") * (mp.fsum(gaps) / len(gaps))
    scale = max((abs(v) for v in vs), default=mp.mpf(1))
    return mp.mpf("1e-10") * max(scale, mp.mpf(1))


# ----------------------------------------------------------------------
# Sign bands


def sign_bands(Q: MonicPolynomial, P: MonicPolynomial) -> SignBandProfile:
    """Descending sign-change positions of P/Q with source tags.

    Every root must be real (ComplexRoots otherwise); a P-root colliding
    with a Q-root within the coincidence tolerance is a support failure
    (CoincidentRoots), as is a repeated root on either side.
    """
    rq = isolate_real_roots(Q)
    rp = isolate_real_roots(P)
    nonreal = rq.nonreal_count + rp.nonreal_count
    if nonreal:
        raise ComplexRoots(nonreal)
    tagged = [(r, "Q") for r in rq.values] + [(r, "P") for r in rp.values]
    tagged.sort(key=lambda t: t[0])
    tol = coincidence_tolerance([r for r, _ in tagged])
    for (_, _, _, m) in list(rq.roots) + list(rp.roots):
        if m > 1:
            raise CoincidentRoots(None, None)
    for (r1, s1), (r2, s2) in zip(tagged, tagged[1:]):
        if s1 != s2 and abs(r2 - r1) <= tol:
            raise CoincidentRoots(r1, r2)
    return SignBandProfile(tuple(reversed(tagged)), 1)


# ----------------------------------------------------------------------
# Interlacing


@dataclass(frozen=True)
class InterlacingResult:
    ok: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_strict_interlacing(Q: MonicPolynomial, P: MonicPolynomial) -> InterlacingResult:
    """True iff each open gap between consecutive Q-roots holds exactly one P-root.

    All roots must be real and simple and no P-root may coincide with a
    Q-root; on failure the witness is the offending gap (or root pair).
    """
    if P.degree != Q.degree - 1:
        return InterlacingResult(False, None, "degree mismatch")
    rq = isolate_real_roots(Q)
    rp = isolate_real_roots(P)
    if rq.nonreal_count or rp.nonreal_count:
        return InterlacingResult(False, None,
                                 f"{rq.nonreal_count + rp.nonreal_count} non-real roots")
    if any(m > 1 for *_, m in rq.roots) or any(m > 1 for *_, m in rp.roots):
        return InterlacingResult(False, None, "repeated root")
    qr, pr = rq.values, rp.values
    tol = coincidence_tolerance(qr + pr)
    for q in qr:
        for p in pr:
            if abs(q - p) <= tol:
                return InterlacingResult(False, (q, p), "coincident roots")
    for i in range(len(qr) - 1):
        inside = [p for p in pr if qr[i] < p < qr[i + 1]]
        if len(inside) != 1:
            return InterlacingResult(False, (qr[i], qr[i + 1]),
                                     f"gap holds {len(inside)} P-roots")
    return InterlacingResult(True)


# ----------------------------------------------------------------------
# The block-decomposition identity


def _chain_to_matrix(A):
    """Accept an mp.matrix or a chain-like object (couplings outer-first,
    contact at the last index)."""
    if isinstance(A, mp.matrix):
        return A
    cs = [mp.mpf(c) for c in A.couplings]
    fs = [mp.mpf(f) for f in A.fields]
    n = len(fs)
    M = mp.matrix(n, n)
    for i, f in enumerate(fs):
        M[i, i] = f
    for i, c in enumerate(cs):
        M[i, i + 1] = M[i + 1, i] = c
    return M


def verify_identity_eq1(A, C: mp.matrix, J, z_samples) -> mp.mpf:
    """Max relative residual of Q_H = Q_A*Q_C - J^2*P_A*P_C over the samples.

    H is the block matrix coupling the last index of A to the first index
    of C with strength J.  P here is the characteristic polynomial of the
    matrix with the *contact* row and column removed, i.e. the principal
    submatrix as seen from the joint.
    """
    Am = _chain_to_matrix(A)
    nA, nC = Am.rows, C.rows
    if nA == 0 or nC == 0:
        raise ValueError("both blocks must be nonempty")
    J = mp.mpf(J)
    H = mp.matrix(nA + nC, nA + nC)
    for i in range(nA):
        for j in range(nA):
            H[i, j] = Am[i, j]
    for i in range(nC):
        for j in range(nC):
            H[nA + i, nA + j] = C[i, j]
    H[nA - 1, nA] = H[nA, nA - 1] = J

    # A's contact is its last index: flip so the standard first-index
    # principal polynomial is the one facing the joint.
    Aflip = mp.matrix(nA, nA)
    for i in range(nA):
        for j in range(nA):
            Aflip[i, j] = Am[nA - 1 - i, nA - 1 - j]
    QH = char_poly(H)
    QA, PA = char_poly(Aflip), principal_char_poly(Aflip)
    QC, PC = char_poly(C), principal_char_poly(C)
    worst = mp.mpf(0)
    for z in z_samples:
        z = mp.mpf(z)
        lhs = QH(z)
        rhs = QA(z) * QC(z) - J * J * PA(z) * PC(z)
        scale = max(mp.mpf(1), abs(lhs), abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
