"""Choosing the controlled part of the spectrum.

Targets live on a half-integer lattice: every value is ``m * delta / 2``
for an integer ``m``, and the residue of ``m`` mod 4 is constant within a
symmetry subspace while differing by 2 across subspaces.  At ``t0 = pi /
delta`` every lattice point then picks up the same phase within its
subspace and the opposite phase in the other one, which is exactly the
perfect-transfer condition on the engineered eigenvalues.

The main entry point is :func:`pair_pinning_select`, which flanks every
eigenvalue of the two contact blocks with a pair of lattice targets.
:func:`feasibility_bands`, :func:`verify_distinct_subspace_spectra` and
:func:`transfer_time_bound` are diagnostics; :func:`round_to_pst_spectrum`
and :func:`refine_targets_factor5` are spectrum post-processors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath as mp

from .errors import EpsilonTooLarge, NoParityRepresentative, ParityMismatch
from .linalg import eigh_tridiag, lanczos_jacobi
from .network import Classification, SupportedBlock
from .spectral import coincidence_tolerance, mu_from_data

__all__ = [
    "Target",
    "TargetSpectrum",
    "Band",
    "BandReport",
    "SpectraDistinctness",
    "AlternationReport",
    "RoundedSpectrum",
    "TimeBound",
    "feasibility_bands",
    "verify_distinct_subspace_spectra",
    "pair_pinning_select",
    "check_alternation",
    "round_to_pst_spectrum",
    "refine_targets_factor5",
    "transfer_time_bound",
]


def _phase(residue: int):
    """Phase e^{-i r pi / 2} collected by a residue-r target at t0."""
    return (1, -1j, -1, 1j)[residue % 4]


def _as_fraction(v) -> Fraction:
    if isinstance(v, float) or isinstance(v, mp.mpf):
        raise TypeError("exact rational values required (int, str or Fraction)")
    return Fraction(v)


def _divisors(n: int) -> list[int]:
    """All positive divisors of n, descending."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return sorted(small + large, reverse=True)


@dataclass(frozen=True)
class Target:
    """One controlled eigenvalue.

    ``value = m * delta / 2`` when the lattice integer ``m`` is known.
    Pinned targets remember the block eigenvalue they flank
    (``pinned_to``), which side they sit on (``side`` is -1 below, +1
    above) and the open window they were selected from.
    """

    value: mp.mpf
    subspace: int
    m: int | None = None
    window: tuple | None = None
    pinned_to: mp.mpf | None = None
    side: int = 0

    @property
    def pst_index(self) -> int | None:
        """The paper-and-pencil index n with value = +/-(2n + 1/2) delta.

        Only targets on the odd lattice classes (m = 1 or 3 mod 4) have
        one; even-class targets return None.
        """
        if self.m is None:
            return None
        r = self.m % 4
        if r == 1:
            return (self.m - 1) // 4
        if r == 3:
            return (-self.m - 1) // 4
        return None


@dataclass(frozen=True, eq=False)
class TargetSpectrum:
    """A full set of controlled targets with their lattice bookkeeping.

    ``targets`` is sorted descending by value.  ``residue_plus`` /
    ``residue_minus`` are the lattice residues (mod 4) of the two
    subspaces, ``None`` when the subspace is empty.
    """

    targets: tuple[Target, ...]
    delta: mp.mpf
    residue_plus: int | None
    residue_minus: int | None
    delta_frac: Fraction | None = None
    shrink: Fraction | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        vals = [t.value for t in self.targets]
        if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
            raise ValueError("targets must be strictly descending")

    @classmethod
    def from_values(cls, lambda_plus: Iterable, lambda_minus: Iterable = ()) -> "TargetSpectrum":
        """Build a spectrum from exact rational target values.

        Accepts ints, strings and Fractions; floats are refused because
        the lattice inference needs exact arithmetic.  Picks the largest
        delta whose half-integer lattice carries every value with a
        consistent residue pattern (so t0 = pi/delta is as small as the
        values allow), and raises ParityMismatch when no lattice fits.
        """
        fp = [_as_fraction(v) for v in lambda_plus]
        fm = [_as_fraction(v) for v in lambda_minus]
        if not fp and not fm:
            raise ValueError("no target values given")
        b = math.lcm(*(f.denominator for f in fp + fm))
        entries = ([(int(f * b), +1) for f in fp]
                   + [(int(f * b), -1) for f in fm])
        g2 = math.gcd(*(2 * a for a, _ in entries))
        if g2 == 0:
            # every value is zero; only a single target can survive the
            # distinctness requirement, and any lattice carries it
            if len(entries) > 1:
                raise ValueError("duplicate target values")
            q, b = 1, 1
        else:
            for q in _divisors(g2):
                ms = [2 * a // q for a, _ in entries]
                rp = {m % 4 for m, (_, s) in zip(ms, entries) if s > 0}
                rm = {m % 4 for m, (_, s) in zip(ms, entries) if s < 0}
                if len(rp) > 1 or len(rm) > 1:
                    continue
                if rp and rm and (rm.copy().pop() - rp.copy().pop()) % 4 != 2:
                    continue
                break
            else:
                raise ParityMismatch(
                    "values do not fit a common half-integer transfer lattice")
        delta_frac = Fraction(q, b)
        delta = mp.mpf(q) / b
        targets = sorted(
            (Target(value=mp.mpf(a) / b, subspace=s, m=2 * a // q)
             for a, s in entries),
            key=lambda t: t.value, reverse=True)
        rp = {t.m % 4 for t in targets if t.subspace > 0}
        rm = {t.m % 4 for t in targets if t.subspace < 0}
        return cls(targets=tuple(targets), delta=delta,
                   residue_plus=rp.pop() if rp else None,
                   residue_minus=rm.pop() if rm else None,
                   delta_frac=delta_frac)

    @property
    def t0(self):
        return mp.pi / self.delta

    @property
    def size(self) -> int:
        return len(self.targets)

    def values(self, subspace: int | None = None) -> list:
        return [t.value for t in self.targets
                if subspace is None or t.subspace == subspace]

    @property
    def lambda_plus(self) -> list:
        return self.values(+1)

    @property
    def lambda_minus(self) -> list:
        return self.values(-1)

    def residue(self, subspace: int) -> int | None:
        return self.residue_plus if subspace > 0 else self.residue_minus

    def phase(self, subspace: int):
        r = self.residue(subspace)
        if r is None:
            raise ValueError("empty subspace has no phase")
        return _phase(r)

    def pst_parity_report(self, tol=mp.mpf("1e-25")) -> tuple[bool, mp.mpf]:
        """Check every target sits on its lattice point.

        Returns (ok, worst residual of value/delta - m/2 in delta units)
        after verifying the residue pattern: constant within a subspace,
        differing by 2 across subspaces.
        """
        worst = mp.mpf(0)
        for t in self.targets:
            if t.m is None:
                return False, mp.inf
            r_expect = self.residue(t.subspace)
            if r_expect is None or t.m % 4 != r_expect:
                return False, mp.inf
            worst = max(worst, abs(t.value / self.delta - mp.mpf(t.m) / 2))
        if self.residue_plus is not None and self.residue_minus is not None:
            if (self.residue_minus - self.residue_plus) % 4 != 2:
                return False, mp.inf
        return worst <= tol, worst

    def brackets(self) -> list[tuple] | None:
        """Flanking intervals (lo, hi), ascending, one per pinned eigenvalue.

        Each interval is spanned by a below/above target pair and brackets
        one root of the extension's characteristic polynomial.  Returns
        None unless every target is pinned and properly paired.
        """
        pairs: dict = {}
        for t in self.targets:
            if t.pinned_to is None or t.side == 0:
                return None
            key = (t.subspace, mp.nstr(t.pinned_to, 30))
            pairs.setdefault(key, {})[t.side] = t.value
        out = []
        for sides in pairs.values():
            if set(sides) != {-1, +1}:
                return None
            out.append((sides[-1], sides[+1]))
        out.sort()
        return out


# ----------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class Band:
    """One interval between adjacent block eigenvalues.

    ``lo``/``hi`` are None at the unbounded ends.  ``capacity`` is 1 for
    a same-sign band and None (unbounded) for an opposite-sign band.
    """

    lo: object
    hi: object
    sign_plus: int
    sign_minus: int

    @property
    def same_sign(self) -> bool:
        return self.sign_plus == self.sign_minus

    @property
    def capacity(self) -> int | None:
        return 1 if self.same_sign else None


@dataclass(frozen=True, eq=False)
class BandReport:
    breakpoints: tuple
    bands: tuple[Band, ...]

    def band_of(self, value) -> Band:
        for b in self.bands:
            if (b.lo is None or value > b.lo) and (b.hi is None or value < b.hi):
                return b
        raise ValueError("value coincides with a band edge")


def feasibility_bands(Cp: SupportedBlock, Cm: SupportedBlock) -> BandReport:
    """Sign bands of the two contact resolvents.

    Between consecutive eigenvalues of either block the product of the
    two contact resolvents has a fixed sign: where they agree at most one
    target fits, where they differ arbitrarily many alternating targets
    do.  Bands are reported in descending order.
    """
    vp, wp = Cp.spectral_data()
    vm, wm = Cm.spectral_data()
    merged = sorted(list(vp) + list(vm), reverse=True)
    ctol = coincidence_tolerance(merged)
    points: list = []
    for v in merged:
        if not points or abs(points[-1] - v) > ctol:
            points.append(v)
    bands = []
    edges = [None] + points + [None]
    for k in range(len(edges) - 1):
        hi, lo = edges[k], edges[k + 1]
        if hi is None:
            mid = lo + 1
        elif lo is None:
            mid = hi - 1
        else:
            mid = (hi + lo) / 2
        sp = 1 if mu_from_data(vp, wp, mid) > 0 else -1
        sm = 1 if mu_from_data(vm, wm, mid) > 0 else -1
        bands.append(Band(lo=lo, hi=hi, sign_plus=sp, sign_minus=sm))
    assert bands[0].sign_plus > 0 and bands[0].sign_minus > 0
    return BandReport(breakpoints=tuple(points), bands=tuple(bands))


@dataclass(frozen=True, eq=False)
class SpectraDistinctness:
    """Shared eigenvalues of the two blocks (dark-state diagnostic)."""

    shared: tuple
    tolerance: mp.mpf

    @property
    def ok(self) -> bool:
        return not self.shared

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        vals = ", ".join(mp.nstr(v, 12) for v in self.shared)
        return f"SharedEigenvalues[{vals}]"


def verify_distinct_subspace_spectra(Cp: SupportedBlock,
                                     Cm: SupportedBlock) -> SpectraDistinctness:
    """Report eigenvalues the two blocks have in common.

    A shared eigenvalue signals a dark state: the two flanking pairs it
    would need land in coincident windows and no admissible alternating
    selection exists.  This is a diagnostic; callers decide whether to
    proceed.
    """
    vp, _ = Cp.spectral_data()
    vm, _ = Cm.spectral_data()
    ctol = coincidence_tolerance(sorted(list(vp) + list(vm)))
    shared = []
    for a in vp:
        for b in vm:
            if abs(a - b) <= ctol:
                shared.append((a + b) / 2)
    shared.sort(reverse=True)
    return SpectraDistinctness(shared=tuple(shared), tolerance=ctol)


@dataclass(frozen=True, eq=False)
class TimeBound:
    """Speed-limit report: transfer takes at least pi over the min gap."""

    bound: object
    gap: object
    distinct_values: tuple
    warning: str | None = None


def transfer_time_bound(Cp: SupportedBlock, Cm: SupportedBlock) -> TimeBound:
    """Lower bound pi/Delta from the merged block spectra.

    Delta is the smallest gap between distinct merged eigenvalues;
    degenerate (shared) values collapse to one entry and are flagged,
    since the realized minimum gap after pinning can only be smaller.
    """
    vp, _ = Cp.spectral_data()
    vm, _ = Cm.spectral_data()
    merged = sorted(list(vp) + list(vm))
    ctol = coincidence_tolerance(merged)
    distinct: list = []
    collapsed = False
    for v in merged:
        if distinct and abs(v - distinct[-1]) <= ctol:
            collapsed = True
            continue
        distinct.append(v)
    warning = None
    if collapsed:
        warning = "shared eigenvalues collapsed; gap computed over distinct values"
    if len(distinct) < 2:
        return TimeBound(bound=None, gap=None,
                         distinct_values=tuple(distinct),
                         warning=warning or "fewer than two distinct eigenvalues")
    gap = min(distinct[i + 1] - distinct[i] for i in range(len(distinct) - 1))
    return TimeBound(bound=mp.pi / gap, gap=gap,
                     distinct_values=tuple(distinct), warning=warning)


# ----------------------------------------------------------------------
# Pair pinning


def _principal_spectrum(vals: Sequence, weights: Sequence) -> list:
    """Eigenvalues of the contact block with its contact row/column removed.

    Works on the equivalent Jacobi chain (same contact resolvent), whose
    principal submatrix is the chain minus its contact end.
    """
    if len(vals) <= 1:
        return []
    alphas, betas = lanczos_jacobi(list(vals), list(weights))
    gamma, _ = eigh_tridiag(alphas[1:], betas[1:], vectors=False)
    return gamma


def _pinning_delta(vals: Sequence, weights: Sequence):
    """min(delta_1, delta_2) for the given block spectral data.

    delta_1 is the distance from the block spectrum to the spectrum of
    its principal submatrix; delta_2 is half the smallest non-cancelling
    |lambda + gamma| over block eigenvalue pairs (exact +/- pairs are the
    symmetric structure itself, not a collision, and are skipped).
    """
    gamma = _principal_spectrum(vals, weights)
    d1 = min((abs(l - g) for l in vals for g in gamma), default=mp.inf)
    ctol = coincidence_tolerance(sorted(vals))
    d2 = min((abs(l + g) / 2 for l in vals for g in vals
              if abs(l + g) > ctol), default=mp.inf)
    d = min(d1, d2)
    if not mp.isfinite(d):
        raise ValueError("pinning scale undefined for this block")
    return d


def _flank(lam, delta, residue: int, side: int, subspace: int) -> Target:
    """The unique lattice target of the given residue flanking ``lam``.

    The window is (lam - 2 delta, lam) for side -1 and (lam, lam + 2
    delta) for side +1; in units of delta/2 it is an open interval of
    length exactly 4, so it contains one integer of each residue class
    mod 4 except when an endpoint sits on the class itself.
    """
    a = 2 * lam / delta + (-4 if side < 0 else 0)
    b = a + 4
    m = int(mp.floor((a - residue) / 4)) * 4 + residue
    while m <= a:
        m += 4
    window = ((lam - 2 * delta, lam) if side < 0 else (lam, lam + 2 * delta))
    if not (a < m < b):
        raise NoParityRepresentative(window, residue)
    if m + 4 < b:
        raise NoParityRepresentative(window, residue)
    return Target(value=m * delta / 2, subspace=subspace, m=m,
                  window=window, pinned_to=lam, side=side)


def _lattice_classes(classification: Classification | None,
                     vp: Sequence, vm: Sequence, ctol) -> tuple[int, int, bool]:
    """Residue classes (plus, minus) and whether to mirror-emit.

    Field-free bipartite systems need even classes when the spectra are
    not +/- mirrored across the subspaces (each subspace then holds its
    own +/- pairs, which forces m = -m mod 4); the block containing the
    zero eigenvalue must take class 2, because the class-0 window at zero
    is empty.  Everything else uses the half-integer classes (1, 3).
    """
    ff = (classification is not None and classification.field_free
          and classification.bipartite)
    if not ff:
        return 1, 3, False
    if classification.even:
        return 1, 3, True
    zp = any(abs(v) <= ctol for v in vp)
    zm = any(abs(v) <= ctol for v in vm)
    if zm and not zp:
        return 0, 2, False
    return 2, 0, False


def pair_pinning_select(Cp: SupportedBlock, Cm: SupportedBlock,
                        shrink: Fraction = Fraction(1, 2), *,
                        classification: Classification | None = None) -> TargetSpectrum:
    """Flank every block eigenvalue with a pair of lattice targets.

    The pinning width ``delta`` is ``shrink * min(delta_1, delta_2)`` of
    the symmetric block; each eigenvalue of each block receives one
    target just below and one just above, both in that block's subspace.
    With shrink <= 1/2 the windows of distinct eigenvalues are disjoint,
    so the merged resolvent signs alternate by construction.

    For mirror-even systems only the symmetric block is pinned directly;
    the antisymmetric targets are its exact negation, which keeps the
    integer bookkeeping of the two subspaces in perfect +/- pairs.
    """
    if not 0 < shrink <= Fraction(1, 2):
        raise ValueError("shrink must lie in (0, 1/2]")
    vp, wp = Cp.spectral_data()
    vm, wm = Cm.spectral_data()
    if not vp or not vm:
        raise ValueError("both blocks must be nonempty")
    ctol = coincidence_tolerance(sorted(list(vp) + list(vm)))
    r_plus, r_minus, mirror = _lattice_classes(classification, vp, vm, ctol)
    delta = mp.mpf(shrink.numerator) / shrink.denominator * _pinning_delta(vp, wp)

    targets: list[Target] = []
    for lam in vp:
        targets.append(_flank(lam, delta, r_plus, -1, +1))
        targets.append(_flank(lam, delta, r_plus, +1, +1))
    if mirror:
        mism = max(abs(a + b) for a, b in zip(sorted(vp), sorted(vm, reverse=True)))
        if len(vp) != len(vm) or mism > ctol:
            raise ParityMismatch(
                "mirror-even classification but block spectra are not +/- images")
        for t in list(targets):
            targets.append(Target(value=-t.value, subspace=-1, m=-t.m,
                                  window=(-t.window[1], -t.window[0]),
                                  pinned_to=-t.pinned_to, side=-t.side))
    else:
        for lam in vm:
            targets.append(_flank(lam, delta, r_minus, -1, -1))
            targets.append(_flank(lam, delta, r_minus, +1, -1))

    targets.sort(key=lambda t: t.value, reverse=True)
    for t1, t2 in zip(targets, targets[1:]):
        if t1.m == t2.m:
            raise NoParityRepresentative(t1.window, t1.m % 4)
    return TargetSpectrum(targets=tuple(targets), delta=delta,
                          residue_plus=r_plus % 4, residue_minus=r_minus % 4,
                          shrink=shrink)


@dataclass(frozen=True, eq=False)
class AlternationReport:
    """Signs of the contact resolvents along the merged target list."""

    signs: tuple
    ok: bool
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_alternation(spectrum: TargetSpectrum, Cp: SupportedBlock,
                      Cm: SupportedBlock) -> AlternationReport:
    """Verify the sign pattern +, -, +, ... down the merged target list.

    Each target is evaluated against its own subspace's contact
    resolvent.  Pinned spectra satisfy this by construction; manually
    chosen spectra may not, and a violation here predicts an interlacing
    failure downstream.
    """
    data = {+1: Cp.spectral_data(), -1: Cm.spectral_data()}
    signs = []
    for t in spectrum.targets:
        vals, weights = data[t.subspace]
        signs.append(1 if mu_from_data(vals, weights, t.value) > 0 else -1)
    witness = None
    for k, s in enumerate(signs):
        if s != (1 if k % 2 == 0 else -1):
            witness = k
            break
    return AlternationReport(signs=tuple(signs), ok=witness is None,
                             witness=witness)


# ----------------------------------------------------------------------
# Spectrum post-processing


@dataclass(frozen=True, eq=False)
class RoundedSpectrum:
    values: tuple
    integers: tuple[int, ...]
    epsilon: mp.mpf


def round_to_pst_spectrum(eigs: Sequence, epsilon) -> RoundedSpectrum:
    """Round a descending spectrum onto an alternating-parity lattice.

    The n-th value (n = 1 at the top) moves to epsilon times the nearest
    integer of parity (-1)^(n+1); this needs 2 epsilon below the minimum
    gap so neighbouring values cannot swap or collide.  The output is
    within epsilon of the input elementwise.
    """
    epsilon = mp.mpf(epsilon)
    vals = [mp.mpf(v) for v in eigs]
    if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
        raise ValueError("eigenvalues must be strictly descending")
    if len(vals) > 1:
        min_gap = min(vals[i] - vals[i + 1] for i in range(len(vals) - 1))
        if 2 * epsilon >= min_gap:
            raise EpsilonTooLarge(epsilon, min_gap)
    integers = []
    for n, v in enumerate(vals, start=1):
        want_even = n % 2 == 1
        x = v / epsilon
        best = None
        k = int(mp.floor(x - 1))
        for cand in range(k - 1, k + 4):
            if (cand % 2 == 0) != want_even or abs(x - cand) > 1:
                continue
            if best is None or abs(x - cand) < abs(x - best) or (
                    abs(x - cand) == abs(x - best) and cand > best):
                best = cand
        assert best is not None
        integers.append(best)
    return RoundedSpectrum(values=tuple(epsilon * n for n in integers),
                           integers=tuple(integers), epsilon=epsilon)


def _val5(n: int) -> int:
    if n == 0:
        return 10 ** 6
    v = 0
    while n % 5 == 0:
        n //= 5
        v += 1
    return v


def refine_targets_factor5(spectrum: TargetSpectrum,
                           choices: Mapping[int, Iterable[int]]) -> TargetSpectrum:
    """Re-index well-separated targets to maximize factors of 5.

    ``choices`` maps a target's position in the merged list to the
    admissible alternative indices n (in the +/-(2n + 1/2) delta form).
    Among the admissible ones — the current index always included — the
    index with the largest 5-adic valuation wins, ties going to the one
    nearest the current index.  Targets whose index carries a factor of
    5^k also satisfy the transfer condition at pi / (5^k delta).
    """
    targets = list(spectrum.targets)
    notes = list(spectrum.notes)
    for idx, ns in choices.items():
        t = targets[idx]
        n_cur = t.pst_index
        if n_cur is None:
            raise ValueError(f"target {idx} is not on a half-integer class")
        cands = {n_cur}
        for n in ns:
            m = 4 * n + 1 if t.m % 4 == 1 else -(4 * n + 1)
            value = m * spectrum.delta / 2
            if t.window is not None and not (t.window[0] < value < t.window[1]):
                raise ValueError(
                    f"alternative index {n} leaves the window of target {idx}")
            cands.add(n)
        best = max(cands, key=lambda n: (_val5(n), -abs(n - n_cur)))
        if best != n_cur:
            m = 4 * best + 1 if t.m % 4 == 1 else -(4 * best + 1)
            targets[idx] = replace(t, value=m * spectrum.delta / 2, m=m)
    targets.sort(key=lambda t: t.value, reverse=True)
    vals5 = [_val5(t.pst_index) for t in targets if t.pst_index is not None]
    finite = [v for v in vals5 if v < 10 ** 6]
    k = min(finite) if finite else 0
    if k > 0:
        notes.append(
            f"all indices carry a factor 5^{k}: the transfer condition also "
            f"holds at t = pi/(5^{k} delta)")
    return replace(spectrum, targets=tuple(targets), notes=tuple(notes))
