"""Full-system assembly and encoded-transfer verification.

Joins a solved extension chain onto both sides of the symmetrized
central system, splits the assembled spectrum into controlled and
uncontrolled parts, builds the encoded input space (the null space of
the uncontrolled eigenvectors restricted to the encoding region), and
checks the transfer by explicit time evolution.  The state-creation
analysis lives here too: singular values of the restricted propagator,
optimal inputs for target states, a Cauchy-determinant rank check, and
the multi-excitation GHZ fidelity formula.

Global index layout of every assembled system::

    [0 .. N_A-1]                 left extension, outer end first
    [N_A .. N_A+dim-1]           central system, its own vertex order
    [N_A+dim .. 2*N_A+dim-1]     right extension, contact end first

so the encoding region "the first N_A (or N_A+1) sites" is exactly the
left extension (plus, in the +1 case, the central system's first
vertex).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp

from . import linalg
from .errors import EmptyNullSpace
from .inverse import RationalInterpolant, TridiagonalChain
from .network import SupportedBlock, SymmetrizedSystem
from .selector import TargetSpectrum
from .spectral import MonicPolynomial, poly_from_roots

__all__ = [
    "TransferDesign",
    "FidelityReport",
    "CreationMap",
    "SubspaceRank",
    "CreationRankReport",
    "mirror_permutation",
    "assemble",
    "subspace_hamiltonian",
    "classify_spectrum",
    "encoding_vectors",
    "build_design",
    "encoded_transfer_fidelity",
    "containment_residuals",
    "state_creation_map",
    "creation_rank_check",
    "ghz_fidelity",
]


# ----------------------------------------------------------------------
# Assembly


def mirror_permutation(n_ext: int, sys_: SymmetrizedSystem) -> tuple[int, ...]:
    """The assembled system's mirror: extensions swap end-for-end, the
    centre maps through its own involution."""
    total = 2 * n_ext + sys_.dim
    out = [0] * total
    for i in range(n_ext):
        out[i] = total - 1 - i
        out[total - 1 - i] = i
    for v in range(sys_.dim):
        out[n_ext + v] = n_ext + sys_.S[v]
    return tuple(out)


def assemble(A: TridiagonalChain, sys_: SymmetrizedSystem, J) -> mp.matrix:
    """Build the full Hamiltonian: mirrored chain copies around the centre.

    The left block is ``A`` as stored (contact at its last index), the
    right block is its reversal, and ``J`` couples each contact to the
    input vertex respectively its mirror image.  An empty chain returns
    the central matrix itself.
    """
    n_ext, dim = A.n, sys_.dim
    if n_ext == 0:
        return mp.matrix(sys_.C)
    total = 2 * n_ext + dim
    H = mp.matrix(total, total)
    left = A.matrix()
    right = A.reversed().matrix()
    for i in range(n_ext):
        for j in range(n_ext):
            H[i, j] = left[i, j]
            H[n_ext + dim + i, n_ext + dim + j] = right[i, j]
    for i in range(dim):
        for j in range(dim):
            H[n_ext + i, n_ext + j] = sys_.C[i, j]
    J = mp.mpf(J)
    cin = sys_.net.input
    H[n_ext - 1, n_ext + cin] = H[n_ext + cin, n_ext - 1] = J
    cmir = sys_.S[cin]
    H[n_ext + dim, n_ext + cmir] = H[n_ext + cmir, n_ext + dim] = J
    return H


def subspace_hamiltonian(A: TridiagonalChain, block: SupportedBlock, J) -> mp.matrix:
    """One symmetry sector's effective matrix: chain + J + reduced block.

    The coupling row is ``J`` times the block's contact vector, so this
    works for reduced blocks whose contact is spread over several basis
    directions.  Stacking both sectors gives the effective system whose
    spectrum contains every controlled target.
    """
    n_ext, d = A.n, block.dim
    H = mp.matrix(n_ext + d, n_ext + d)
    left = A.matrix()
    for i in range(n_ext):
        for j in range(n_ext):
            H[i, j] = left[i, j]
    for i in range(d):
        for j in range(d):
            H[n_ext + i, n_ext + j] = block.matrix[i, j]
    J = mp.mpf(J)
    for i in range(d):
        c = J * block.contact[i]
        H[n_ext - 1, n_ext + i] = H[n_ext + i, n_ext - 1] = c
    return H


# ----------------------------------------------------------------------
# Spectrum split and encoding


def classify_spectrum(eigenvalues: Sequence, spectrum: TargetSpectrum,
                      tol=None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Match every target to its own eigenvalue of the assembled system.

    Returns (controlled, uncontrolled) index tuples into ``eigenvalues``;
    ``controlled`` is aligned with ``spectrum.targets``.  Raises
    ValueError when a target has no eigenvalue within ``tol`` or two
    targets claim the same one — both mean the design is inconsistent.
    """
    vals = list(eigenvalues)
    if tol is None:
        scale = max(max((abs(v) for v in vals), default=mp.mpf(1)), mp.mpf(1))
        tol = scale * mp.mpf(2) ** (-mp.mp.prec // 2)
    taken: dict[int, int] = {}
    controlled = []
    for k, t in enumerate(spectrum.targets):
        best = min(range(len(vals)), key=lambda i: abs(vals[i] - t.value))
        if abs(vals[best] - t.value) > tol:
            raise ValueError(
                f"target {t.value} missing from the assembled spectrum "
                f"(nearest eigenvalue off by {abs(vals[best] - t.value)})")
        if best in taken:
            raise ValueError(
                f"targets {spectrum.targets[taken[best]].value} and {t.value} "
                "match the same eigenvalue")
        taken[best] = k
        controlled.append(best)
    uncontrolled = tuple(i for i in range(len(vals)) if i not in taken)
    return tuple(controlled), uncontrolled


def encoding_vectors(uncontrolled: Sequence[Sequence], region_size: int,
                     dim: int | None = None, tol=None) -> list[list]:
    """Orthonormal basis of inputs the uncontrolled eigenvectors cannot see.

    ``uncontrolled`` holds full eigenvectors (any vectors of equal
    length); each is restricted to its first ``region_size`` components
    and the joint null space of those restrictions is returned,
    zero-padded back to ``dim`` (default: the vectors' length).  Vectors
    whose restriction is numerically zero impose no constraint; if the
    remaining constraints fill the region, EmptyNullSpace is raised with
    the offender count.
    """
    rows = [list(v) for v in uncontrolled]
    if dim is None:
        dim = len(rows[0]) if rows else region_size
    if tol is None:
        tol = mp.mpf(2) ** (-mp.mp.prec // 2)
    restricted = []
    for v in rows:
        r = [mp.mpf(x) for x in v[:region_size]]
        if mp.sqrt(mp.fsum(x * x for x in r)) > tol:
            restricted.append(r)
    if restricted:
        # the rows may be linearly dependent (degenerate eigenvalues can
        # mix an invisible direction into visible ones), so emptiness is
        # decided by the null space itself, not the row count
        basis = linalg.nullspace(restricted)
        if not basis:
            raise EmptyNullSpace(region_size, len(restricted))
    else:
        basis = [[mp.mpf(1) if i == j else mp.mpf(0) for i in range(region_size)]
                 for j in range(region_size)]
    return [b + [mp.mpf(0)] * (dim - region_size) for b in basis]


# ----------------------------------------------------------------------
# The design object


@dataclass(frozen=True, eq=False)
class TransferDesign:
    """Everything the verification and reporting paths need in one place.

    ``eigenvalues``/``eigenvectors`` are the full eigen-decomposition of
    ``H`` (ascending, orthonormal columns); ``controlled`` aligns with
    ``spectrum.targets`` and ``uncontrolled`` is the complement.  The
    encode vectors live on the first ``region_size`` global indices and
    the decode vectors are their mirror images.
    """

    H: mp.matrix
    t0: mp.mpf
    spectrum: TargetSpectrum
    chain: TridiagonalChain
    J: mp.mpf
    system: SymmetrizedSystem
    block_plus: SupportedBlock | None
    block_minus: SupportedBlock | None
    eigenvalues: list
    eigenvectors: mp.matrix
    controlled: tuple[int, ...]
    uncontrolled: tuple[int, ...]
    encode: list[list]
    region_size: int
    mirror: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.H.rows

    @property
    def n_ext(self) -> int:
        return self.chain.n

    @property
    def decode(self) -> list[list]:
        out = []
        for v in self.encode:
            w = [mp.mpf(0)] * self.dim
            for i, x in enumerate(v):
                w[self.mirror[i]] = x
            out.append(w)
        return out

    def block(self, sign: int) -> SupportedBlock | None:
        return self.block_plus if sign > 0 else self.block_minus

    def uncontrolled_parity(self, index: int):
        """<v|S_H|v> for one uncontrolled eigenvector: +-1 when the
        vector has definite mirror parity."""
        n = self.dim
        Q = self.eigenvectors
        return mp.fsum(Q[self.mirror[i], index] * Q[i, index] for i in range(n))


def _purify_parity(vals: list, Q: mp.matrix, mirror: Sequence[int]) -> None:
    """Give degenerate eigenvectors definite mirror parity, in place.

    Within an exactly (or numerically) repeated eigenvalue the solver
    returns an arbitrary basis; projecting onto v +- mirror(v) and
    re-orthonormalizing restores the parity split the rest of the
    analysis relies on.  Non-degenerate eigenvectors are left alone.
    """
    n = len(vals)
    scale = max(max((abs(v) for v in vals), default=mp.mpf(1)), mp.mpf(1))
    ctol = scale * mp.mpf(2) ** (-(3 * mp.mp.prec) // 4)
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= ctol:
            j += 1
        if j - i > 1:
            cols = [[Q[r, k] for r in range(n)] for k in range(i, j)]
            plus, minus = [], []
            for v in cols:
                sv = [v[mirror[r]] for r in range(n)]
                plus.append([a + b for a, b in zip(v, sv)])
                minus.append([a - b for a, b in zip(v, sv)])
            basis = linalg.gram_schmidt(plus) + linalg.gram_schmidt(minus)
            if len(basis) == j - i:
                for k, b in enumerate(basis):
                    for r in range(n):
                        Q[r, i + k] = b[r]
        i = j


def build_design(A: TridiagonalChain, sys_: SymmetrizedSystem, J,
                 spectrum: TargetSpectrum, region_size: int | None = None,
                 blocks: tuple[SupportedBlock, SupportedBlock] | None = None,
                 ) -> TransferDesign:
    """Assemble, eigendecompose, classify, and encode.

    ``region_size`` defaults to the extension length; when the null
    space there is empty it retries once with one extra site (the
    centre's first vertex joins the region).  An explicit region size is
    used as-is.
    """
    H = assemble(A, sys_, J)
    mirror = mirror_permutation(A.n, sys_)
    vals, Q = linalg.eigh(H)
    _purify_parity(vals, Q, mirror)
    controlled, uncontrolled = classify_spectrum(vals, spectrum)
    vecs = [[Q[i, n] for i in range(H.rows)] for n in uncontrolled]
    if region_size is not None:
        enc = encoding_vectors(vecs, region_size, dim=H.rows)
        region = region_size
    else:
        try:
            region = A.n
            enc = encoding_vectors(vecs, region, dim=H.rows)
        except EmptyNullSpace:
            region = A.n + 1
            enc = encoding_vectors(vecs, region, dim=H.rows)
    return TransferDesign(
        H=H, t0=spectrum.t0, spectrum=spectrum, chain=A, J=mp.mpf(J),
        system=sys_, block_plus=blocks[0] if blocks else None,
        block_minus=blocks[1] if blocks else None,
        eigenvalues=vals, eigenvectors=Q,
        controlled=controlled, uncontrolled=uncontrolled,
        encode=enc, region_size=region,
        mirror=mirror,
    )


# ----------------------------------------------------------------------
# Transfer fidelity


@dataclass(frozen=True, eq=False)
class FidelityReport:
    """Per-encode-vector transfer overlaps at the design time."""

    t0: mp.mpf
    per_vector: tuple
    minimum: mp.mpf
    phase: mp.mpc

    def __bool__(self) -> bool:
        return bool(self.minimum > 1 - mp.mpf("1e-8"))


def encoded_transfer_fidelity(design: TransferDesign) -> FidelityReport:
    """|<mirror(v)| exp(-i H t0) |v>| for every encode vector.

    Evaluated in the eigenbasis; the reported phase is the complex
    overlap direction of the first vector (a perfect design gives every
    vector the same phase, a fourth root of unity).
    """
    n = design.dim
    Q = design.eigenvectors
    vals = design.eigenvalues
    fidelities = []
    phase = mp.mpc(1)
    for k, (v, w) in enumerate(zip(design.encode, design.decode)):
        cv = [mp.fsum(Q[i, j] * v[i] for i in range(n)) for j in range(n)]
        cw = [mp.fsum(Q[i, j] * w[i] for i in range(n)) for j in range(n)]
        re = mp.fsum(cw[j] * cv[j] * mp.cos(vals[j] * design.t0) for j in range(n))
        im = -mp.fsum(cw[j] * cv[j] * mp.sin(vals[j] * design.t0) for j in range(n))
        amp = mp.mpc(re, im)
        f = abs(amp)
        fidelities.append(f)
        if k == 0 and f > 0:
            phase = amp / f
    return FidelityReport(
        t0=design.t0, per_vector=tuple(fidelities),
        minimum=min(fidelities) if fidelities else mp.mpf(0), phase=phase)


def containment_residuals(r: RationalInterpolant, Cp: SupportedBlock,
                          Cm: SupportedBlock, targets: TargetSpectrum) -> list:
    """Char-poly residual of each target in its assembled sector.

    Evaluates Q_A(z) Q_C(z) - J^2 P_A(z) P_C(z) — the sector's
    characteristic polynomial by the coupling identity — at every
    target, scaled by the polynomial magnitude, without any eigensolve.
    """
    polys = {}
    for sign, blk in ((+1, Cp), (-1, Cm)):
        nodes, weights = blk.spectral_data()
        qc = poly_from_roots(nodes)
        pc = [mp.mpf(0)]
        for i, w in enumerate(weights):
            part = poly_from_roots([x for j, x in enumerate(nodes) if j != i])
            pad = max(len(part), len(pc))
            pc = [(pc[k] if k < len(pc) else 0) + w * (part[k] if k < len(part) else 0)
                  for k in range(pad)]
        polys[sign] = (MonicPolynomial.from_coeffs(qc),
                       pc)
    j2 = r.J * r.J
    out = []
    for t in targets.targets:
        qc, pc = polys[t.subspace]
        qa, pa = r.Q(t.value), r.P(t.value)
        num = qa * qc(t.value) - j2 * pa * _eval(pc, t.value)
        scale = max(abs(qa * qc(t.value)), abs(j2 * pa * _eval(pc, t.value)), mp.mpf(1))
        out.append(abs(num) / scale)
    return out


def _eval(cs, z):
    acc = mp.mpf(0)
    for c in reversed(cs):
        acc = acc * z + c
    return acc


# ----------------------------------------------------------------------
# State creation


@dataclass(frozen=True, eq=False)
class CreationMap:
    """The restricted propagator P_in exp(+i H t0) P_out and its SVD.

    ``matrix[a, b]`` maps amplitude on out-site ``out_indices[b]`` to the
    best-input amplitude on in-site ``in_indices[a]``; singular values
    are descending.
    """

    in_indices: tuple[int, ...]
    out_indices: tuple[int, ...]
    matrix: mp.matrix
    singular_values: tuple

    @property
    def min_singular_value(self):
        return self.singular_values[-1]

    def best_input(self, psi: Sequence) -> list:
        """The input that best creates ``psi`` (components over
        ``out_indices``); returned over ``in_indices``, unnormalized."""
        if len(psi) != len(self.out_indices):
            raise ValueError("target state must live on the out region")
        return [
            mp.fsum(self.matrix[a, b] * mp.mpc(psi[b])
                    for b in range(len(self.out_indices)))
            for a in range(len(self.in_indices))
        ]

    def creation_fidelity(self, psi: Sequence):
        """Squared norm of the best input for a normalized target."""
        nrm = mp.sqrt(mp.fsum(abs(mp.mpc(x)) ** 2 for x in psi))
        if nrm == 0:
            raise ValueError("target state is zero")
        img = self.best_input([mp.mpc(x) / nrm for x in psi])
        return mp.fsum(abs(x) ** 2 for x in img)


def state_creation_map(design: TransferDesign) -> CreationMap:
    """SVD of the propagator restricted out-region -> in-region.

    The out region is the original system's copy inside the centre; the
    in region is everything to its right (the mirror copy plus the right
    extension).  Needs the doubled construction — a centre symmetrized
    in place has no such split, and ValueError is raised.
    """
    sys_ = design.system
    if not sys_.mirrored:
        raise ValueError(
            "state creation needs the mirror-doubled construction; "
            "this system was symmetric as given")
    nb, n_ext, dim = sys_.net.n, design.n_ext, design.dim
    out_idx = tuple(range(n_ext, n_ext + nb))
    in_idx = tuple(range(n_ext + nb, n_ext + 2 * nb)) + tuple(
        range(n_ext + 2 * nb, dim))
    Q, vals = design.eigenvectors, design.eigenvalues
    n = dim
    cos = [mp.cos(v * design.t0) for v in vals]
    sin = [mp.sin(v * design.t0) for v in vals]
    K = mp.matrix(len(in_idx), len(out_idx))
    for a, ia in enumerate(in_idx):
        for b, ib in enumerate(out_idx):
            re = mp.fsum(Q[ia, j] * cos[j] * Q[ib, j] for j in range(n))
            im = mp.fsum(Q[ia, j] * sin[j] * Q[ib, j] for j in range(n))
            K[a, b] = mp.mpc(re, im)
    G = mp.matrix(len(out_idx), len(out_idx))
    for a in range(len(out_idx)):
        for b in range(len(out_idx)):
            G[a, b] = mp.fsum(mp.conj(K[i, a]) * K[i, b]
                              for i in range(len(in_idx)))
    E = mp.eighe(G, eigvals_only=True)
    sigma = sorted((mp.sqrt(max(E[i], mp.mpf(0))) for i in range(len(out_idx))),
                   reverse=True)
    return CreationMap(in_indices=in_idx, out_indices=out_idx,
                       matrix=K, singular_values=tuple(sigma))


def ghz_fidelity(singular_values: Sequence):
    """Multi-excitation GHZ creation fidelity from the singular values."""
    prod = mp.mpf(1)
    for s in singular_values:
        prod *= mp.mpf(s)
    return (1 + prod) ** 2 / 4


# ----------------------------------------------------------------------
# Rank of the perfect-creation obstruction


@dataclass(frozen=True)
class SubspaceRank:
    """One symmetry sector's obstruction determinant, factored.

    ``determinant`` is the support product times the Cauchy factor of
    the uncontrolled-versus-block eigenvalue matrix; it vanishes only if
    an uncontrolled eigenvalue collides with a block eigenvalue (or the
    matrix is not square — both reported rather than raised).
    """

    subspace: int
    block_count: int
    uncontrolled_count: int
    support_factor: mp.mpf
    cauchy_factor: mp.mpf | None
    determinant: mp.mpf | None
    coincident: bool

    @property
    def ok(self) -> bool:
        return (self.block_count == self.uncontrolled_count
                and not self.coincident
                and self.determinant is not None and self.determinant > 0)


@dataclass(frozen=True, eq=False)
class CreationRankReport:
    plus: SubspaceRank
    minus: SubspaceRank
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.plus.ok and self.minus.ok and not self.notes

    def __bool__(self) -> bool:
        return self.ok


def creation_rank_check(design: TransferDesign) -> CreationRankReport:
    """Factorized |det| of the perfect-creation obstruction, per sector.

    Splits the uncontrolled eigenvalues by mirror parity, pairs each
    sector against its reduced block spectrum, and evaluates
    prod_i sqrt(w_i) * |prod_{i<j}(eta_i-eta_j) prod_{i<j}(l_i-l_j)| /
    prod_{i,j}|eta_i - l_j|.  A nonzero value for both sectors means no
    state can be created perfectly; collisions and non-square sectors
    are reported in the result, not raised.
    """
    if design.block_plus is None or design.block_minus is None:
        raise ValueError("design carries no reduced blocks")
    notes = []
    lam = {+1: [], -1: []}
    for idx in design.uncontrolled:
        s = design.uncontrolled_parity(idx)
        if abs(abs(s) - 1) > mp.mpf("1e-10"):
            notes.append(
                f"uncontrolled eigenvalue {mp.nstr(design.eigenvalues[idx], 12)} "
                "has indefinite mirror parity")
            continue
        lam[1 if s > 0 else -1].append(design.eigenvalues[idx])
    ranks = {}
    for sign in (+1, -1):
        blk = design.block(sign)
        nodes, weights = blk.spectral_data()
        ls = lam[sign]
        support = mp.mpf(1)
        for w in weights:
            support *= mp.sqrt(w)
        scale = max(max((abs(x) for x in list(nodes) + ls), default=mp.mpf(1)),
                    mp.mpf(1))
        ctol = scale * mp.mpf(2) ** (-mp.mp.prec // 2)
        coincident = any(abs(e - l) <= ctol for e in nodes for l in ls)
        cauchy = None
        det = None
        if not coincident:
            num = mp.mpf(1)
            for xs in (nodes, ls):
                for i in range(len(xs)):
                    for j in range(i + 1, len(xs)):
                        num *= abs(xs[i] - xs[j])
            den = mp.mpf(1)
            for e in nodes:
                for l in ls:
                    den *= abs(e - l)
            cauchy = num / den
            det = support * cauchy
        ranks[sign] = SubspaceRank(
            subspace=sign, block_count=len(nodes), uncontrolled_count=len(ls),
            support_factor=support, cauchy_factor=cauchy, determinant=det,
            coincident=coincident)
    return CreationRankReport(plus=ranks[+1], minus=ranks[-1],
                              notes=tuple(notes))
