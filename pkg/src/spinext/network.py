"""Spin-network data model and symmetry machinery.

A network is a weighted undirected coupling graph with on-site fields and
designated input/output vertices; its single-excitation Hamiltonian is the
weighted adjacency matrix with the fields on the diagonal.  The design
pipeline needs the network in a mirror-symmetric form: either a suitable
involution exchanging input and output already exists, or the network is
doubled with a copy of itself joined at the output.  Either way the
Hamiltonian splits into symmetric/antisymmetric blocks, which are then
reduced to their fully-supported parts as seen from the contact vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
from typing import Mapping, Sequence

import mpmath as mp

from . import linalg, precision
from .errors import DegenerateSupport, SymmetryDetectionAmbiguous
from .exact import ExactReal, ZERO, parse_exact

__all__ = [
    "SpinNetwork",
    "SymmetrizedSystem",
    "SupportedBlock",
    "Classification",
    "build_hamiltonian",
    "find_involutions",
    "symmetrize",
    "reduce_full_support",
    "supported_blocks",
    "classify_field_free_even",
]

SUPPORT_TOLERANCE = mp.mpf("1e-30")


@dataclass(frozen=True)
class SpinNetwork:
    """Weighted coupling graph with fields and input/output vertices.

    Couplings are stored once per unordered pair (i < j), exactly; vertex
    indices are 0-based internally (the JSON interchange format is
    1-based).
    """

    n: int
    couplings: Mapping[tuple[int, int], ExactReal]
    fields: tuple[ExactReal, ...]
    input: int
    output: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("network needs at least one vertex")
        norm = {}
        for (i, j), w in dict(self.couplings).items():
            if i == j:
                raise ValueError(f"self-coupling at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range")
            key = (i, j) if i < j else (j, i)
            wx = w if isinstance(w, ExactReal) else parse_exact(w)
            if key in norm and norm[key] != wx:
                raise ValueError(f"conflicting weights for edge {key}")
            norm[key] = wx
        object.__setattr__(self, "couplings", norm)
        flds = tuple(
            f if isinstance(f, ExactReal) else parse_exact(f) for f in self.fields
        )
        if len(flds) != self.n:
            raise ValueError("field vector length must equal vertex count")
        object.__setattr__(self, "fields", flds)
        for name in ("input", "output"):
            v = getattr(self, name)
            if not (0 <= v < self.n):
                raise ValueError(f"{name} vertex {v} out of range")
        if self.n > 1 and self.input == self.output:
            raise ValueError("input and output must differ")
        # connectivity over nonzero couplings
        seen = {0}
        stack = [0]
        adj = self.adjacency()
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != self.n:
            raise ValueError("coupling graph is not connected")

    # -- constructors ------------------------------------------------

    @classmethod
    def chain(cls, couplings: Sequence, fields: Sequence | None = None,
              input: int | None = None, output: int | None = None) -> "SpinNetwork":
        """Open chain with the given couplings; endpoints are in/out by default."""
        n = len(couplings) + 1
        cps = {(i, i + 1): couplings[i] for i in range(n - 1)}
        flds = tuple(fields) if fields is not None else tuple([ZERO] * n)
        return cls(n, cps, flds,
                   0 if input is None else input,
                   n - 1 if output is None else output)

    @classmethod
    def from_json(cls, source) -> "SpinNetwork":
        """Parse the 1-based JSON interchange form.

        ``{"n": int, "edges": [{"i","j","w"}], "fields": [...], "in": int,
        "out": int}``; weights and fields may be numbers or exact strings
        such as ``"sqrt(2)/2"``.
        """
        doc = json.loads(source) if isinstance(source, str) else source
        n = int(doc["n"])
        cps = {}
        for e in doc.get("edges", []):
            i, j = int(e["i"]) - 1, int(e["j"]) - 1
            cps[(i, j)] = parse_exact(e["w"])
        flds = [parse_exact(f) for f in doc.get("fields", [0] * n)]
        return cls(n, cps, tuple(flds), int(doc["in"]) - 1, int(doc["out"]) - 1)

    # -- accessors ---------------------------------------------------

    def coupling(self, i: int, j: int) -> ExactReal:
        if i == j:
            return ZERO
        key = (i, j) if i < j else (j, i)
        return self.couplings.get(key, ZERO)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (i, j), w in self.couplings.items():
            if not w.is_zero():
                adj[i].append(j)
                adj[j].append(i)
        return adj


def build_hamiltonian(net: SpinNetwork) -> mp.matrix:
    """Single-excitation Hamiltonian: weighted adjacency + fields on the diagonal."""
    H = mp.matrix(net.n, net.n)
    for (i, j), w in net.couplings.items():
        H[i, j] = H[j, i] = w.to_mpf()
    for i, f in enumerate(net.fields):
        H[i, i] = f.to_mpf()
    return H


# ----------------------------------------------------------------------
# Involution detection


def find_involutions(net: SpinNetwork) -> list[tuple[int, ...]]:
    """All weight- and field-preserving involutions exchanging input and output.

    Exact backtracking search; weights compare exactly, so √2 edges match
    only √2 edges.  Returns permutation tuples (possibly empty).
    """
    n = net.n
    if net.input == net.output:
        return []
    S: list[int | None] = [None] * n
    S[net.input] = net.output
    S[net.output] = net.input
    found: list[tuple[int, ...]] = []

    def compatible(v: int, u: int) -> bool:
        if net.fields[v] != net.fields[u]:
            return False
        for x in range(n):
            sx = S[x]
            if sx is None or x == v:
                continue
            if net.coupling(v, x) != net.coupling(u, sx):
                return False
        return True

    def rec(v: int):
        if v == n:
            found.append(tuple(S))  # type: ignore[arg-type]
            return
        if S[v] is not None:
            rec(v + 1)
            return
        for u in range(v, n):
            if S[u] is not None and u != v:
                continue
            if u == v:
                if not compatible(v, v):
                    continue
                S[v] = v
                rec(v + 1)
                S[v] = None
            else:
                S[v], S[u] = u, v
                if compatible(v, u) and compatible(u, v):
                    rec(v + 1)
                S[v], S[u] = None, None

    if compatible(net.input, net.output) and compatible(net.output, net.input):
        rec(0)
    return found


# ----------------------------------------------------------------------
# Symmetrization


@dataclass(frozen=True, eq=False)
class SymmetrizedSystem:
    """Mirror-symmetric system with its ± subspace blocks.

    ``C`` is the full (possibly doubled) Hamiltonian, ``S`` the mirror
    permutation, and ``C_plus``/``C_minus`` the restrictions to the
    symmetric/antisymmetric subspaces in the orbit basis
    (|v⟩ ± S|v⟩)/√2, fixed vertices joining the symmetric block.  The
    contact indices locate (|in⟩ ± S|in⟩)/√2 within each block.
    """

    dim: int
    C: mp.matrix
    S: tuple[int, ...]
    J_prime: mp.mpf | None
    C_plus: mp.matrix
    C_minus: mp.matrix
    contact_plus: int
    contact_minus: int
    plus_units: list[list]
    minus_units: list[list]
    mirrored: bool
    net: SpinNetwork

    def block(self, sign: int) -> mp.matrix:
        return self.C_plus if sign > 0 else self.C_minus

    def contact_index(self, sign: int) -> int:
        return self.contact_plus if sign > 0 else self.contact_minus

    def units(self, sign: int) -> list[list]:
        return self.plus_units if sign > 0 else self.minus_units


def _doubled_matrix(net: SpinNetwork, J_prime) -> mp.matrix:
    n = net.n
    C = mp.matrix(2 * n, 2 * n)
    B = build_hamiltonian(net)
    for i in range(n):
        for j in range(n):
            C[i, j] = B[i, j]
            C[n + i, n + j] = B[i, j]
    C[net.output, n + net.output] = C[n + net.output, net.output] = \
        precision.to_mpf(J_prime)
    return C


def _subspace_blocks(C: mp.matrix, S: tuple[int, ...], contact_vertex: int):
    """Orbit-basis blocks of an S-invariant matrix.

    Returns (C_plus, C_minus, contact_plus, contact_minus, plus_units,
    minus_units); unit vectors are dense lists in C coordinates.  The
    antisymmetric unit of the contact orbit is oriented positively on the
    contact vertex.
    """
    n = C.rows
    for i in range(n):
        for j in range(n):
            if C[S[i], S[j]] != C[i, j]:
                raise ValueError("matrix is not invariant under the involution")
    fixed = [v for v in range(n) if S[v] == v]
    pairs = [(v, S[v]) for v in range(n) if v < S[v]]
    half = mp.mpf(1) / mp.sqrt(mp.mpf(2))

    plus_units: list[list] = []
    minus_units: list[list] = []
    plus_keys = sorted([(v, "f") for v in fixed] + [(v, "p") for v, _ in pairs])
    for v, kind in plus_keys:
        u = [mp.mpf(0)] * n
        if kind == "f":
            u[v] = mp.mpf(1)
        else:
            u[v] = u[S[v]] = half
        plus_units.append(u)
    for v, _ in sorted((p for p in pairs), key=lambda p: p[0]):
        u = [mp.mpf(0)] * n
        if v == contact_vertex or S[v] != contact_vertex:
            u[v], u[S[v]] = half, -half
        else:
            u[S[v]], u[v] = half, -half
        minus_units.append(u)

    def restrict(units):
        k = len(units)
        M = mp.matrix(k, k)
        for a in range(k):
            ua = units[a]
            for b in range(a, k):
                ub = units[b]
                s = mp.fsum(
                    ua[i] * C[i, j] * ub[j]
                    for i in range(n) if ua[i] != 0
                    for j in range(n) if ub[j] != 0
                )
                M[a, b] = M[b, a] = s
        return M

    def locate(units):
        for idx, u in enumerate(units):
            if u[contact_vertex] != 0:
                return idx
        raise ValueError("contact vertex missing from block basis")

    C_plus = restrict(plus_units)
    C_minus = restrict(minus_units)
    return C_plus, C_minus, locate(plus_units), locate(minus_units), plus_units, minus_units


def _build_with_involution(net: SpinNetwork, S: tuple[int, ...],
                           J_prime, mirrored: bool) -> SymmetrizedSystem:
    C = _doubled_matrix(net, J_prime) if mirrored else build_hamiltonian(net)
    cp, cm, ip, im, pu, mu_ = _subspace_blocks(C, S, net.input)
    return SymmetrizedSystem(
        dim=C.rows, C=C, S=S,
        J_prime=(None if not mirrored else precision.to_mpf(J_prime)),
        C_plus=cp, C_minus=cm, contact_plus=ip, contact_minus=im,
        plus_units=pu, minus_units=mu_, mirrored=mirrored, net=net,
    )


def _support_signature(net: SpinNetwork, S: tuple[int, ...]):
    """Spectral data (nodes, weights) of both reduced blocks under S."""
    sys_ = _build_with_involution(net, S, None, mirrored=False)
    sig = []
    for sign in (+1, -1):
        block = sys_.block(sign)
        if block.rows == 0:
            sig.append([])
            continue
        contact = [mp.mpf(0)] * block.rows
        contact[sys_.contact_index(sign)] = mp.mpf(1)
        red = reduce_full_support(block, contact, SUPPORT_TOLERANCE)
        nodes, weights = red.spectral_data()
        sig.append(sorted(zip(nodes, weights)))
    return sig


def _signatures_match(a, b) -> bool:
    tol = mp.mpf(2) ** (-mp.mp.prec // 3)
    if len(a) != len(b):
        return False
    for sa, sb in zip(a, b):
        if len(sa) != len(sb):
            return False
        for (na, wa), (nb, wb) in zip(sa, sb):
            if abs(na - nb) > tol or abs(wa - wb) > tol:
                return False
    return True


def symmetrize(net: SpinNetwork, J_prime=1, involution: Sequence[int] | None = None,
               mode: str = "auto") -> SymmetrizedSystem:
    """Put a network into mirror-symmetric form and split it into ± blocks.

    If the network already admits a weight-preserving involution
    exchanging input and output, that symmetry is used directly and
    ``J_prime`` is ignored; otherwise the network is doubled with a mirror
    copy joined at the output with coupling ``J_prime``.  ``mode`` can
    force one branch: "detect" requires an existing involution, "mirror"
    always doubles (the workflow used for chain extensions, where the
    accidental reversal symmetry of a uniform chain is not wanted).

    When several inequivalent involutions exist and none is supplied,
    :class:`SymmetryDetectionAmbiguous` is raised; involutions giving
    identical reduced contact spectra are interchangeable and deduplicated
    silently.
    """
    if mode not in ("auto", "detect", "mirror"):
        raise ValueError(f"unknown symmetrize mode: {mode!r}")
    if involution is not None:
        S = tuple(involution)
        if len(S) != net.n or sorted(S) != list(range(net.n)):
            raise ValueError("involution must be a permutation of the vertices")
        if any(S[S[v]] != v for v in range(net.n)):
            raise ValueError("supplied permutation is not an involution")
        if S[net.input] != net.output:
            raise ValueError("involution must exchange input and output")
        for i in range(net.n):
            if net.fields[i] != net.fields[S[i]]:
                raise ValueError("involution does not preserve fields")
            for j in range(i + 1, net.n):
                if net.coupling(i, j) != net.coupling(S[i], S[j]):
                    raise ValueError("involution does not preserve couplings")
        return _build_with_involution(net, S, None, mirrored=False)

    candidates = find_involutions(net) if mode in ("auto", "detect") else []
    if not candidates:
        if mode == "detect":
            raise ValueError("no mirror involution found")
        if J_prime is None or precision.to_mpf(J_prime) <= 0:
            raise ValueError("mirror construction needs J_prime > 0")
        S = tuple([v + net.n for v in range(net.n)] + list(range(net.n)))
        return _build_with_involution(net, S, J_prime, mirrored=True)

    if len(candidates) > 1:
        sigs = [_support_signature(net, S) for S in candidates]
        classes = [candidates[0]]
        for S, sg in zip(candidates[1:], sigs[1:]):
            if not _signatures_match(sigs[0], sg):
                classes.append(S)
        if len(classes) > 1:
            raise SymmetryDetectionAmbiguous(classes)
    S = min(candidates)
    return _build_with_involution(net, S, None, mirrored=False)


# ----------------------------------------------------------------------
# Full-support reduction


@dataclass(frozen=True, eq=False)
class SupportedBlock:
    """A symmetry block restricted to the part the contact vertex can see.

    ``matrix`` acts on the span of eigenvectors overlapping the contact;
    ``basis`` holds the reduced basis vectors as rows in the original
    block coordinates, and ``dropped`` the removed (eigenvalue,
    eigenvector) pairs.
    """

    matrix: mp.matrix
    contact: list
    dropped: list[tuple[mp.mpf, list]]
    basis: list[list]

    @property
    def dim(self) -> int:
        return self.matrix.rows

    def spectral_data(self) -> tuple[list, list]:
        """Eigenvalues of the reduced block and squared contact overlaps.

        Cached per working precision; callers must not mutate the lists.
        """
        cached = getattr(self, "_spectral_cache", None)
        if cached is not None and cached[0] == mp.mp.prec:
            return cached[1], cached[2]
        if self.dim == 0:
            vals, weights = [], []
        else:
            vals, Q = linalg.eigh(self.matrix)
            weights = []
            for j in range(len(vals)):
                o = mp.fsum(self.contact[i] * Q[i, j] for i in range(self.dim))
                weights.append(o * o)
        object.__setattr__(self, "_spectral_cache", (mp.mp.prec, vals, weights))
        return vals, weights


def reduce_full_support(block: mp.matrix, contact: Sequence, tol=None) -> SupportedBlock:
    """Restrict a symmetric block to the subspace reachable from ``contact``.

    Eigenvectors with contact overlap below ``tol`` are dropped; within a
    degenerate eigenspace only the direction of the contact's projection
    is kept, so the reduced block always has a simple, fully supported
    spectrum.  The reduced basis is produced by projecting the coordinate
    vectors in index order, which keeps orbit structure recognizable (a
    chain stays a chain, symmetric vertex groups become single effective
    vertices).
    """
    if tol is None:
        tol = SUPPORT_TOLERANCE
    n = block.rows
    if n == 0:
        return SupportedBlock(mp.matrix(0, 0), [], [], [])
    c = [mp.mpf(x) for x in contact]
    cn = mp.sqrt(mp.fsum(x * x for x in c))
    if cn == 0:
        raise ValueError("contact vector is zero")
    c = [x / cn for x in c]

    vals, Q = linalg.eigh(block)
    cols = [[Q[i, j] for i in range(n)] for j in range(n)]
    scale = max(max(abs(v) for v in vals), mp.mpf(1))
    ctol = scale * mp.mpf(2) ** (-(3 * mp.mp.prec) // 4)

    kept: list[tuple[mp.mpf, list]] = []
    dropped: list[tuple[mp.mpf, list]] = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= ctol:
            j += 1
        cluster = list(range(i, j))
        lam = mp.fsum(vals[k] for k in cluster) / len(cluster)
        overlaps = [mp.fsum(c[v] * cols[k][v] for v in range(n)) for k in cluster]
        pnorm = mp.sqrt(mp.fsum(o * o for o in overlaps))
        if pnorm <= tol:
            for k in cluster:
                dropped.append((vals[k], cols[k]))
        else:
            rep = [mp.fsum(overlaps[a] * cols[cluster[a]][v] for a in range(len(cluster))) / pnorm
                   for v in range(n)]
            kept.append((lam, rep))
            if len(cluster) > 1:
                rest = linalg.gram_schmidt([rep] + [cols[k] for k in cluster])[1:]
                for w in rest:
                    dropped.append((lam, w))
        i = j

    for a in range(1, len(kept)):
        if kept[a][0] - kept[a - 1][0] <= ctol:
            raise DegenerateSupport(kept[a][0])

    reps = [v for _, v in kept]
    k = len(reps)
    basis: list[list] = []
    for idx in range(n):
        if len(basis) == k:
            break
        w = [mp.fsum(r[idx] * r[v] for r in reps) for v in range(n)]
        for b in basis:
            dot = mp.fsum(w[v] * b[v] for v in range(n))
            w = [w[v] - dot * b[v] for v in range(n)]
        nw = mp.sqrt(mp.fsum(x * x for x in w))
        if nw > mp.mpf(2) ** (-mp.mp.prec // 2):
            basis.append([x / nw for x in w])

    if len(basis) != k:  # fall back to the eigenbasis span itself
        basis = linalg.gram_schmidt(reps)

    M = mp.matrix(k, k)
    Bv = []
    for b in basis:
        Bv.append([mp.fsum(block[v, u] * b[u] for u in range(n)) for v in range(n)])
    for a in range(k):
        for bidx in range(a, k):
            s = mp.fsum(basis[a][v] * Bv[bidx][v] for v in range(n))
            M[a, bidx] = M[bidx, a] = s
    cred = [mp.fsum(b[v] * c[v] for v in range(n)) for b in basis]
    nr = mp.sqrt(mp.fsum(x * x for x in cred))
    cred = [x / nr for x in cred]
    return SupportedBlock(M, cred, dropped, basis)


# ----------------------------------------------------------------------
# Field-free / bipartite classification


@dataclass(frozen=True)
class Classification:
    bipartite: bool
    field_free: bool
    even: bool
    sign_operator: tuple[int, ...] | None


def supported_blocks(sys_: SymmetrizedSystem,
                     tol=None) -> tuple[SupportedBlock, SupportedBlock]:
    """Reduce both subspace blocks to their contact-supported parts."""
    out = []
    for sign in (+1, -1):
        M = sys_.block(sign)
        c = [mp.mpf(0)] * M.rows
        c[sys_.contact_index(sign)] = mp.mpf(1)
        out.append(reduce_full_support(M, c, tol=tol))
    return out[0], out[1]


def classify_field_free_even(sys_: SymmetrizedSystem) -> Classification:
    """Bipartiteness, zero fields, and mirror-parity of the coloring.

    When the system is bipartite and field-free the returned diagonal
    sign operator D satisfies D·C·D = −C, so the spectrum is symmetric
    about zero; "even" additionally requires the mirror to map every
    vertex to the opposite color.
    """
    C, n = sys_.C, sys_.dim
    field_free = all(C[i, i] == 0 for i in range(n))
    color = [-1] * n
    bipartite = True
    for start in range(n):
        if color[start] >= 0:
            continue
        color[start] = 0
        stack = [start]
        while stack and bipartite:
            v = stack.pop()
            for u in range(n):
                if u == v or C[v, u] == 0:
                    continue
                if color[u] < 0:
                    color[u] = 1 - color[v]
                    stack.append(u)
                elif color[u] == color[v]:
                    bipartite = False
                    break
        if not bipartite:
            break
    sign_op = None
    if bipartite and field_free:
        sign_op = tuple(1 if color[v] == 0 else -1 for v in range(n))
    even = bool(bipartite and field_free
                and all(color[sys_.S[v]] != color[v] for v in range(n)))
    return Classification(bipartite, field_free, even, sign_op)
