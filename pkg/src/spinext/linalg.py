"""Arbitrary-precision linear algebra kernels.

mpmath provides dense symmetric eigendecompositions (``eigsy``) that are
ample for the small network blocks, but the assembled systems are
tridiagonal and can run to a few hundred sites, where a dense O(n^3)
iteration at 256 bits is too slow.  This module adds:

* a tridiagonal eigensolver (float64 seeds, Newton refinement on the
  three-term characteristic recurrence, Sturm-count verification with a
  pure bisection fallback, inverse-iteration eigenvectors),
* characteristic-polynomial coefficient and value recurrences,
* Householder tridiagonalization for dense symmetric input,
* full-pivot Gaussian elimination and null-space extraction,
* the weighted-node three-term recurrence (Jacobi matrix from spectral
  data, with full reorthogonalization).

Matrices cross the API as ``mp.matrix``; the hot paths work on plain
lists of mpf internally.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

from .errors import BreakdownAtStep

__all__ = [
    "is_tridiagonal",
    "tridiag_bands",
    "path_permutation",
    "eigh",
    "eigh_tridiag",
    "sturm_count",
    "charpoly_tridiag_coeffs",
    "charpoly_tridiag_eval",
    "householder_tridiag",
    "solve_full_pivot",
    "nullspace",
    "gram_schmidt",
    "lanczos_jacobi",
]


def is_tridiagonal(M: mp.matrix) -> bool:
    n = M.rows
    for i in range(n):
        for j in range(i + 2, n):
            if M[i, j] != 0 or M[j, i] != 0:
                return False
    return True


def tridiag_bands(M: mp.matrix) -> tuple[list, list]:
    """Diagonal and subdiagonal of a tridiagonal symmetric matrix."""
    n = M.rows
    d = [mp.mpf(M[i, i]) for i in range(n)]
    e = [mp.mpf(M[i + 1, i]) for i in range(n - 1)]
    return d, e


# ------------------------------------------------------------------
# Sturm counts and characteristic recurrences


def sturm_count(d: list, e: list, x) -> int:
    """Number of eigenvalues of the tridiagonal (d, e) strictly below x."""
    x = mp.mpf(x)
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    tiny = mp.mpf(2) ** (-2 * mp.mp.prec)
    for k in range(1, len(d)):
        if q == 0:
            q = tiny
        q = (d[k] - x) - e[k - 1] * e[k - 1] / q
        if q < 0:
            count += 1
    return count


def charpoly_tridiag_eval(d: list, e: list, x, with_scale: bool = False):
    """Evaluate det(xI - T) and its derivative by the three-term recurrence.

    With ``with_scale`` also returns the largest intermediate magnitude,
    which bounds the evaluation's absolute rounding noise (times n ulp) —
    root refiners use it to know when further digits are meaningless.
    """
    x = mp.mpf(x)
    pm1, dpm1 = mp.mpf(1), mp.mpf(0)
    p, dp = x - d[0], mp.mpf(1)
    big = max(abs(p), mp.mpf(1))
    for k in range(1, len(d)):
        w = e[k - 1] * e[k - 1]
        pn = (x - d[k]) * p - w * pm1
        dpn = p + (x - d[k]) * dp - w * dpm1
        pm1, dpm1, p, dp = p, dp, pn, dpn
        if abs(p) > big:
            big = abs(p)
    if with_scale:
        return p, dp, big
    return p, dp


def charpoly_tridiag_coeffs(d: list, e: list) -> list:
    """Monic characteristic polynomial of (d, e), coefficients ascending."""
    pm1 = [mp.mpf(1)]
    p = [-mp.mpf(d[0]), mp.mpf(1)]
    for k in range(1, len(d)):
        w = e[k - 1] * e[k - 1]
        pn = [mp.mpf(0)] * (len(p) + 1)
        for i, c in enumerate(p):  # z * p
            pn[i + 1] += c
        for i, c in enumerate(p):  # -d[k] * p
            pn[i] -= d[k] * c
        for i, c in enumerate(pm1):  # -e^2 * pm1
            pn[i] -= w * c
        pm1, p = p, pn
    return p


def householder_tridiag(M: mp.matrix) -> tuple[list, list]:
    """Reduce a dense symmetric matrix to tridiagonal form (d, e).

    Orthogonal similarity by Householder reflectors; only the bands are
    returned since callers want characteristic polynomials, not the
    transform itself.
    """
    n = M.rows
    A = [[mp.mpf(M[i, j]) for j in range(n)] for i in range(n)]
    for k in range(n - 2):
        norm2 = mp.fsum(A[i][k] ** 2 for i in range(k + 1, n))
        if norm2 == 0:
            continue
        x0 = A[k + 1][k]
        alpha = -mp.sqrt(norm2) if x0 >= 0 else mp.sqrt(norm2)
        v = [A[i][k] for i in range(k + 1, n)]
        v[0] -= alpha
        vnorm2 = mp.fsum(vi * vi for vi in v)
        if vnorm2 == 0:
            continue
        m = n - k - 1
        # p = B v on the trailing block
        p = [
            mp.fsum(A[k + 1 + i][k + 1 + j] * v[j] for j in range(m))
            for i in range(m)
        ]
        beta = mp.fsum(v[i] * p[i] for i in range(m)) / vnorm2
        q = [2 * (p[i] - beta * v[i]) / vnorm2 for i in range(m)]
        for i in range(m):
            for j in range(m):
                A[k + 1 + i][k + 1 + j] -= v[i] * q[j] + q[i] * v[j]
        A[k + 1][k] = A[k][k + 1] = alpha
        for i in range(k + 2, n):
            A[i][k] = A[k][i] = mp.mpf(0)
    d = [A[i][i] for i in range(n)]
    e = [A[i + 1][i] for i in range(n - 1)]
    return d, e


# ------------------------------------------------------------------
# Tridiagonal eigensolver


def _split_blocks(d: list, e: list):
    """Split at exactly-zero couplings into independent tridiagonal blocks."""
    blocks, start = [], 0
    for k, ek in enumerate(e):
        if ek == 0:
            blocks.append((start, k + 1))
            start = k + 1
    blocks.append((start, len(d)))
    return blocks


def _bisect_one(d, e, lo, hi, idx):
    """Bisect [lo, hi] until it brackets only eigenvalue #idx, then refine."""
    # narrow by count until exactly one eigenvalue remains
    for _ in range(mp.mp.prec + 60):
        mid = (lo + hi) / 2
        c = sturm_count(d, e, mid)
        if c <= idx:
            lo = mid
        else:
            hi = mid
        if hi - lo <= mp.mpf(2) ** (-mp.mp.prec + 2) * max(1, abs(lo), abs(hi)):
            break
    return (lo + hi) / 2


def _newton_refine(d, e, x0, lo, hi):
    """Newton iteration safeguarded by the bracket [lo, hi].

    The bracket is assumed to isolate a single simple eigenvalue, so
    det(xI-T) changes sign across it and bisection is always available.
    Stops at the evaluation noise floor: once |p| falls to the rounding
    noise of the recurrence, more iterations only chase sign noise.
    """
    plo, _ = charpoly_tridiag_eval(d, e, lo)
    x = mp.mpf(x0)
    if not (lo < x < hi):
        x = (lo + hi) / 2
    tol = mp.mpf(2) ** (-mp.mp.prec + 3)
    ulps = 8 * len(d) * mp.mpf(2) ** (-mp.mp.prec)
    for _ in range(200):
        p, dp, big = charpoly_tridiag_eval(d, e, x, with_scale=True)
        if abs(p) <= big * ulps:
            return x
        # shrink the bracket using the sign
        if (p > 0) == (plo > 0):
            lo = x
        else:
            hi = x
        step_ok = dp != 0
        if step_ok:
            xn = x - p / dp
            if not (lo < xn < hi):
                step_ok = False
        if not step_ok:
            xn = (lo + hi) / 2
        if abs(xn - x) <= tol * max(1, abs(xn)):
            return xn
        x = xn
    return x


def _inverse_iteration(d, e, lam, n):
    """One eigenvector of the tridiagonal (d, e) for eigenvalue lam."""
    rng = np.random.default_rng(12345)
    v = [mp.mpf(float(t)) for t in rng.standard_normal(n)]
    for _ in range(2):
        v = _tridiag_solve_shifted(d, e, lam, v)
        nv = mp.sqrt(mp.fsum(x * x for x in v))
        v = [x / nv for x in v]
    return v


def _tridiag_solve_shifted(d, e, lam, rhs):
    """Solve (T - lam I) x = rhs with partial pivoting (LU on three bands)."""
    n = len(d)
    tiny = mp.mpf(2) ** (-2 * mp.mp.prec) * max(mp.mpf(1), max(abs(x) for x in d))
    a = [d[i] - lam for i in range(n)]  # main
    b = [mp.mpf(e[i]) for i in range(n - 1)]  # super (symmetric)
    c = [mp.mpf(e[i]) for i in range(n - 1)]  # sub
    b2 = [mp.mpf(0)] * n  # second super after pivoting
    x = [mp.mpf(v) for v in rhs]
    for k in range(n - 1):
        if abs(c[k]) > abs(a[k]):
            a[k], c[k] = c[k], a[k]
            bk = b[k]
            b[k], a[k + 1] = a[k + 1], bk
            if k < n - 2:
                b2[k], b[k + 1] = b[k + 1], mp.mpf(0)
            x[k], x[k + 1] = x[k + 1], x[k]
        piv = a[k] if a[k] != 0 else tiny
        m_ = c[k] / piv
        a[k + 1] -= m_ * b[k]
        if k < n - 2:
            b[k + 1] -= m_ * b2[k]
        x[k + 1] -= m_ * x[k]
        a[k] = piv
    if a[n - 1] == 0:
        a[n - 1] = tiny
    # back substitution
    x[n - 1] /= a[n - 1]
    if n >= 2:
        x[n - 2] = (x[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2]
    for k in range(n - 3, -1, -1):
        x[k] = (x[k] - b[k] * x[k + 1] - b2[k] * x[k + 2]) / a[k]
    return x


def eigh_tridiag(d: list, e: list, vectors: bool = True):
    """Full eigensystem of a symmetric tridiagonal matrix.

    Returns (eigenvalues ascending, columns) where ``columns`` is a list of
    eigenvectors (lists) or None.  Exact zero couplings split the problem
    into independent blocks, so degenerate eigenvalues across blocks are
    handled; within an unreduced block the spectrum is provably simple.
    """
    n = len(d)
    if n == 1:
        return [mp.mpf(d[0])], ([[mp.mpf(1)]] if vectors else None)
    blocks = _split_blocks(d, e)
    if len(blocks) > 1:
        pairs = []
        for (s, t) in blocks:
            vals, vecs = eigh_tridiag(d[s:t], e[s : t - 1], vectors)
            for i, lam in enumerate(vals):
                if vectors:
                    full = [mp.mpf(0)] * n
                    full[s:t] = vecs[i]
                    pairs.append((lam, full))
                else:
                    pairs.append((lam, None))
        pairs.sort(key=lambda p: p[0])
        vals = [p[0] for p in pairs]
        return vals, ([p[1] for p in pairs] if vectors else None)

    scale = max(max(abs(x) for x in d), max(abs(x) for x in e), mp.mpf(1))
    # float64 seeds; fall back to bisection when scipy cannot help
    seeds = None
    try:
        from scipy.linalg import eigh_tridiagonal

        df = np.array([float(x) for x in d])
        ef = np.array([float(x) for x in e])
        if np.all(np.isfinite(df)) and np.all(np.isfinite(ef)):
            seeds = np.sort(eigh_tridiagonal(df, ef, eigvals_only=True))
    except Exception:
        seeds = None

    radius = max(abs(d[i]) + (abs(e[i - 1]) if i else 0) + (abs(e[i]) if i < n - 1 else 0) for i in range(n))
    lo_all, hi_all = -radius - scale, radius + scale

    vals = None
    if seeds is not None and len(seeds) == n:
        # brackets at midpoints, verified by Sturm counts
        mids = [lo_all] + [mp.mpf(float((seeds[i] + seeds[i + 1]) / 2)) for i in range(n - 1)] + [hi_all]
        counts = [sturm_count(d, e, m) for m in mids]
        if counts == list(range(n + 1)):
            vals = [
                _newton_refine(d, e, mp.mpf(float(seeds[i])), mids[i], mids[i + 1])
                for i in range(n)
            ]
    if vals is None:
        vals = [_bisect_one(d, e, lo_all, hi_all, i) for i in range(n)]
    vals.sort()

    if not vectors:
        return vals, None
    cols = [_inverse_iteration(d, e, lam, n) for lam in vals]
    # re-orthogonalize close clusters (inverse iteration may mix them)
    cluster_tol = mp.mpf("1e-8") * scale
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] < cluster_tol:
            j += 1
        if j - i > 1:
            sub = gram_schmidt([cols[k] for k in range(i, j)])
            for k, v in enumerate(sub):
                cols[i + k] = v
        i = j
    return vals, cols


def path_permutation(M: mp.matrix) -> list[int] | None:
    """Vertex order making M tridiagonal, if its graph is a path.

    Returns the ordering (a list of original indices) or None when the
    off-diagonal structure is not a single open path.
    """
    n = M.rows
    if n == 1:
        return [0]
    adj: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if M[i, j] != 0:
                adj[i].append(j)
                adj[j].append(i)
                if len(adj[i]) > 2 or len(adj[j]) > 2:
                    return None
    ends = [v for v in range(n) if len(adj[v]) == 1]
    if len(ends) != 2:
        return None
    order, prev = [ends[0]], -1
    while len(order) < n:
        nxt = [u for u in adj[order[-1]] if u != prev]
        if len(nxt) != 1:
            return None
        prev = order[-1]
        order.append(nxt[0])
    return order


def eigh(M: mp.matrix, vectors: bool = True):
    """Eigendecomposition of a real symmetric ``mp.matrix``.

    Returns (list of eigenvalues ascending, mp.matrix of column
    eigenvectors or None).  Tridiagonal input — up to a relabeling of
    the vertices, as in an assembled chain system — takes the fast path.
    """
    n = M.rows
    if n == 0:
        return [], (mp.matrix(0, 0) if vectors else None)
    if is_tridiagonal(M):
        d, e = tridiag_bands(M)
        vals, cols = eigh_tridiag(d, e, vectors)
        if not vectors:
            return vals, None
        Q = mp.matrix(n, n)
        for j, col in enumerate(cols):
            for i in range(n):
                Q[i, j] = col[i]
        return vals, Q
    order = path_permutation(M)
    if order is not None:
        d = [M[v, v] for v in order]
        e = [M[order[k], order[k + 1]] for k in range(n - 1)]
        if all(x != 0 for x in e):
            vals, cols = eigh_tridiag(d, e, vectors)
            if not vectors:
                return vals, None
            Q = mp.matrix(n, n)
            for j, col in enumerate(cols):
                for k, v in enumerate(order):
                    Q[v, j] = col[k]
            return vals, Q
    if vectors:
        E, Q = mp.eigsy(mp.matrix(M))
        return [E[i] for i in range(n)], Q
    E = mp.eigsy(mp.matrix(M), eigvals_only=True)
    return [E[i] for i in range(n)], None


# ------------------------------------------------------------------
# Linear solves and null spaces


def solve_full_pivot(A: list[list], b: list) -> list:
    """Solve Ax = b by Gaussian elimination with full pivoting.

    Raises ValueError("singular system") when no acceptable pivot remains.
    """
    n = len(A)
    M = [[mp.mpf(x) for x in row] + [mp.mpf(bv)] for row, bv in zip(A, b)]
    colperm = list(range(n))
    scale = max((abs(M[i][j]) for i in range(n) for j in range(n)), default=mp.mpf(1))
    tol = scale * mp.mpf(2) ** (-mp.mp.prec + 8)
    for k in range(n):
        # full pivot search
        pi, pj, pv = k, k, abs(M[k][k])
        for i in range(k, n):
            for j in range(k, n):
                if abs(M[i][j]) > pv:
                    pi, pj, pv = i, j, abs(M[i][j])
        if pv <= tol:
            raise ValueError("singular system")
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
        if pj != k:
            for row in M:
                row[k], row[pj] = row[pj], row[k]
            colperm[k], colperm[pj] = colperm[pj], colperm[k]
        piv = M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / piv
            if f == 0:
                continue
            M[i][k] = mp.mpf(0)
            for j in range(k + 1, n + 1):
                M[i][j] -= f * M[k][j]
    x = [mp.mpf(0)] * n
    for k in range(n - 1, -1, -1):
        s = M[k][n] - mp.fsum(M[k][j] * x[j] for j in range(k + 1, n))
        x[k] = s / M[k][k]
    out = [mp.mpf(0)] * n
    for k in range(n):
        out[colperm[k]] = x[k]
    return out


def nullspace(rows: list[list], tol=None) -> list[list]:
    """Orthonormal basis of the right null space of the given row list.

    Full-pivot reduction to reduced row echelon form; columns without a
    pivot parameterize the null space.  ``tol`` is the absolute entry
    threshold, defaulting to machine precision relative to the largest
    entry.
    """
    m = len(rows)
    if m == 0:
        raise ValueError("no rows")
    n = len(rows[0])
    M = [[mp.mpf(x) for x in row] for row in rows]
    scale = max((abs(M[i][j]) for i in range(m) for j in range(n)), default=mp.mpf(0))
    if tol is None:
        tol = max(scale, mp.mpf(1)) * mp.mpf(2) ** (-mp.mp.prec // 2)
    pivots: list[tuple[int, int]] = []
    rowptr = 0
    free_cols = set(range(n))
    for _ in range(min(m, n)):
        pi, pj, pv = -1, -1, tol
        for i in range(rowptr, m):
            for j in sorted(free_cols):
                if abs(M[i][j]) > pv:
                    pi, pj, pv = i, j, abs(M[i][j])
        if pi < 0:
            break
        M[rowptr], M[pi] = M[pi], M[rowptr]
        piv = M[rowptr][pj]
        M[rowptr] = [x / piv for x in M[rowptr]]
        for i in range(m):
            if i != rowptr and M[i][pj] != 0:
                f = M[i][pj]
                M[i] = [a - f * b for a, b in zip(M[i], M[rowptr])]
        pivots.append((rowptr, pj))
        free_cols.discard(pj)
        rowptr += 1
    basis = []
    for f in sorted(free_cols):
        v = [mp.mpf(0)] * n
        v[f] = mp.mpf(1)
        for (ri, pj) in pivots:
            v[pj] = -M[ri][f]
        basis.append(v)
    return gram_schmidt(basis)


def gram_schmidt(vecs: list[list], tol=None) -> list[list]:
    """Orthonormalize, dropping vectors that become numerically zero."""
    out: list[list] = []
    if tol is None:
        tol = mp.mpf(2) ** (-mp.mp.prec // 2)
    for v in vecs:
        w = [mp.mpf(x) for x in v]
        for _ in range(2):  # twice is enough
            for u in out:
                c = mp.fsum(a * b for a, b in zip(u, w))
                w = [a - c * b for a, b in zip(w, u)]
        nw = mp.sqrt(mp.fsum(x * x for x in w))
        if nw > tol:
            out.append([x / nw for x in w])
    return out


# ------------------------------------------------------------------
# Jacobi matrix from spectral data


def lanczos_jacobi(nodes: list, weights: list) -> tuple[list, list]:
    """Three-term recurrence on diag(nodes) started from the weight vector.

    Produces the unique Jacobi matrix (diagonal ``alphas``, positive
    off-diagonal ``betas``) whose spectral measure at its first site is
    sum_i weights[i] * delta(nodes[i]); the first site is the contact.
    Full reorthogonalization keeps the basis orthonormal at working
    precision.  Raises :class:`BreakdownAtStep` when an off-diagonal
    collapses, which signals (numerically) confluent data.
    """
    n = len(nodes)
    wsum = mp.fsum(weights)
    q = [mp.sqrt(mp.mpf(w) / wsum) for w in weights]
    Q = [q]
    alphas: list = []
    betas: list = []
    tol = mp.mpf(2) ** (-mp.mp.prec // 2)
    for k in range(n):
        w = [nodes[i] * Q[k][i] for i in range(n)]
        a = mp.fsum(Q[k][i] * w[i] for i in range(n))
        alphas.append(a)
        if k == n - 1:
            break
        for u in Q:
            c = mp.fsum(u[i] * w[i] for i in range(n))
            w = [w[i] - c * u[i] for i in range(n)]
        for u in Q:  # second pass
            c = mp.fsum(u[i] * w[i] for i in range(n))
            w = [w[i] - c * u[i] for i in range(n)]
        b = mp.sqrt(mp.fsum(x * x for x in w))
        if b <= tol:
            raise BreakdownAtStep(k + 1, b)
        betas.append(b)
        Q.append([x / b for x in w])
    return alphas, betas
