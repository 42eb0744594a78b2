"""Report figures.

Rendering is optional everywhere (the CLI's ``--no-figures`` skips these
calls entirely); all output is written to files through the Agg backend,
so no display is ever needed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import linalg
from .transfer import TransferDesign

__all__ = [
    "plot_spectrum",
    "plot_couplings",
    "plot_singular_values",
    "plot_trials",
]

_GREY = "0.55"


def _save(fig, path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_spectrum(design: TransferDesign, path) -> Path:
    """Assembled spectrum by index: controlled circles, uncontrolled triangles."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ctrl = sorted(design.controlled)
    unc = sorted(design.uncontrolled)
    ax.scatter(ctrl, [float(design.eigenvalues[i]) for i in ctrl],
               s=22, facecolors=_GREY, edgecolors="none", label="controlled")
    ax.scatter(unc, [float(design.eigenvalues[i]) for i in unc],
               s=26, marker="^", color="black", label="uncontrolled")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_couplings(design: TransferDesign, path) -> Path:
    """Coupling profile along the assembled system.

    When the assembled Hamiltonian is (a relabelling of) an open chain,
    every bond is shown, grouped into extension, contact, and central
    bonds.  Otherwise only the extension profile and the contact coupling
    are drawn — a general central network has no linear bond order.
    """
    H = design.H
    n_ext = design.n_ext
    n = H.rows
    order = linalg.path_permutation(H)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if order is not None and n > 1:
        if order[0] > order[-1]:  # keep the left extension on the left
            order = order[::-1]
        ext = set(range(n_ext)) | set(range(n - n_ext, n))
        groups = {"extension": ([], [], "s", "black"),
                  "contact": ([], [], "D", _GREY),
                  "central": ([], [], "o", _GREY)}
        for k in range(n - 1):
            a, b = order[k], order[k + 1]
            w = abs(float(H[a, b]))
            in_ext = (a in ext) + (b in ext)
            kind = ("extension", "contact", "central")[2 - in_ext]
            groups[kind][0].append(k + 1)
            groups[kind][1].append(w)
        for kind, (xs, ys, marker, colour) in groups.items():
            if xs:
                ax.scatter(xs, ys, marker=marker, s=26, color=colour,
                           label=kind)
        ax.set_xlabel("bond")
    else:
        cs = [float(c) for c in design.chain.couplings]
        xs = list(range(1, len(cs) + 1))
        ax.scatter(xs, cs, marker="s", s=26, color="black", label="extension")
        ax.scatter([len(cs) + 1], [abs(float(design.J))], marker="D", s=30,
                   color=_GREY, label="contact")
        ax.set_xlabel("extension bond (outer end first)")
    ax.set_ylabel("coupling strength")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_singular_values(singular_values, path) -> Path:
    """Creation-map singular values, largest first, as 1 - sigma (log scale)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    devs = [max(1 - float(s), 1e-300) for s in singular_values]
    ax.semilogy(range(1, len(devs) + 1), devs, "o", color="black", ms=4)
    ax.set_xlabel("singular value index")
    ax.set_ylabel("1 − singular value")
    return _save(fig, path)


def plot_trials(summary, path) -> Path:
    """Per-trial transfer and creation quality on a log deviation scale."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ok = [r for r in summary.records if r.success]
    bad = [r for r in summary.records if not r.success]
    if ok:
        ax.semilogy([r.trial for r in ok],
                    [max(1 - float(r.fidelity), 1e-300) for r in ok],
                    "o", color=_GREY, label="1 − fidelity")
        ax.semilogy([r.trial for r in ok],
                    [max(1 - float(r.ghz), 1e-300) for r in ok],
                    "^", color="black", label="1 − GHZ fidelity")
    for r in bad:
        ax.axvline(r.trial, color="black", ls=":", lw=0.8)
    ax.set_xlabel("trial")
    ax.set_ylabel("deviation")
    ax.legend(loc="best")
    return _save(fig, path)
