"""Matplotlib figures written next to the CSV reports.

Figures are saved without a software/date stamp so reruns produce identical
files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .classify import SignatureHistogram  # noqa: E402
from .hierarchy import HierarchyTree, TreeNode  # noqa: E402

RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    "svg.hashsalt": "pathmetrics",
}

_PNG_META = {"Software": None}


def _save(fig: plt.Figure, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_path_frequency(hist: Mapping[tuple[float, float], int], path: str | Path) -> Path:
    """Bar chart of distinct paths per frequency bin."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        lows = [lo for lo, _ in hist]
        widths = [hi - lo for lo, hi in hist]
        ax.bar(lows, list(hist.values()), width=widths, align="edge", color="#4c72b0",
               edgecolor="white", linewidth=0.5)
        ax.set_xlabel("observations per path")
        ax.set_ylabel("distinct paths")
        ax.set_title("Path frequency distribution")
        return _save(fig, path)


def plot_signatures(sigs: Mapping[str, SignatureHistogram], path: str | Path) -> Path:
    """One panel per signature; the exact-zero mass is drawn as a separate bar left of 0."""
    with plt.rc_context(RC):
        n = len(sigs)
        fig, axes = plt.subplots(1, n, figsize=(2.6 * n, 2.6), sharey=True, squeeze=False)
        for ax, (name, sig) in zip(axes[0], sigs.items()):
            edges = sig.edges
            w = edges[1] - edges[0]
            ax.bar([-w], [sig.zero_mass], width=w, align="edge", color="#c44e52", label="= 0")
            ax.bar(edges[:-1], sig.masses, width=w, align="edge", color="#4c72b0")
            ax.set_xlim(-w, 1)
            ax.set_ylim(0, 1)
            ax.set_title(name)
            ax.set_xlabel("similarity")
        axes[0][0].set_ylabel("share of edge pairs")
        return _save(fig, path)


def _layout(tree: HierarchyTree) -> tuple[dict[int, tuple[float, float]], list[str]]:
    pos: dict[int, tuple[float, float]] = {}
    leaves: list[str] = []

    def place(node: TreeNode) -> float:
        if node.is_leaf:
            x = float(len(leaves))
            leaves.append(node.label)
        else:
            x = float(np.mean([place(c) for c in node.children]))
        pos[id(node)] = (x, node.height)
        return x

    place(tree.root)
    return pos, leaves


def plot_dendrogram(tree: HierarchyTree, path: str | Path) -> Path:
    """Dendrogram with merge heights on the vertical axis."""
    pos, leaves = _layout(tree)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(4, 0.35 * len(leaves)), 3.5))
        for node in tree.root.walk():
            if node.is_leaf:
                continue
            x, y = pos[id(node)]
            xs = [pos[id(c)][0] for c in node.children]
            ax.plot([min(xs), max(xs)], [y, y], color="k", lw=0.8)
            for c in node.children:
                cx, cy = pos[id(c)]
                ax.plot([cx, cx], [cy, y], color="k", lw=0.8)
        ax.set_xticks(range(len(leaves)))
        ax.set_xticklabels(leaves, rotation=90)
        ax.set_ylabel("merge height")
        ax.set_title("Endpoint hierarchy")
        return _save(fig, path)
