"""
SVG rendering of profile curves in the quadrant.

Each curve is drawn as its own artist with an SVG id of ``curve-<label>``;
the diagonal line is ``ell`` and the axes are ``axis-x`` / ``axis-y``.
"""
import io
import logging
import math
from typing import NamedTuple

import matplotlib
import numpy as np
from django.utils.text import slugify
from matplotlib.figure import Figure

from .exceptions import ShrinkerError
from .exports import atomic_write

logger = logging.getLogger(__name__)

CURVE_COLOURS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


class LabeledCurve(NamedTuple):
    label: str
    points: np.ndarray


def curve_id(label):
    return f"curve-{slugify(label) or 'unnamed'}"


def _extent(curves):
    stacked = np.vstack([np.asarray(c.points, dtype=float).reshape(-1, 2) for c in curves])
    finite = stacked[np.all(np.isfinite(stacked), axis=1)]
    if not len(finite):
        raise ShrinkerError("Curves contain no finite points")
    return 1.05 * float(finite.max())


def render_svg(curves, p, path, size=600, margin=0.08):
    """Write a standalone SVG of the quadrant, the diagonal and every labeled curve."""
    curves = [LabeledCurve(label, np.asarray(points, dtype=float)) for label, points in curves]
    if not curves:
        raise ShrinkerError("Nothing to draw: curve list is empty")
    ids = [curve_id(c.label) for c in curves]
    if len(set(ids)) != len(ids):
        raise ShrinkerError(f"Curve labels must be distinct, got {ids}")

    extent = _extent(curves)
    fig = Figure(figsize=(size / 100, size / 100), dpi=100)
    fig.subplots_adjust(left=margin, right=1 - margin, bottom=margin, top=1 - margin)
    ax = fig.add_subplot()
    ax.set_xlim(0, extent)
    ax.set_ylim(0, extent)
    ax.set_aspect('equal')
    ax.set_xlabel('x')
    ax.set_ylabel('y')

    ax.plot([0, extent], [0, 0], color='black', linewidth=1.0, gid='axis-x')
    ax.plot([0, 0], [0, extent], color='black', linewidth=1.0, gid='axis-y')
    reach = extent * math.sqrt(2.0)
    beta = p.ell_angle
    ax.plot([0, reach * math.cos(beta)], [0, reach * math.sin(beta)],
            color='grey', linestyle='--', linewidth=0.8, gid='ell')

    for index, (curve, gid) in enumerate(zip(curves, ids)):
        points = curve.points.reshape(-1, 2)
        ax.plot(points[:, 0], points[:, 1], color=CURVE_COLOURS[index % len(CURVE_COLOURS)],
                linewidth=1.2, label=curve.label, gid=gid)
    ax.legend(loc='upper right', fontsize='small')

    buffer = io.BytesIO()
    with matplotlib.rc_context({'svg.hashsalt': 'shrinkers', 'svg.fonttype': 'none'}):
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    logger.info("Rendered %d curve(s) to %s", len(curves), path)
    return atomic_write(path, buffer.getvalue())
