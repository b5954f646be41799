"""Quadrature over a window of a uniformly sampled trace.

Pulses switch on and off exactly on grid points, so the sample sitting on a
window edge may belong to the other side of a jump.  The edge value is
therefore replaced by a quadratic extrapolation from the three neighbouring
samples inside the window (the one-sided limit), and the interior is
integrated with composite Simpson.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import simpson


def snap_index(t: np.ndarray, x: float) -> int:
    dt = t[1] - t[0]
    i = int(round((x - t[0]) / dt))
    return min(max(i, 0), len(t) - 1)


def integrate_window(t: np.ndarray, y: np.ndarray, a: float, b: float, one_sided: bool = True) -> float:
    """Integrate real samples ``y`` over ``[a, b]`` (snapped to the grid)."""
    ia, ib = snap_index(t, a), snap_index(t, b)
    if ib <= ia:
        return 0.0
    seg = np.array(y[ia : ib + 1], dtype=float)
    if one_sided and seg.size >= 5:
        seg[0] = 3.0 * seg[1] - 3.0 * seg[2] + seg[3]
        seg[-1] = 3.0 * seg[-2] - 3.0 * seg[-3] + seg[-4]
    if seg.size < 3:
        return float(np.trapezoid(seg, dx=t[1] - t[0]))
    return float(simpson(seg, dx=t[1] - t[0]))
