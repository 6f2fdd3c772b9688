"""Constrained Willmore descent on a wrinkled sphere.

Fixing surface area and enclosed volume fixes the isoperimetric ratio
and the scale, so the flow has a well-posed minimizer: the round sphere
of that volume. This script wrinkles an icosphere with 3% radial noise,
pins the targets at the smooth mesh's values, and descends.

The run has two phases. Random noise carries a lot of excess area, so
the initial constraint restoration must smooth most of it away just to
reach the pinned (area, volume) pair; that already removes the bulk of
the energy. The descent proper then grinds out the rest monotonically
while holding both constraints to a few parts in a billion.

Writes descent_trace.csv and descent_trace.svg to the current
directory.
"""

import math

import numpy as np

from willmore_iso import (
    FlowConfig,
    icosphere,
    perturb,
    run_flow,
    signed_volume,
    surface_area,
    willmore_energy,
)
from willmore_iso.sweep import energy_trace_svg

FOUR_PI = 4.0 * math.pi


if __name__ == "__main__":
    base = icosphere(3)
    a_ref = surface_area(base)
    v_ref = signed_volume(base)
    wrinkled = perturb(base, 0.03, seed=0)
    print(f"wrinkled start: W = {willmore_energy(wrinkled):.4f} "
          f"(the noise is mostly high-frequency curvature)")

    cfg = FlowConfig(max_iterations=600, gradient_tolerance=1e-9)
    final, trace = run_flow(wrinkled, cfg, area_target=a_ref, volume_target=v_ref)

    hist = trace.willmore_history
    print(f"after constraint restoration: W = {hist[0]:.6f}")
    if trace.retargeted:
        da = trace.area_target / a_ref - 1.0
        dv = trace.volume_target / v_ref - 1.0
        print(f"  (targets re-pinned to the nearest restorable pair: "
              f"area {da:+.1e}, volume {dv:+.1e} relative)")

    marks = [0, len(hist) // 4, len(hist) // 2, 3 * len(hist) // 4, len(hist) - 1]
    print("descent:")
    for k in marks:
        print(f"  iteration {int(trace.rows[k][0]):4d}:  W = {hist[k]:.6f}")

    w = willmore_energy(final)
    drift = max(
        abs(trace.final("area") - trace.area_target) / trace.area_target,
        abs(trace.final("volume") - trace.volume_target) / abs(trace.volume_target),
    )
    uptick = float(np.diff(hist).max()) if len(hist) > 1 else 0.0
    print(f"final: W = {w:.6f} ({w / FOUR_PI - 1.0:+.2%} of 4 pi), "
          f"status {trace.status}")
    print(f"  constraint drift {drift:.1e}, largest energy uptick {uptick:.1e} "
          f"(never positive on a monotone run)")

    with open("descent_trace.csv", "w", encoding="ascii") as fh:
        fh.write(trace.to_csv())
    with open("descent_trace.svg", "w", encoding="ascii") as fh:
        fh.write(energy_trace_svg(trace))
    print("wrote descent_trace.csv and descent_trace.svg")
