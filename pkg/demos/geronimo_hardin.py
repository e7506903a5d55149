"""The Geronimo-Hardin surface family: verdicts across s and the invariant hexagon.

Usage: python3 demos/geronimo_hardin.py
"""

import numpy as np

from fslab.attractor import chaos_game
from fslab.furstenberg import GOLDEN_THRESHOLD, certificate_pipeline, gh_canonical, gh_hexagon, overlap_certificate_gh
from fslab.surface import build_geronimo_hardin

print(f"certificate threshold (1+sqrt5)/4 = {GOLDEN_THRESHOLD:.9f}")
print(f"{'s':>6} {'t0':>8} {'verdict':>20} {'Q':>3} {'bound':>8} {'3-t0':>8}")
for s in np.linspace(0.6, 0.98, 12):
    v = certificate_pipeline(build_geronimo_hardin(float(s), 1.0))
    tr = v.trace
    Q = tr.get("overlap", {}).get("Q", "-")
    bound = tr.get("covering_bound")
    print(f"{s:6.3f} {v.t0:8.5f} {v.status:>20} {Q!s:>3} {bound if bound is None else f'{bound:8.5f}'!s:>8} "
          f"{tr['target']:8.5f}")

s = 0.9
hexagon = gh_hexagon(s)
cert = overlap_certificate_gh(s)
print(f"\ns={s}: hexagon vertex A={hexagon.A.round(4)}, all images inside: {all(hexagon.contained)}")
print(f"image arrangement depth {cert.depth}, triple h1 h2 h3 empty: {cert.detail['triple_123_empty']}")

fam = gh_canonical(s)
pts = chaos_game(fam.maps, fam.weights, 100_000, seed=1).points
print(f"100000 Furstenberg samples inside the hexagon: {hexagon.polygon.contains_points(pts, 1e-9).all()}")
