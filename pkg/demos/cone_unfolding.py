"""Unfold Kepler orbits on cones onto the plane.

A cone with xi = p/q is q copies of a plane sector glued edge to edge.  On
the plane a Kepler ellipse closes after one turn; on the cone the same orbit
needs q turns before the pattern repeats.  For irrational xi no finite
number of turns is enough.

    python3 demos/cone_unfolding.py [OUTDIR]
"""

import math
import sys
from pathlib import Path

from bertrand.cone_atlas import ConeSpec, closure_demo, covering_order, to_svg
from bertrand.potentials import Potential, circular_momentum, effective_potential

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

for text in ("1/8", "5/6", "3/2", repr(math.sqrt(2.0))):
    cone = ConeSpec.parse(text)
    s = cone.surface()
    # 20% above the circular orbit through r = 1
    K, _ = circular_momentum(s, Potential(1), 1.0)
    E0 = effective_potential(s, Potential(1), K, 1.0)
    demo = closure_demo(cone, 1, E0 + 0.2 * abs(E0), K)
    cov = covering_order(cone)
    sheets = "infinite" if cov.infinite else f"q={cov.q}, p={cov.p}"
    print(f"xi={text:>20}  sheets {sheets:<10}  Phi/2pi={demo.Phi / (2 * math.pi):.10f}  "
          f"gap after {demo.phi_span / (2 * math.pi):.0f} turns={demo.gap:.2e}  -> {demo.verdict}")
    name = "sqrt2" if cone.ratio is None else text.replace("/", "_")
    (out / f"cone_{name}.svg").write_text(to_svg(demo.points, cone))

print(f"SVGs written to {out}/")
