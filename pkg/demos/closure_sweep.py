"""Which potentials close every bounded orbit?

Sweep 20 energies x 5 angular momenta and compare the apsidal angle
(pericenter to pericenter, in phi) across the sweep.  The two closing
potentials give one rational multiple of 2 pi; any other power law
spreads out.

    python3 demos/closure_sweep.py
"""

from bertrand.dynamics import CentralField, closure_test
from bertrand.potentials import Potential
from bertrand.surfaces import FirstTypeSpec, SurfaceSpec

plane = FirstTypeSpec(1.0, 0.0)
cases = [
    ("plane, -1/r", plane, Potential(1)),
    ("plane, r^2/2", plane, Potential(2)),
    ("plane, -r^-1.5", plane, CentralField(V_r=lambda r: -(r**-1.5), dV_r=lambda r: 1.5 * r**-2.5)),
    ("mu=3/2 (3,-2), oscillator", SurfaceSpec(1.5, 3.0, -2.0), Potential(2)),
    ("mu=1/2 (1,1), oscillator", SurfaceSpec(0.5, 1.0, 1.0), Potential(2)),
    ("mu=2 (1,0), gravity", SurfaceSpec(2.0, 1.0, 0.0), Potential(1)),
]

for label, s, V in cases:
    v = closure_test(s, V)
    print(f"{label:<28} Phi={v.Phi:.10f}  spread={v.spread:.1e}  "
          f"Phi/2pi={v.rational or '-':<5} {v.verdict}")
