"""Geodesics of equal length on a surface with (c, d) = (1, -1), mu = 2.

Every geodesic leaving the equator returns to it, with the same velocity,
after one full turn in phi.  Each one takes the same length to do it.
Launch angles span 10 to 80 degrees.

    python3 demos/zoll_geodesics.py
"""

import math

import numpy as np

from bertrand.dynamics import OrbitState, integrate_theta_chart
from bertrand.surfaces import SurfaceSpec, realizable_in_R3

s = SurfaceSpec(2.0, 1.0, -1.0)
th0 = -1.0  # equator, theta^4 = -d
q0, f0 = s.q(th0), s.f_theta(th0)
print(f"region {s.region.value}, k={s.k}, realizable in R^3: {realizable_in_R3(s)}")

for deg in np.arange(10, 90, 10):
    psi = math.radians(deg)
    # unit speed: K = f cos(psi), theta' = Q sin(psi)
    K, thd = f0 * math.cos(psi), q0 * math.sin(psi)
    traj = integrate_theta_chart(s, None, OrbitState(0.0, th0, thd, 0.0), K, 100.0, tol=1e-12,
                                 phi_target=2 * math.pi)
    end = traj.stop_state
    gap = math.hypot(end[0] - th0, end[1] - thd)
    print(f"launch {deg:2d} deg: length {traj.stop_t:.10f}  endpoint gap {gap:.1e}  "
          f"turning theta {traj.theta.min():+.4f}")
