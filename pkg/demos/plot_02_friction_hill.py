"""
Friction hill of a single pass
==============================

March the slab equation from both ends of the arc of contact and read off
the neutral point where the two branches meet.
"""

import math

from rollsim import analytical, slab
from rollsim.material import ConstantFlowStress

geom = slab.RollPassGeometry(entry_thickness=4.0, exit_thickness=3.24, roll_radius=75.0,
                             friction=0.1)
alpha = slab.contact_angle(geom)
print(f"contact angle {math.degrees(alpha):.3f} deg, arc {slab.contact_length(geom):.2f} mm")

# A constant flow stress keeps the picture simple; demo 04 uses the trained model.
profile = slab.solve_pass(geom, ConstantFlowStress(600.0))
print(f"neutral point {math.degrees(profile.neutral_angle):.3f} deg at "
      f"{profile.neutral_pressure:.1f} MPa, mean {slab.mean_pressure(profile):.1f} MPa")
print(f"closed-form neutral angle "
      f"{math.degrees(analytical.analytical_neutral_angle(alpha, 0.1)):.3f} deg")

phi, q = slab.composite(profile)
for p, v in list(zip(phi, q))[::50]:
    print(f"{math.degrees(p):6.2f} deg  {v:7.1f} MPa")

# More friction raises the hill.
for mu in (0.08, 0.1, 0.15, 0.2):
    g = slab.RollPassGeometry(4.0, 3.24, friction=mu)
    prof = slab.solve_pass(g, ConstantFlowStress(600.0))
    print(f"mu = {mu:4.2f}: peak {prof.neutral_pressure:7.1f} MPa at "
          f"{math.degrees(prof.neutral_angle):.3f} deg")
