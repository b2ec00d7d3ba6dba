"""
Work-roll deflection
====================

The roll is a clamped-clamped Euler-Bernoulli beam carrying the strip
load over its central 22.5%.
"""

from rollsim import beam

spec = beam.BeamSpec()  # 0.2 m long, 0.15 m diameter, 211 GPa, 100 elements
load = beam.centered_load(spec, line_load=5.6e6)
profile = beam.solve(spec, load)
x, w = beam.max_deflection(profile)
print(f"max deflection {w:.3e} m at x = {x:.3f} m")
print(f"reactions sum to {profile.reactions.sum():.6g} N, load is {load.total():.6g} N")

# Check against the closed form for a fully loaded clamped beam.
full = beam.solve(spec, beam.LoadCase(1000.0, 0.0, spec.length))
print("FEM", full.deflections[50], "exact", beam.closed_form_uniform(spec, 1000.0, 0.1))

# A thicker roll deflects less, by the fourth power of the diameter.
for d in (0.15, 0.17, 0.19):
    s = beam.BeamSpec(diameter=d)
    print(f"d = {d:.2f} m: {beam.max_deflection(beam.solve(s, load))[1]:.3e} m")

for bc in beam.BOUNDARIES:
    s = beam.BeamSpec(boundary=bc)
    print(f"{bc:>16}: {beam.max_deflection(beam.solve(s, load))[1]:.3e} m")
