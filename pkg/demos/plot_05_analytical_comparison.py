"""
Plate formula against the beam model
====================================

Run after ``plot_04_multipass_schedule.py``; reads ``demo_results/summary.csv``.
"""

from rollsim import pipeline

config = pipeline.load_config("schedule.ini")
rows = pipeline.compare_command(config, outdir="demo_results")
print("strain   plate[m]    beam[m]     gap[m]")
for strain, ana, num in rows:
    print(f"{strain:6.3f}  {ana:.3e}  {num:.3e}  {num - ana:.3e}")

# The default rigidity is E t^3 / (12 (1 - nu)); the textbook form divides
# by 1 - nu^2 and gives a larger deflection.
for form in ("as-printed", "standard"):
    cfg = pipeline.load_config(text=f"[beam]\nrigidity_form = {form}\n")
    first = pipeline.compare_command(cfg, outdir="demo_results")[0]
    print(f"{form:>10}: pass 1 plate deflection {first[1]:.3e} m")

for d, x, w in pipeline.radius_study_command(config, [0.15, 0.19], outdir="demo_results"):
    print(f"roll diameter {d} m: {w:.3e} m")
