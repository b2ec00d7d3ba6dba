"""
Seven-pass schedule
===================

Train the flow-stress model, run 4 mm down to 1.44 mm, and write the
per-pass CSV reports into ``demo_results/``.
"""

from rollsim import pipeline

config = pipeline.load_config("schedule.ini")
model, metrics = pipeline.train_command(config)
print(f"test MSE {metrics['test_mse']:.2f} MPa^2")

reports = pipeline.run_schedule(config, model, outdir="demo_results")
print("pass  strain  neutral[deg]  mean[MPa]  W_max[m]")
for r in reports:
    flag = " (extrapolated)" if r.extrapolated else ""
    print(f"{r.pass_index:4d}  {r.true_strain:6.3f}  {r.neutral_deg:12.3f}  "
          f"{r.mean_pressure_mpa:9.1f}  {r.max_deflection_m:.3e}{flag}")
