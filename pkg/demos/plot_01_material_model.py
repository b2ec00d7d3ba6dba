"""
Flow-stress model from tensile tests
====================================

Convert raw tensile records to true stress and strain, split them, and fit
the 2-10-1 network with Levenberg-Marquardt.
"""

import numpy as np

from rollsim import material, surrogate

# The packaged dataset is a synthetic stand-in generated by rollsim.surrogate.
# Point ``material.load_dataset`` at a real CSV to use measured data instead.
samples = surrogate.load_shipped()
print(f"{len(samples)} samples at rates", sorted({s.strain_rate for s in samples}))

# One raw record, converted by hand: 0.32 mm on a 32 mm gauge is 1% strain.
rec = material.RawTensileRecord(strain_rate=0.001, extension=0.32, force=2400.0)
print(material.convert_raw(rec))

config = material.TrainingConfig(seed=0)
train_set, val, test = material.split_dataset(samples, config)
model, history = material.train_with_history(train_set, val, config)
print(f"best epoch {history['best_epoch']}, stopped by {history['stop_reason']}")
print(f"test RMSE {np.sqrt(material.mse(model, test)):.2f} MPa")

# Flow curves at the four test rates, ready to plot.
strain = np.linspace(0, 0.44, 12)
print("strain  " + "  ".join(f"{r:>8g}" for r in (0.00052, 0.001, 0.0052, 0.052)))
for e in strain:
    row = [model.predict(e, r) for r in (0.00052, 0.001, 0.0052, 0.052)]
    print(f"{e:6.3f}  " + "  ".join(f"{v:8.1f}" for v in row))

# Strains past the training range are flagged, not silently trusted.
print(model.predict(1.2, 0.052, return_flag=True))
