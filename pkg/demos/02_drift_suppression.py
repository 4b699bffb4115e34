"""How the band-pass and the accelerometer Slerp hold a biased gyro in check.

Run with ``python demos/02_drift_suppression.py``.
"""
# %% [markdown]
# # Gyro bias that calibration missed
#
# A sensor is calibrated while still and level. Afterwards its gyro picks up
# a bias of 1 deg/s about X, which nothing subtracts. The arm never moves, so
# any elevation away from zero is pure error.

# %%
import math

import numpy as np

from armfusion import fusion
from armfusion.calibration import GRAVITY, SensorSample

RATE = 100.0
still = [SensorSample(k / RATE - 2.0, (0.0, 0.0, GRAVITY), (0.0, 0.0, 0.0)) for k in range(200)]
stream = [SensorSample((k + 1) / RATE, (0.0, 0.0, GRAVITY), (math.radians(1.0), 0.0, 0.0)) for k in range(6000)]


def error_trace(alpha):
    cfg = fusion.FusionConfig.default(RATE).with_alpha(alpha)
    t, elev = fusion.elevations(fusion.run(cfg, still, stream))
    return t, np.degrees(elev)


# %% [markdown]
# With the Slerp weight at zero only the gyro path is left. Plain integration
# would reach 60 deg after a minute. The 0.002 Hz high-pass turns the
# constant bias into a decaying one, so the error follows
# tau * (1 - exp(-t / tau)) with tau = 1 / (2 pi 0.002) = 79.6 s.

# %%
t, raw = error_trace(0.0)
tau = 1.0 / (2 * math.pi * 0.002)
for sec in (10, 30, 60):
    k = int(sec * RATE) - 1
    print(f"t = {sec:2d} s  gyro only {raw[k]:5.2f} deg   high-pass model {tau * (1 - math.exp(-t[k] / tau)):5.2f} deg")

# %% [markdown]
# With the default weight the accelerometer keeps pulling the swing back to
# the measured gravity direction, so the error settles below a degree.

# %%
_, fused = error_trace(fusion.DEFAULT_SLERP_ALPHA)
print(f"default fusion: worst error {np.abs(fused).max():.2f} deg, final {fused[-1]:.2f} deg")

# %% [markdown]
# A similar experiment from the shell uses task 7, where the arm is held
# nearly still while the trunk moves:
#
#     armfusion simulate --task 7 --ideal --late-bias 1,0,0
#     armfusion fuse imu.csv --alpha 0 --out drift.csv
