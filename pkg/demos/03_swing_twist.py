"""The rotation algebra behind the fusion step, one piece at a time.

Run with ``python demos/03_swing_twist.py``.
"""
# %% [markdown]
# # Swing and twist
#
# Gravity says nothing about heading, so the accelerometer can only correct
# the part of the orientation that tilts the sensor. The fusion step splits
# each orientation into a twist about world Z and a swing that carries the
# tilt, and blends only the swings.

# %%
import math

import numpy as np

from armfusion import rotmath as rm

R = rm.rot_z(0.8) @ rm.rot_y(0.6) @ rm.rot_x(-0.3)
Rz, Rxy = rm.decompose_z_xy(R)
print("twist angle (deg):", round(math.degrees(math.atan2(Rz[1, 0], Rz[0, 0])), 3))
print("recomposition error:", np.abs(Rz @ Rxy - R).max())

# %% [markdown]
# The swing has no Z component in quaternion form, which is what makes it
# free of heading.

# %%
q = rm.quat_from_matrix(R)
twist, swing = rm.swing_twist_z(q)
print("swing quaternion:", np.round(swing, 6))

# %% [markdown]
# Slerp moves a fraction of the way along the shortest arc between two
# swings. Here the gyro swing is pulled 10% toward a slightly different
# accelerometer swing.

# %%
_, swing_acc = rm.swing_twist_z(rm.quat_from_matrix(rm.rot_y(0.65) @ rm.rot_x(-0.3)))
blend = rm.slerp(swing, swing_acc, 0.1)
print("arc gyro->acc (deg):", round(math.degrees(rm.quat_angle(swing, swing_acc)), 3))
print("arc gyro->blend (deg):", round(math.degrees(rm.quat_angle(swing, blend)), 3))

# %% [markdown]
# Elevation is the angle between the arm axis and world down. It depends on
# the swing only, so the heading twist leaves it unchanged.

# %%
v0 = np.array([0.0, 0.0, -1.0])
print("elevation of R (deg):", round(math.degrees(rm.elevation_from_rotation(R, v0)), 3))
print("elevation of swing (deg):", round(math.degrees(rm.elevation_from_rotation(Rxy, v0)), 3))
tt = rm.tilt_torsion_from_rotation(R)
print("tilt from tilt-torsion (deg):", round(math.degrees(tt.tilt), 3))
