"""A reduced version of the full ten-task reproduction sweep.

Run with ``python demos/05_reproduction_table.py``. The full sweep is
``armfusion sweep --seeds 5 --json sweep.json``.
"""
# %% [markdown]
# # Ten tasks, two rates
#
# Every task is simulated with default noise, fused and scored. The table
# shows mean[SD] over seeds of the peak cross-correlation, RMSE and average
# absolute error in degrees. Quasi-static tasks report NA for r.

# %%
from armfusion import experiments

result = experiments.sweep(rates=(100.0,), n_seeds=2)
print(result.to_table())

# %% [markdown]
# The group means at the bottom compare slow and fast tasks. The JSON form
# keeps every individual trial.

# %%
data = result.to_dict()
print(data["groups"])
print(len(data["trials"]), "trials")
