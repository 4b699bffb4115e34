"""Arm elevation from low-cost IMUs: fusion pipeline, task simulator and validation metrics."""
