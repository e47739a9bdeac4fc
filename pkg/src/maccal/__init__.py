"""Mask-based classifier calibration lab.

Two-stage training with stochastic weight masking and adaptive retention,
plus the calibration metrics (ECE/AECE/MCE, reliability tables), OOD
scoring (AUROC/FPR95), and baselines (temperature scaling, focal loss,
label smoothing, mixup) needed to evaluate it on synthetic desk-scale
datasets.
"""

from .backend import active_backend

__version__ = "0.1.0"

__all__ = ["active_backend", "__version__"]
