"""Wide-word FHE kernels, a toy RNS-CKKS scheme and an accelerator cost model."""

__version__ = "0.1.0"
