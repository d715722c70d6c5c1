"""Patch-based encoder-decoder segmentation and object counting for
plant-organ images: annotation rasterization, network training, tiled
inference, post-processing, connected-component analysis and evaluation.
"""

__version__ = "0.1.0"
