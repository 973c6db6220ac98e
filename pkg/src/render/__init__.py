"""
Slice renderer.
"""
from .renderer import ColorMode, Image, Thresholds, diverging, hue_to_rgb, render

__all__ = ["ColorMode", "Image", "Thresholds", "diverging", "hue_to_rgb", "render"]
