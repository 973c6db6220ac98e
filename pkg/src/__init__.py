"""
Main package initialization for the transcendental Hénon map workbench.
"""
__version__ = "0.1.0"
