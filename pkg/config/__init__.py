"""
Configuration package initialization.
Exposes the global settings instance and the run-config loaders.
"""
from .settings import Settings, settings
from .run_config import MapConfig, RunConfig, load_run_config

__all__ = ["Settings", "settings", "MapConfig", "RunConfig", "load_run_config"]
