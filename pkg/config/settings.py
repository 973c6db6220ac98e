"""
Configuration settings for the Hénon workbench.
"""
import os
from typing import Dict, Any, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Workbench configuration settings."""

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    # Parallelism
    HENON_WORKERS: Optional[int] = None

    # Orbit classification
    ORBIT_R_BOUND: float = 2.0
    ORBIT_R_ESCAPE: float = 1e3
    ORBIT_TAIL_FRACTION: float = 0.25
    ORBIT_CAUCHY_TOL: float = 1e-6

    # Newton solvers
    NEWTON_MAX_ITER: int = 200
    NEWTON_DIVERGENCE: float = 1e6
    NEWTON_DEDUP_RADIUS: float = 1e-6

    # Baker domain
    BAKER_ALPHA_MIN: float = 1e-3
    BAKER_ALPHA_MAX: float = 10.0
    BAKER_ALPHA_NODES: int = 60
    BAKER_PULLBACK_STEPS: int = 500

    # Runge engine
    RUNGE_START_DEGREE: int = 8
    RUNGE_DEGREE_CAP: int = 512
    RUNGE_COND_LIMIT: float = 1e14
    RUNGE_RESIDUAL_LIMIT: float = 1e-10

    # Oscillating construction
    OSC_C: float = 0.9
    OSC_A_PRIME: float = 0.55
    OSC_A_SECOND: float = 0.45
    OSC_ROUNDS: int = 3
    OSC_EPS_RETRIES: int = 6
    OSC_THETA_RETRIES: int = 3

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Performance Monitoring
    ENABLE_PERFORMANCE_MONITORING: bool = True
    THROUGHPUT_WARNING: float = 1e5  # pixel-orbits per second

    def worker_count(self) -> int:
        """Resolve the worker count, falling back to the CPU count."""
        if self.HENON_WORKERS and self.HENON_WORKERS > 0:
            return self.HENON_WORKERS
        return os.cpu_count() or 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return {
            "parallel": {
                "workers": self.worker_count()
            },
            "orbit": {
                "r_bound": self.ORBIT_R_BOUND,
                "r_escape": self.ORBIT_R_ESCAPE,
                "tail_fraction": self.ORBIT_TAIL_FRACTION,
                "cauchy_tol": self.ORBIT_CAUCHY_TOL
            },
            "newton": {
                "max_iter": self.NEWTON_MAX_ITER,
                "divergence": self.NEWTON_DIVERGENCE,
                "dedup_radius": self.NEWTON_DEDUP_RADIUS
            },
            "baker": {
                "alpha_min": self.BAKER_ALPHA_MIN,
                "alpha_max": self.BAKER_ALPHA_MAX,
                "alpha_nodes": self.BAKER_ALPHA_NODES,
                "pullback_steps": self.BAKER_PULLBACK_STEPS
            },
            "runge": {
                "start_degree": self.RUNGE_START_DEGREE,
                "degree_cap": self.RUNGE_DEGREE_CAP,
                "cond_limit": self.RUNGE_COND_LIMIT,
                "residual_limit": self.RUNGE_RESIDUAL_LIMIT
            },
            "oscillate": {
                "c": self.OSC_C,
                "a_prime": self.OSC_A_PRIME,
                "a_second": self.OSC_A_SECOND,
                "rounds": self.OSC_ROUNDS,
                "eps_retries": self.OSC_EPS_RETRIES,
                "theta_retries": self.OSC_THETA_RETRIES
            },
            "logging": {
                "level": self.LOG_LEVEL,
                "file": self.LOG_FILE
            },
            "performance": {
                "enabled": self.ENABLE_PERFORMANCE_MONITORING,
                "throughput_warning": self.THROUGHPUT_WARNING
            }
        }


# Create settings instance
settings = Settings()
