import os
from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="DELAYSTAB_", env_file=".env", extra="ignore")

    log: str = "WARNING"

    # characteristic roots
    marginal_tol: float = 1e-9
    root_tol: float = 1e-12
    bisection_width: float = 1e-10
    contour_margin: float = 0.5
    contour_density: int = 32
    contour_min_points: int = 64
    contour_max_depth: int = 60
    contour_residual: float = 1e-14
    contour_retries: int = 5
    newton_maxiter: int = 60

    # Hopf crossing search on [0, omega_c]
    crossing_grid: int = 2048
    crossing_xtol: float = 1e-12

    # boundary tracing
    u_min: float = 1e-4
    u_max: float = 100.0
    boundary_points: int = 4000
    boundary_e_max: float = 1e4
    boundary_s_tol: float = 1e-10
    boundary_max_da: float = 0.02
    boundary_refine_passes: int = 6

    # quadrature and discretisation
    quad_abs_tol: float = 1e-10
    tail_mass: float = 1e-12
    simulation_atoms: int = 64

    jobs: int = 0
    seed: int = 0
    archive_path: Optional[str] = None

    @property
    def workers(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)


@lru_cache
def get_settings() -> Settings:
    return Settings()
