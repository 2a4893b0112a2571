"""
DISC Adaptive FEM - Configuration Settings
Uses pydantic-settings for environment variable management
"""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # Logging
    log_format: str = Field(default="console", alias="LOG_FORMAT")
    log_colors: bool = Field(default=True, alias="LOG_COLORS")
    log_level: str = Field(default="info", alias="LOG_LEVEL")

    # Linear solver
    cg_rel_tol: float = Field(default=1e-10, gt=0.0, alias="DISC_CG_REL_TOL")
    cg_max_iterations: int = Field(default=50_000, ge=1, alias="DISC_CG_MAX_ITERATIONS")

    # Adaptive quadrature (generic entry point)
    quad_tol: float = Field(default=1e-8, gt=0.0, alias="DISC_QUAD_TOL")
    quad_max_depth: int = Field(default=12, ge=0, alias="DISC_QUAD_MAX_DEPTH")

    # Adaptive quadrature used for local data errors (GREEDY inner loop)
    approx_quad_tol: float = Field(default=1e-8, gt=0.0, alias="DISC_APPROX_QUAD_TOL")
    approx_quad_max_depth: int = Field(default=6, ge=0, alias="DISC_APPROX_QUAD_MAX_DEPTH")

    # Adaptive quadrature used for error norms on interface / singular elements
    error_quad_tol: float = Field(default=1e-12, gt=0.0, alias="DISC_ERROR_QUAD_TOL")
    error_quad_rel_tol: float = Field(default=1e-8, ge=0.0, alias="DISC_ERROR_QUAD_REL_TOL")
    error_quad_max_depth: int = Field(default=7, ge=0, alias="DISC_ERROR_QUAD_MAX_DEPTH")
    singular_quad_max_depth: int = Field(default=12, ge=0, alias="DISC_SINGULAR_QUAD_MAX_DEPTH")

    # Data approximation
    linf_sample_order: int = Field(default=8, ge=1, alias="DISC_LINF_SAMPLE_ORDER")
    greedy_max_elements: int = Field(default=2_000_000, ge=1, alias="DISC_GREEDY_MAX_ELEMENTS")
    repair_constant: float = Field(default=4.0, ge=4.0, alias="DISC_REPAIR_CONSTANT")

    # Experiment output
    record_timing: bool = Field(default=False, alias="DISC_RECORD_TIMING")
    output_dir: str = Field(default="results", alias="DISC_OUTPUT_DIR")


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
