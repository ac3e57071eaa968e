"""Configuration management for the pair-calibration toolkit."""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix ``PAIRCAL_``)."""

    model_config = SettingsConfigDict(
        env_prefix="PAIRCAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Runtime
    threads: int = Field(default=1, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    output_dir: str = "./outputs"

    # Numerical tolerances
    normalization_tol: float = 1e-9
    roundtrip_tol: float = 1e-12
    symmetry_tol_oracle: float = 1e-9
    symmetry_tol_trained: float = 1e-6
    max_alphabet: int = 64

    # Decoding budgets
    rejection_budget: int = Field(default=1000, ge=1)
    top1_sample_budget: int = Field(default=6400, ge=1)

    def worker_count(self, requested: int | None = None) -> int:
        """Return the number of workers to use, capped by ``threads``."""
        if requested is None:
            return self.threads
        return max(1, min(requested, self.threads))


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
