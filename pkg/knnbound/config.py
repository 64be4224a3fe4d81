"""
Application configuration using pydantic-settings.

Loads configuration from environment variables (prefix ``KNNBOUND_``) with
validation and defaults. CLI flags always take precedence over these values.
"""

import os
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="KNNBOUND_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "knnbound"
    version: str = "0.1.0"
    environment: Literal["development", "staging", "production"] = "development"

    # Logging
    log_level: str = "INFO"
    log_format: Literal["json", "text"] = "text"

    # Execution
    workers: int = Field(default=1, description="Worker processes for trial-level parallelism")
    default_seed: int = Field(default=0, description="Master seed when no --seed is given")
    default_test_size: int = Field(
        default=100_000, description="Fresh out-of-sample examples per trial"
    )
    max_r: int = Field(default=16, description="Largest supported number of validation subsets")
    q_cap: int = Field(
        default=256, description="Default cap on sampled permutations for the CLI"
    )

    # Loader limits
    max_file_size_mb: int = Field(default=200, description="Maximum dataset/config file size")
    yaml_max_depth: int = Field(
        default=20, description="Maximum nesting depth for YAML/JSON parsing"
    )
    yaml_max_aliases: int = Field(
        default=100, description="Maximum number of YAML aliases to prevent bombs"
    )

    @field_validator("workers", mode="before")
    @classmethod
    def parse_workers(cls, v: int | str) -> int:
        """Accept 'auto' as the CPU count."""
        if isinstance(v, str) and v.strip().lower() == "auto":
            return os.cpu_count() or 1
        return int(v)

    @field_validator("workers", "default_test_size", "max_r", "q_cap")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        """Counts must be positive."""
        if v < 1:
            raise ValueError("must be a positive integer")
        return v


# Global settings instance
settings = Settings()
