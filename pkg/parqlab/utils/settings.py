"""
Process-level settings read from the environment.

Values come from ``PARQLAB_*`` environment variables or a ``.env`` file in
the working directory.
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class ParqLabSettings(BaseSettings):
    """Settings shared by every command."""

    model_config = SettingsConfigDict(
        env_prefix="PARQLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    workers: int = Field(1, ge=1, description="Worker processes used to fan out seeds")
    log_level: str = Field("INFO", description="Minimum loguru level")
    output_root: str = Field("runs", description="Default output directory")


@lru_cache(maxsize=1)
def get_settings() -> ParqLabSettings:
    """Return the cached settings instance."""
    return ParqLabSettings()
