import os
from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Library-wide defaults for quadrature, norm estimation and the experiment sweeps.
    Values can be pinned in a local .env file; process environment variables are ignored.
    """
    model_config = SettingsConfigDict(extra="ignore", case_sensitive=True)

    # Logging
    LOG_LEVEL: str = "INFO"

    # PV quadrature
    FOLD_RADIUS: float = 0.5
    TRUNCATION_RADIUS: float = 40.0
    BASE_PANELS: int = 8
    MAX_REFINE_DEPTH: int = 30
    REL_TOL: float = 1e-8
    ABS_TOL: float = 1e-10
    MAX_PANELS: int = 20000

    # Norm estimation
    X_MIN_LOG: float = 1e-3
    SUP_SAMPLES: int = 2001
    HOLDER_GRID_POINTS: int = 401
    HOLDER_STEPS: tuple[float, ...] = (1e-3, 1e-2, 1e-1, 1.0)
    HOLDER_FAR_POINTS: int = 32
    DEFAULT_SEED: int = 0x5EED

    # Sweeps
    LAMBDA_SWEEP: tuple[float, ...] = (16.0, 64.0, 256.0, 1024.0, 4096.0)
    Y_GRID_POINTS: int = 24
    Y_GRID_MIN: float = 1e-2
    Y_GRID_MAX: float = 3.0
    # λy of the near-zero diagnostic points; y = c/λ is placed per λ
    Y_GRID_DIAGNOSTIC: tuple[float, ...] = (1e-3, 1e-2)
    TABULATION_SPACING: float = 0.25

    # Certification thresholds
    REFINEMENT_GROWTH: float = 0.05
    WINDOW_GROWTH: float = 0.10
    NOISE_FRACTION: float = 0.10

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # Only explicit kwargs and the optional .env file; never os.environ.
        return (init_settings, dotenv_settings)


@lru_cache()
def get_settings() -> Settings:
    """
    Returns a cached instance of the Settings object.
    Loads from .env file if present (for local runs).
    """
    if os.path.exists(".env"):
        return Settings(_env_file=".env", _env_file_encoding="utf-8")
    return Settings()
