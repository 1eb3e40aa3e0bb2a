import logging
from typing import Optional, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

logger = logging.getLogger(__name__)


class IQPSettings(BaseSettings):
    """Size caps and worker settings for the simulators and enumerators."""

    # Dense 2^n state space (Fourier backend, bias_from_f)
    fourier_max_qubits: int = Field(24, description="Largest n simulated by the Fourier backend")
    # 2^k path enumeration
    pathsum_max_rows: int = Field(20, description="Largest row count for the path-sum backend")
    # 2^rank codeword enumeration
    enumeration_max_rank: int = Field(28, description="Largest code rank for weight enumeration")
    # Reductions certification
    statevector_max_qubits: int = Field(20, description="Largest qubit count for dense statevectors")
    # Exact filtered biases behind the verifier thresholds
    calibration_max_qubits: int = Field(16, description="Largest n for which verification is calibrated exactly")

    threads: int = Field(1, description="Worker threads for parallel enumeration")
    log_level: str = Field("INFO", description="Logging level for library callers")

    model_config = SettingsConfigDict(env_prefix="IQP_", extra="ignore")

    @field_validator(
        "fourier_max_qubits",
        "pathsum_max_rows",
        "enumeration_max_rank",
        "statevector_max_qubits",
        "calibration_max_qubits",
        "threads",
    )
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value


class CLISettings(IQPSettings):
    """
    Settings built from command-line flags only.

    The CLI contract is flags-only, so environment variables and dotenv
    files are ignored here.
    """

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


_cached_settings: Optional[IQPSettings] = None


def get_settings() -> IQPSettings:
    """Load and cache library settings (IQP_* environment variables)."""
    global _cached_settings
    if _cached_settings is None:
        _cached_settings = IQPSettings()
        logger.debug(
            f"Settings loaded: fourier<={_cached_settings.fourier_max_qubits}, "
            f"pathsum<={_cached_settings.pathsum_max_rows}, "
            f"rank<={_cached_settings.enumeration_max_rank}, "
            f"threads={_cached_settings.threads}"
        )
    return _cached_settings


def resolve_settings(settings: Optional[IQPSettings]) -> IQPSettings:
    """Return the explicit settings or the cached defaults."""
    return settings if settings is not None else get_settings()
