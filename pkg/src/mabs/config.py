from __future__ import annotations

from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Randomness / provider
    seed: Optional[int] = Field(default=None, ge=0)
    provider: str = Field(default="production")
    mock_order: int = Field(default=1009, ge=11)
    mock_seed: int = Field(default=0, ge=0)
    security_parameter: Optional[int] = Field(default=None, ge=1)

    # Hybrid envelope
    kdf: str = Field(default="hkdf-sha256")
    aead: str = Field(default="aes-256-gcm")

    # Revocation
    prime_extra_bits: int = Field(default=64, ge=2, le=512)

    # Simulator
    identity_attribute_name: str = Field(default="s", pattern=r"^[A-Za-z0-9_-]+$")
    dcc_latency_ms: int = Field(default=5, ge=0)
    wan_latency_ms: int = Field(default=20, ge=0)
    nan_latency_ms: int = Field(default=10, ge=0)
    ban_latency_ms: int = Field(default=2, ge=0)

    # Bench
    bench_iterations: int = Field(default=100, ge=1)
    bench_min_iterations: int = Field(default=100, ge=1)

    # DCC relay
    relay_host: str = Field(default="127.0.0.1")
    relay_port: int = Field(default=8000, ge=1, le=65535)
    relay_hmac_secret: Optional[str] = Field(default=None)
    relay_hmac_header: str = Field(default="X-Signature")
    relay_hmac_prefix: str = Field(default="sha256=")
    max_request_size: int = Field(default=8 * 1048576, ge=1024)  # 8MB

    # Logging
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="json")

    @field_validator("provider")
    @classmethod
    def validate_provider(cls, v):
        valid_providers = ["production", "mock"]
        if v.lower() not in valid_providers:
            raise ValueError(f"provider must be one of {valid_providers}")
        return v.lower()

    @field_validator("kdf")
    @classmethod
    def validate_kdf(cls, v):
        valid_kdfs = ["hkdf-sha256"]
        if v.lower() not in valid_kdfs:
            raise ValueError(f"kdf must be one of {valid_kdfs}")
        return v.lower()

    @field_validator("aead")
    @classmethod
    def validate_aead(cls, v):
        valid_aeads = ["aes-256-gcm", "chacha20-poly1305"]
        if v.lower() not in valid_aeads:
            raise ValueError(f"aead must be one of {valid_aeads}")
        return v.lower()

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")
        return v.upper()

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v):
        valid_formats = ["json", "text"]
        if v.lower() not in valid_formats:
            raise ValueError(f"log_format must be one of {valid_formats}")
        return v.lower()

    model_config = SettingsConfigDict(env_prefix="MABS_", env_file=".env", case_sensitive=False)


SETTINGS = Settings()
