"""
Runtime configuration

Values come from the environment (optionally a .env file) with sensible defaults,
see .env.example for the full list.
"""
import os
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

DEFAULT_METHODS = "gaussian,kutin,dacsynth,greedy:H_sum,greedy:h_prod,greedy:H_prod,lu+greedy:H_sum"


class Settings(BaseModel):
    """Process-wide settings resolved from environment variables"""
    log_level: str = Field("INFO", description="loguru level for the stderr sink")
    tables_dir: str = Field("data/tables", description="Cache directory for block tables")
    max_resets_factor: int = Field(20, ge=1, description="Greedy reset budget per wire")
    greedy_max_wires: int = Field(200, ge=2, description="Greedy methods are skipped above this size")
    default_methods: str = Field(DEFAULT_METHODS, description="Comma separated portfolio")
    jobs: int = Field(1, ge=1, description="Worker processes for benchmarks and resynthesis")
    seed: int = Field(0, ge=0, description="Default RNG seed")
    api_host: str = "0.0.0.0"
    api_port: int = 8000

    @property
    def method_list(self) -> List[str]:
        return [m.strip() for m in self.default_methods.split(",") if m.strip()]

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            log_level=os.getenv("LINSYNTH_LOG_LEVEL", "INFO"),
            tables_dir=os.getenv("LINSYNTH_TABLES_DIR", "data/tables"),
            max_resets_factor=int(os.getenv("LINSYNTH_MAX_RESETS_FACTOR", "20")),
            greedy_max_wires=int(os.getenv("LINSYNTH_GREEDY_MAX_WIRES", "200")),
            default_methods=os.getenv("LINSYNTH_DEFAULT_METHODS", DEFAULT_METHODS),
            jobs=int(os.getenv("LINSYNTH_JOBS", "1")),
            seed=int(os.getenv("LINSYNTH_SEED", "0")),
            api_host=os.getenv("LINSYNTH_API_HOST", "0.0.0.0"),
            api_port=int(os.getenv("LINSYNTH_API_PORT", "8000")),
        )


# Global instance (singleton pattern)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global settings"""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment"""
    global _settings
    _settings = None
