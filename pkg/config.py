"""
Configuration Management for rcfinsler
Handles environment variables, tolerances and logging setup
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pythonjsonlogger import jsonlogger

# Load environment variables
load_dotenv()

TRUE_VALUES = ("true", "1", "yes", "on")


class Config:
    """Base configuration class"""

    # Flask settings
    DEBUG = os.getenv("FLASK_DEBUG", "False").lower() in TRUE_VALUES
    JSON_SORT_KEYS = False

    # Sampling
    DEFAULT_SEED = int(os.getenv("RCF_SEED", 42))
    DEFAULT_SAMPLES = int(os.getenv("RCF_SAMPLES", 100))
    DEFAULT_GRID = int(os.getenv("RCF_GRID", 10))
    MAX_SAMPLES = int(os.getenv("RCF_MAX_SAMPLES", 100000))
    MAX_JOBS = int(os.getenv("RCF_JOBS", 4))
    SAMPLE_BOX = float(os.getenv("RCF_SAMPLE_BOX", 1.0))

    # Tolerances
    CONSISTENT_THRESHOLD = 1e-5
    DISCREPANT_THRESHOLD = 1e-3
    DISCREPANT_MIN_POINTS = 10
    VERIFY_TOLERANCE = float(os.getenv("RCF_VERIFY_TOLERANCE", 1e-5))
    VERIFY_MAX_ERROR_FRACTION = float(os.getenv("RCF_VERIFY_MAX_ERROR_FRACTION", 0.1))
    VALID_MARGIN = 0.05  # β − α > margin·α
    SIGMA_MARGIN = 0.1  # |β − 2α| > margin·α

    # Logging settings
    LOG_LEVEL = os.getenv("RCF_LOG", "INFO").upper()
    LOG_FILE = os.getenv("RCF_LOG_FILE", "")
    LOG_FORMAT = os.getenv("RCF_LOG_FORMAT", "text").lower()
    LOG_MAX_SIZE = int(os.getenv("LOG_MAX_SIZE", 10485760))  # 10MB
    LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", 5))

    @classmethod
    def validate_config(cls) -> Dict[str, Any]:
        """
        Validate configuration settings

        Returns:
            Dictionary with validation results and any errors
        """
        errors = []
        warnings = []

        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"RCF_LOG must be a logging level name, got {cls.LOG_LEVEL}")

        if cls.LOG_FORMAT not in ("text", "json"):
            errors.append("RCF_LOG_FORMAT must be 'text' or 'json'")

        if cls.MAX_JOBS < 1:
            errors.append("RCF_JOBS must be at least 1")
        elif cls.MAX_JOBS > 64:
            warnings.append("RCF_JOBS is very large (> 64 workers)")

        if cls.DEFAULT_SAMPLES < 10:
            warnings.append("Audits need at least 10 samples")
        if cls.DEFAULT_SAMPLES > cls.MAX_SAMPLES:
            errors.append("RCF_SAMPLES exceeds RCF_MAX_SAMPLES")

        if cls.SAMPLE_BOX <= 0:
            errors.append("RCF_SAMPLE_BOX must be positive")

        if not cls.CONSISTENT_THRESHOLD < cls.DISCREPANT_THRESHOLD:
            errors.append("Consistent threshold must be below the discrepant threshold")

        if not 0.0 <= cls.VERIFY_MAX_ERROR_FRACTION <= 1.0:
            errors.append("RCF_VERIFY_MAX_ERROR_FRACTION must lie in [0, 1]")

        return {"valid": len(errors) == 0, "errors": errors, "warnings": warnings}

    @classmethod
    def get_summary(cls) -> Dict[str, Any]:
        """
        Get a summary of current configuration

        Returns:
            Dictionary with configuration summary
        """
        return {
            "sampling": {
                "default_seed": cls.DEFAULT_SEED,
                "default_samples": cls.DEFAULT_SAMPLES,
                "default_grid": cls.DEFAULT_GRID,
                "max_samples": f"{cls.MAX_SAMPLES:,}",
                "jobs": cls.MAX_JOBS,
                "box": cls.SAMPLE_BOX,
            },
            "tolerances": {
                "consistent": cls.CONSISTENT_THRESHOLD,
                "discrepant": cls.DISCREPANT_THRESHOLD,
                "discrepant_min_points": cls.DISCREPANT_MIN_POINTS,
                "verify": cls.VERIFY_TOLERANCE,
                "verify_max_error_fraction": cls.VERIFY_MAX_ERROR_FRACTION,
                "valid_margin": cls.VALID_MARGIN,
                "sigma_margin": cls.SIGMA_MARGIN,
            },
            "logging": {
                "level": cls.LOG_LEVEL,
                "file": cls.LOG_FILE or None,
                "format": cls.LOG_FORMAT,
                "max_size": f"{cls.LOG_MAX_SIZE:,} bytes",
                "backup_count": cls.LOG_BACKUP_COUNT,
            },
        }


class DevelopmentConfig(Config):
    """Development configuration"""

    DEBUG = True
    LOG_LEVEL = os.getenv("RCF_LOG", "DEBUG").upper()


class ProductionConfig(Config):
    """Production configuration"""

    DEBUG = False
    LOG_FORMAT = os.getenv("RCF_LOG_FORMAT", "json").lower()

    # Keep request-driven sweeps bounded
    MAX_SAMPLES = int(os.getenv("RCF_MAX_SAMPLES", 5000))

    @classmethod
    def validate_production_config(cls) -> Dict[str, Any]:
        """
        Additional validation for production environment

        Returns:
            Dictionary with production-specific validation results
        """
        base_validation = cls.validate_config()
        errors = base_validation["errors"][:]
        warnings = base_validation["warnings"][:]

        if cls.DEBUG:
            errors.append("DEBUG should be False in production")

        return {"valid": len(errors) == 0, "errors": errors, "warnings": warnings}


class TestingConfig(Config):
    """Testing configuration"""

    TESTING = True
    DEBUG = True
    LOG_LEVEL = "WARNING"
    LOG_FILE = ""

    # Smaller budgets for faster tests
    DEFAULT_SAMPLES = 20
    MAX_SAMPLES = 2000
    MAX_JOBS = 2


CONFIG_MAP = {
    "development": DevelopmentConfig,
    "production": ProductionConfig,
    "testing": TestingConfig,
}


# Configuration factory
def get_config(config_name: Optional[str] = None) -> Config:
    """
    Get configuration class based on environment

    Args:
        config_name: Configuration name ('development', 'production', 'testing')

    Returns:
        Configuration class
    """
    if config_name is None:
        config_name = os.getenv("RCF_ENV", "development")

    return CONFIG_MAP.get(config_name, DevelopmentConfig)


def setup_logging(config: Config, level: Optional[str] = None) -> None:
    """
    Setup logging configuration

    Args:
        config: Configuration object
        level: Overrides config.LOG_LEVEL (the CLI's --log-level; RCF_LOG otherwise)
    """
    if config.LOG_FORMAT == "json":
        formatter = jsonlogger.JsonFormatter("%(asctime)s %(levelname)s %(name)s %(message)s")
    else:
        formatter = logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s")

    handlers = [logging.StreamHandler()]
    if config.LOG_FILE:
        # Create logs directory if it doesn't exist
        log_dir = os.path.dirname(config.LOG_FILE)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                config.LOG_FILE,
                maxBytes=config.LOG_MAX_SIZE,
                backupCount=config.LOG_BACKUP_COUNT,
            )
        )

    for handler in handlers:
        handler.setFormatter(formatter)

    logging.basicConfig(
        level=getattr(logging, (level or config.LOG_LEVEL).upper(), logging.INFO),
        handlers=handlers,
        force=True,
    )


def validate_environment() -> Dict[str, Any]:
    """
    Validate the current environment setup

    Returns:
        Dictionary with environment validation results
    """
    config = get_config()
    validation = config.validate_config()

    log_dir_writable = True
    if config.LOG_FILE:
        log_dir = os.path.dirname(config.LOG_FILE) or "."
        log_dir_writable = os.path.isdir(log_dir) and os.access(log_dir, os.W_OK)
        if not log_dir_writable:
            validation["warnings"].append(f"Log directory {log_dir} is missing or read-only")

    validation.update(
        {
            "log_dir_writable": log_dir_writable,
            "config_class": config.__name__,
        }
    )

    return validation
