"""
Configuration module for the mcenv engine.

Every setting is optional and read from the environment (or a .env file).
"""
import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class Config:
    """Engine configuration class."""

    ENV_NAME = os.getenv('MCENV_ENV', 'development').lower()
    LOG_LEVEL = os.getenv('MCENV_LOG_LEVEL', 'INFO').upper()

    # Per-point axiom checks
    JOBS = int(os.getenv('MCENV_JOBS', '1'))

    # Randomized sigma-limit oracle
    SIGMA_TRIALS = int(os.getenv('MCENV_SIGMA_TRIALS', '20'))
    SIGMA_RESAMPLES = int(os.getenv('MCENV_SIGMA_RESAMPLES', '100'))
    SIGMA_RANGE = int(os.getenv('MCENV_SIGMA_RANGE', '97'))
    RANDOM_SEED = int(os.getenv('MCENV_RANDOM_SEED', '20240601'))

    # q-series truncation
    ELLIPTIC_ORDER = int(os.getenv('MCENV_ELLIPTIC_ORDER', '12'))
    MAX_ELLIPTIC_ORDER = int(os.getenv('MCENV_MAX_ELLIPTIC_ORDER', '16'))

    REPORTS_DIR = os.getenv('MCENV_REPORTS_DIR', 'reports')

    @classmethod
    def configure_logging(cls, level: str = None):
        """Send logs to stderr so stdout stays machine-readable."""
        logging.basicConfig(
            level=getattr(logging, (level or cls.LOG_LEVEL).upper(), logging.INFO),
            format=LOG_FORMAT,
        )

    @classmethod
    def init_app(cls):
        """Log the effective configuration."""
        logger.info("Configuration values:")
        logger.info(f"  - ENV_NAME: {cls.ENV_NAME}")
        logger.info(f"  - LOG_LEVEL: {cls.LOG_LEVEL}")
        logger.info(f"  - JOBS: {cls.JOBS}")
        logger.info(f"  - SIGMA_TRIALS: {cls.SIGMA_TRIALS}")
        logger.info(f"  - SIGMA_RESAMPLES: {cls.SIGMA_RESAMPLES}")
        logger.info(f"  - SIGMA_RANGE: {cls.SIGMA_RANGE}")
        logger.info(f"  - RANDOM_SEED: {cls.RANDOM_SEED}")
        logger.info(f"  - ELLIPTIC_ORDER: {cls.ELLIPTIC_ORDER}")
        logger.info(f"  - MAX_ELLIPTIC_ORDER: {cls.MAX_ELLIPTIC_ORDER}")
        logger.info(f"  - REPORTS_DIR: {cls.REPORTS_DIR}")

        if cls.JOBS < 1:
            raise RuntimeError("MCENV_JOBS must be at least 1.")
        if cls.ELLIPTIC_ORDER > cls.MAX_ELLIPTIC_ORDER:
            raise RuntimeError("MCENV_ELLIPTIC_ORDER exceeds MCENV_MAX_ELLIPTIC_ORDER.")

    @classmethod
    def ensure_reports_dir(cls) -> str:
        """Create the reports root on first use."""
        if not os.path.exists(cls.REPORTS_DIR):
            logger.info(f"Creating reports dir: {cls.REPORTS_DIR}")
            os.makedirs(cls.REPORTS_DIR, exist_ok=True)
        return cls.REPORTS_DIR


class DevelopmentConfig(Config):
    """Development configuration."""
    ENV_NAME = 'development'


class ProductionConfig(Config):
    """Production configuration."""
    ENV_NAME = 'production'
    LOG_LEVEL = os.getenv('MCENV_LOG_LEVEL', 'WARNING').upper()


class TestingConfig(Config):
    """Testing configuration."""
    ENV_NAME = 'testing'
    LOG_LEVEL = os.getenv('MCENV_LOG_LEVEL', 'WARNING').upper()
    JOBS = 1


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_active_config_class():
    """Resolve the active configuration class from environment variables."""
    config_name = os.getenv('MCENV_ENV', 'development').lower()
    return config.get(config_name, Config)
