"""
WSGI Entry Point for rcfinsler Production Deployment

    gunicorn --bind 0.0.0.0:5000 wsgi:app
"""

import logging
import sys
from pathlib import Path

# Add the project directory to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

# Import the Flask application after path setup
try:
    import app as api_module
    from app import app
    from config import get_config, setup_logging, validate_environment
except ImportError as e:
    print(f"Import error: {e}")
    raise

# Get production configuration
config = get_config("production")

# Setup logging for production
setup_logging(config)
logger = logging.getLogger(__name__)

# Validate environment on startup
validation = config.validate_production_config()
environment = validate_environment()
for error in validation["errors"] + environment["errors"]:
    logger.error(f"Configuration error: {error}")
for warning in validation["warnings"] + environment["warnings"]:
    logger.warning(f"Configuration warning: {warning}")

# Configure Flask app and the request limits for production
app.config.from_object(config)
api_module.config = config
