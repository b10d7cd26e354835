"""
rcfinsler - ℝ-complex Finsler Toolkit
Flask JSON API over the command runner
"""

import logging
import os

from flask import Flask, jsonify, request

from config import get_config, setup_logging
from src.processors.runner import COMMANDS, EXIT_ERROR, RunConfig, run_command
from src.utils.errors import ConfigError
from src.utils.report_writer import jsonable

__version__ = "1.0.0"

# Initialize Flask app
app = Flask(__name__)

# Load configuration
config = get_config()
app.config.from_object(config)
app.json.sort_keys = False

# Setup logging
setup_logging(config)
logger = logging.getLogger(__name__)

# Server-side files are a CLI concern
FILE_FIELDS = ("metric", "replay")

logger.info(f"rcfinsler API initialized with {config.__name__}")


def _status(report):
    if report.get("exit_code") != EXIT_ERROR:
        return 200
    return 400 if report.get("error") == "ConfigError" else 422


def _run(command: str):
    """Parse the JSON body into a run configuration and execute one command"""
    try:
        data = request.get_json(silent=True)
        if not isinstance(data, dict):
            return jsonify({"success": False, "error": "ConfigError", "message": "Request body must be a JSON object"}), 400

        blocked = [key for key in FILE_FIELDS if data.get(key)]
        if blocked:
            message = f"File inputs ({', '.join(blocked)}) are only available from the command line"
            return jsonify({"success": False, "error": "ConfigError", "message": message}), 400

        try:
            cfg = RunConfig.from_mapping(data, config)
        except ConfigError as e:
            return jsonify({"command": command, "exit_code": EXIT_ERROR, **e.to_dict()}), 400

        report = run_command(command, cfg)
        logger.info(f"API {command}: exit code {report['exit_code']}")
        return jsonify(jsonable(report)), _status(report)

    except Exception as e:
        logger.error(f"Error in {command}: {str(e)}", exc_info=True)
        return jsonify({"success": False, "error": f"{command} failed"}), 500


@app.route("/api/eval", methods=["POST"])
def eval_points():
    """Ground values, jets, invariants and tensors"""
    return _run("eval")


@app.route("/api/verify", methods=["POST"])
def verify_metric():
    """Identity suite and oracle sweeps"""
    return _run("verify")


@app.route("/api/invert", methods=["POST"])
def invert_metric():
    return _run("invert")


@app.route("/api/audit", methods=["POST"])
def audit_metric():
    """Formula audit findings"""
    return _run("audit")


@app.route("/api/sample", methods=["POST"])
def sample_metric():
    return _run("sample")


@app.route("/api/stats")
def get_stats():
    """API endpoint for configuration and version"""
    try:
        return jsonify({"commands": list(COMMANDS), "config": config.get_summary(), "version": __version__})

    except Exception as e:
        logger.error(f"Error in get_stats: {str(e)}", exc_info=True)
        return jsonify({"error": "Stats unavailable"}), 500


@app.errorhandler(400)
def bad_request(e):
    return jsonify({"success": False, "error": "Bad request"}), 400


@app.errorhandler(404)
def not_found(e):
    """Handle 404 errors"""
    return jsonify({"success": False, "error": "Not found"}), 404


@app.errorhandler(405)
def method_not_allowed(e):
    return jsonify({"success": False, "error": "Method not allowed"}), 405


@app.errorhandler(500)
def server_error(e):
    """Handle 500 errors"""
    logger.error(f"Server error: {str(e)}", exc_info=True)
    return jsonify({"success": False, "error": "Internal server error"}), 500


# Development server startup
if __name__ == "__main__":
    # Validate configuration on startup
    validation = config.validate_config()
    if not validation["valid"]:
        logger.error("Configuration validation failed:")
        for error in validation["errors"]:
            logger.error(f"  - {error}")
    for warning in validation["warnings"]:
        logger.warning(f"  - {warning}")

    logger.info("Starting rcfinsler development server")
    logger.info(f"Working directory: {os.getcwd()}")
    logger.info(f"Debug mode: {'ON' if config.DEBUG else 'OFF'}")

    app.run(host="0.0.0.0", port=5001, debug=config.DEBUG, use_reloader=config.DEBUG)
