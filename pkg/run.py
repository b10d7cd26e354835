#!/usr/bin/env python3
"""
rcfinsler - Development Server
Run this script to start the JSON API on port 5001
"""

import os
import sys

from app import app

if __name__ == "__main__":
    # Ensure we're in the right directory
    script_dir = os.path.dirname(os.path.abspath(__file__))
    os.chdir(script_dir)

    print("Starting rcfinsler development server...")
    print(f"Working directory: {os.getcwd()}")
    print(f"Python version: {sys.version}")
    print("=" * 50)
    print("API at http://localhost:5001/api/stats")
    print("POST /api/eval | /api/verify | /api/invert | /api/audit | /api/sample")
    print("=" * 50)
    print("Press Ctrl+C to stop the server")
    print()

    try:
        app.run(
            host="0.0.0.0",
            port=5001,
            debug=True,
            use_reloader=True,
            threaded=True,
        )
    except KeyboardInterrupt:
        print("\nrcfinsler server stopped.")
    except Exception as e:
        print(f"\nError starting server: {e}")
        sys.exit(1)
