#!/usr/bin/env python3
"""
Election Defense CLI - Entry Point

This is a wrapper script that calls the command-line interface from the
experiments package, so the tools can be used from a checkout without
installation.

Usage:
    python election_defense.py gen --seed 7 -o instance.json
    python election_defense.py solve instance.json --structure nondisjoint
    python election_defense.py gap instance.json defender.json attacker.json
    python election_defense.py table --config config/example_config.json
"""

import os
import sys

if __name__ == "__main__":
    # Add the current directory to the Python path before importing
    sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

    try:
        from experiments.cli import main
    except ImportError as e:
        print(f"Error: Could not import the experiments package: {e}")
        print("Make sure you're running this from the project root directory")
        sys.exit(1)

    sys.exit(main())
