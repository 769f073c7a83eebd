#!/usr/bin/env python3
"""
Simple run script for the simulation runner.
"""

import sys
from pathlib import Path

# Add package directory to path
sys.path.insert(0, str(Path(__file__).parent))

from gcss.main import run_cli

if __name__ == "__main__":
    sys.exit(run_cli())
