#!/usr/bin/env python3
"""
Main entry point for stitchlab.

Runs the command-line interface, e.g. ``python main.py prepare`` followed by
``python main.py search --algo ga``. See ``python main.py --help``.
"""

import sys

from stitchlab.cli import main

if __name__ == "__main__":
    sys.exit(main())
