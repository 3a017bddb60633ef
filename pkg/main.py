"""
Main entry point: `python main.py <subcommand>` is the same as `covsteer <subcommand>`.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
