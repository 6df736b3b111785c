"""Main entry point for running as `python -m fsc_bounds`."""

import sys

from fsc_bounds.main import main

if __name__ == "__main__":
    sys.exit(main())
