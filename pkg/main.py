"""isac-fbl entry point; same as the `isac-fbl` console script."""

import sys

from src.runner.cli import main

if __name__ == "__main__":
    sys.exit(main())
