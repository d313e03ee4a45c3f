"""``python -m qumode_regression`` entry point."""

import sys

from .cli import main

sys.exit(main())
