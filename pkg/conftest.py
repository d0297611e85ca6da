"""Pin the test suite to this tree's sources, whatever pip has installed."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent / "src"))
