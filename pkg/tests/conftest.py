import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matchlab import tiny_demo_instance


@pytest.fixture
def demo_prefs():
    return tiny_demo_instance()
