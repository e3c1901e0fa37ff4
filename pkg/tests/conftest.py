import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_collection_modifyitems(items):
    # every test guarded by a "z3 not on PATH" skip is a solver test
    for item in items:
        if any("z3" in m.kwargs.get("reason", "") for m in item.iter_markers("skipif")):
            item.add_marker("solver")
