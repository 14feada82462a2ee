import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# acceptance verdicts, printed once at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
