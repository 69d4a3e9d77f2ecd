"""Run the acceptance criteria without pytest and print one line per criterion.

Exit status is the number of failing criteria.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from test_acceptance import CRITERIA, run_criterion  # noqa: E402


def main() -> int:
    failed = 0
    for num, title, fn in CRITERIA:
        ok, line = run_criterion(num, title, fn)
        print(line, flush=True)
        failed += not ok
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria pass")
    return failed


if __name__ == "__main__":
    sys.exit(main())
