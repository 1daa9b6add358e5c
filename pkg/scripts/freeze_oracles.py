"""Recompute the independent reference values and write tests/data/oracles.json."""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import oracles  # noqa: E402


def main():
    data = oracles.freeze()
    oracles.FROZEN.parent.mkdir(parents=True, exist_ok=True)
    oracles.FROZEN.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"wrote {oracles.FROZEN}")


if __name__ == "__main__":
    main()
