"""Prepare a Bell pair with the blockade gate and print its report card.

Runs the fast eliminated model first, then the full multilevel model
for comparison.  Expect a few minutes for the full run.

Run:  python3 demos/02_bell_pair.py [--full]
"""

import argparse
import json

from eitgate.analysis import run_bell
from eitgate.presets import preset_7p12


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--full", action="store_true",
                        help="also run the un-eliminated multilevel model")
    args = parser.parse_args()

    preset = preset_7p12()
    print("eliminated three-level-per-atom model:")
    _state, report, _res = run_bell(preset, reduced=True)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))

    if args.full:
        print("\nfull multilevel model (slower):")
        _state, report, _res = run_bell(preset, reduced=False)
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
