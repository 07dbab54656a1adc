#!/usr/bin/env python3
"""Sweep the threshold x sensitivity x speed grid and print trigger counts.

Usage: python scripts/run_grid.py [--deactivation 1.0]
"""
import argparse

from sentinel.camsim import named_scenario, run_scenario
from sentinel.detector import DetectorConfig, SensitivityLevel, ThresholdLevel
from sentinel.trigger import TriggerConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--deactivation", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    trigger = TriggerConfig(
        pre_count=1, post_count=1, frequency_hz=10.0, deactivation_s=args.deactivation
    )
    print("scenario,threshold,sensitivity,triggers")
    for name in ("walk", "walk_fast", "run", "light_change", "mirror"):
        scenario = named_scenario(name)
        for threshold in ThresholdLevel:
            for sensitivity in SensitivityLevel:
                report = run_scenario(
                    scenario,
                    DetectorConfig(sensitivity, threshold),
                    trigger,
                    seed=args.seed,
                    base_time=0.0,
                )
                print(f"{name},{threshold.name},{sensitivity.name},{report.triggers}")


if __name__ == "__main__":
    main()
