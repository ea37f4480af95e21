"""Sweep the change-gate activation threshold over synthetic streams.

Generates seeded random frame streams whose labels mark genuinely changed
frames, scores the gate at a ladder of global thresholds, and prints one
precision/recall row per threshold.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gatehouse.change_gate import GateConfig, evaluate_gate
from gatehouse.frames import GrayFrame


def labeled_stream(rng: np.random.Generator, length: int, side: int):
    """Frames plus truthful labels: a frame is labeled active when it was
    built by flipping a patch of, or resampling, its predecessor."""
    frames = [rng.integers(0, 256, size=(side, side), dtype=np.uint8)]
    labels = [False]
    for _ in range(length - 1):
        prev = frames[-1]
        kind = int(rng.integers(0, 3))
        if kind == 0:
            frames.append(prev.copy())
            labels.append(False)
        elif kind == 1:
            nxt = prev.copy()
            k = int(rng.integers(4, side // 2))
            nxt[:k, :k] = 255 - nxt[:k, :k]
            frames.append(nxt)
            labels.append(True)
        else:
            frames.append(rng.integers(0, 256, size=(side, side), dtype=np.uint8))
            labels.append(True)
    return [(GrayFrame(f), l) for f, l in zip(frames, labels)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--streams", type=int, default=50)
    parser.add_argument("--length", type=int, default=12)
    parser.add_argument("--side", type=int, default=48, help="frame edge length in pixels")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--thresholds",
        type=int,
        nargs="+",
        default=[1000, 10000, 50000, 100000, 261120, 600000],
    )
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    streams = [labeled_stream(rng, args.length, args.side) for _ in range(args.streams)]
    print("threshold\tprecision\trecall")
    for threshold in args.thresholds:
        cfg = GateConfig(global_threshold=threshold)
        precisions = []
        recalls = []
        for stream in streams:
            p, r = evaluate_gate(stream, cfg)
            precisions.append(p)
            recalls.append(r)
        print(
            f"{threshold}\t{sum(precisions) / len(precisions):.4f}"
            f"\t{sum(recalls) / len(recalls):.4f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
