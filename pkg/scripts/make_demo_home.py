"""Generate the synthetic smart-home demo assets.

Writes numbered frames, a detection fixture, an attribute manifest, and an
enrollment portrait into the chosen directory, then prints where everything
landed so the paths can be pasted into a config file.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gatehouse.demo import build_demo


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_home", help="directory to create the assets in")
    args = parser.parse_args()

    layout = build_demo(Path(args.out))
    print(f"frames:             {layout.frames_dir}")
    print(f"detection fixture:  {layout.fixture_path}")
    print(f"attribute manifest: {layout.manifest_path}")
    print(f"enrollment image:   {layout.enroll_path}")
    print(f"frame count:        {layout.frame_count}")
    print("expected summaries:")
    for sentence in layout.expected_summaries:
        print(f"  {sentence}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
