#!/usr/bin/env python3
"""Run the four distortion experiments end to end and collect their CSVs.

Desk-scale by default (finishes in about a minute); pass --paper-scale for
the full n=5000, d=10000, 30-instance setup.  Each experiment writes its
CSV plus a JSON manifest into the output directory; plotting is left to
whatever tool reads the CSVs.
"""

import argparse
import sys
import time
from pathlib import Path

from jlproj.cli import cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out", help="directory for CSV outputs")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--paper-scale", action="store_true")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    common = ["--seed", str(args.seed)] + (["--paper-scale"] if args.paper_scale else [])

    runs = [
        ("sweep-s", ["sweep-s", "--out", str(outdir / "distortion_vs_s.csv")]),
        ("sweep-t", ["sweep-t", "--out", str(outdir / "distortion_vs_t.csv")]),
        ("cdf", ["cdf", "--out", str(outdir / "distortion_cdf.csv")]),
        ("sweep-k", ["sweep-k", "--out", str(outdir / "distortion_vs_k.csv")]),
    ]
    for name, argv in runs:
        start = time.time()
        code = cli_main(argv + common)
        if code != 0:
            print(f"{name} failed with exit code {code}", file=sys.stderr)
            return code
        print(f"{name}: done in {time.time() - start:.1f}s")
    print(f"CSVs written to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
