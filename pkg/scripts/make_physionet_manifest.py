#!/usr/bin/env python3
"""Build a manifest for the 64-channel motor-imagery EDF corpus.

The corpus layout is one directory per subject (S001, S002, ...), each
holding runs R01.edf (eyes-open baseline) and R02.edf (eyes-closed
baseline).  This script writes a manifest JSON over the baseline run of the
first N subjects; feed it to `eegid ingest` / `eegid evaluate`.

Example:
    python3 scripts/make_physionet_manifest.py /data/eegmmidb \\
        --subjects 20 --out manifest.json
"""

import argparse
import json
import sys
from pathlib import Path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("root", help="corpus root directory")
    parser.add_argument("--subjects", type=int, default=109)
    parser.add_argument("--run", default="R01",
                        help="baseline run to use (R01 eyes open, R02 closed)")
    parser.add_argument("--window", type=float, nargs=2, default=(0.0, 60.0),
                        help="segment window in seconds")
    parser.add_argument("--channel-policy", default="common_56",
                        choices=["bci2000_64", "common_56", "ten_twenty_21"])
    parser.add_argument("--target-rate", type=float, default=128.0)
    parser.add_argument("--out", default="manifest.json")
    args = parser.parse_args(argv)

    root = Path(args.root)
    entries = []
    for s in range(1, args.subjects + 1):
        sid = f"S{s:03d}"
        path = root / sid / f"{sid}{args.run}.edf"
        if not path.is_file():
            print(f"missing: {path}", file=sys.stderr)
            return 1
        entries.append({
            "path": str(path),
            "format": "edf",
            "subject_id": sid,
            "dataset_id": "d1",
            "condition": "resting",
            "window_s": list(args.window),
        })

    manifest = {
        "target_rate_hz": args.target_rate,
        "channel_policy": args.channel_policy,
        "entries": entries,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out} with {len(entries)} entries", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
