"""Command line: render one or more figure-job INI files."""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import parse_job, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cdgrmhd-plots",
                                 description="Render figures from solver outputs")
    ap.add_argument("jobs", nargs="+", help="job INI files")
    args = ap.parse_args(argv)
    status = 0
    for path in args.jobs:
        try:
            job = parse_job(path)
            render(job)
            print(f"{path}: wrote {job.out}")
        except (SchemaError, OSError) as exc:
            print(f"{path}: error: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
