#!/usr/bin/env python3
"""Pretty-print a results CSV (metadata lines plus an aligned table)."""

import argparse

from phasekit.results import read_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path", help="results CSV file")
    ap.add_argument("--meta", action="store_true", help="also print the config echo")
    args = ap.parse_args()
    metadata, columns, rows = read_csv(args.path)
    if args.meta:
        for k, v in metadata.items():
            print("# %s = %s" % (k, v))
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) if rows else len(c) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns))
    for r in rows:
        print("  ".join(r[c].ljust(widths[c]) for c in columns))


if __name__ == "__main__":
    try:
        main()
    except BrokenPipeError:
        pass  # piped into head or similar

