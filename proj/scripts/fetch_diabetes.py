#!/usr/bin/env python3
"""Write the diabetes benchmark dataset (442 rows, 10 features + target) as CSV.

Prefers the copy bundled with scikit-learn; falls back to the public
tab-separated source. Re-uses an existing valid file without refetching.
"""

import argparse
import csv
import os
import sys

HEADER = ["age", "sex", "bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6", "target"]
SOURCE_URL = "https://www4.stat.ncsu.edu/~boos/var.select/diabetes.tab.txt"


def _numeric(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def existing_ok(path):
    if not os.path.exists(path):
        return False
    try:
        with open(path, newline="") as handle:
            rows = [r for r in csv.reader(handle) if r]
    except OSError:
        return False
    if rows and not _numeric(rows[0][0]):
        rows = rows[1:]
    return len(rows) == 442 and all(len(r) == 11 for r in rows)


def from_sklearn():
    from sklearn.datasets import load_diabetes

    bunch = load_diabetes(scaled=False)
    return [list(x) + [y] for x, y in zip(bunch.data.tolist(), bunch.target.tolist())]


def from_url():
    import urllib.request

    with urllib.request.urlopen(SOURCE_URL, timeout=60) as response:
        text = response.read().decode()
    lines = [line.split() for line in text.strip().splitlines()]
    return [[float(v) for v in row] for row in lines[1:]]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output CSV path")
    args = parser.parse_args()

    if existing_ok(args.out):
        print(f"{args.out} already present and valid; keeping it")
        return 0

    rows = None
    errors = []
    for source in (from_sklearn, from_url):
        try:
            rows = source()
            break
        except Exception as exc:  # noqa: BLE001 - report and try the next source
            errors.append(f"{source.__name__}: {exc}")
    if rows is None:
        print("could not obtain the diabetes dataset:\n  " + "\n  ".join(errors), file=sys.stderr)
        print(f"fetch it manually from {SOURCE_URL} and convert to CSV", file=sys.stderr)
        return 1
    if len(rows) != 442 or any(len(r) != 11 for r in rows):
        print("fetched data has unexpected shape", file=sys.stderr)
        return 1

    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
