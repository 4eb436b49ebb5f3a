#!/usr/bin/env python3
"""Prepend the license header to every C++ source that lacks it."""

import argparse
import pathlib

ROOTS = ["include", "src", "tools", "tests", "python"]
SUFFIXES = {".hpp", ".cpp"}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("header", type=pathlib.Path, help="file holding the header text")
    parser.add_argument("--repo", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent.parent)
    args = parser.parse_args()

    header = args.header.read_text().rstrip("\n") + "\n\n"
    changed = 0
    for root in ROOTS:
        for path in sorted((args.repo / root).rglob("*")):
            if path.suffix not in SUFFIXES or not path.is_file():
                continue
            text = path.read_text()
            if text.startswith(header):
                continue
            path.write_text(header + text)
            changed += 1
    print(f"{changed} files updated")


if __name__ == "__main__":
    main()
