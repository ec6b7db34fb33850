#!/usr/bin/env python3
"""Write the fig2 scenario tables with default parameters into out/fig2."""

import sys

from fiberqed.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig2", "--out", "out/fig2", *sys.argv[1:]]))
