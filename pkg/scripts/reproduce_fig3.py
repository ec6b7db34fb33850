#!/usr/bin/env python3
"""Write the fig3 scenario tables with default parameters into out/fig3."""

import sys

from fiberqed.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig3", "--out", "out/fig3", *sys.argv[1:]]))
