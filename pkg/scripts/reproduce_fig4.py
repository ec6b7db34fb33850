#!/usr/bin/env python3
"""Write the fig4 scenario tables with default parameters into out/fig4."""

import sys

from fiberqed.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig4", "--out", "out/fig4", *sys.argv[1:]]))
