#!/usr/bin/env python3
"""Write the fig5 scenario tables with default parameters into out/fig5."""

import sys

from fiberqed.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig5", "--out", "out/fig5", *sys.argv[1:]]))
