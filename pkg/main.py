#!/usr/bin/env python3
"""Entry point for the iqp command-line tool."""

from services.iqp.cli import main


if __name__ == "__main__":
    main()
