#!/usr/bin/env python
"""Command-line entry point for cascade_scope (same as ``python -m cascade_scope``)."""
import sys


def main():
    from cascade_scope.cli import main as cli_main

    return cli_main(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
