import sys

from .cli.cascade_cli import main

sys.exit(main())
