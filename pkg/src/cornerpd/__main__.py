import sys

from cornerpd.cli import main

sys.exit(main())
