import sys

from kickeff.cli import main

sys.exit(main())
