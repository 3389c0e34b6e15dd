import sys

from gambler.cli import main

sys.exit(main())
