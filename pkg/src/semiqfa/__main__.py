import sys

from semiqfa.cli import main

sys.exit(main())
