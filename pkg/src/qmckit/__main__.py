import sys

from qmckit.cli import main

sys.exit(main())
