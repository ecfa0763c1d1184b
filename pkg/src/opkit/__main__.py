import sys

from opkit.cli import main

sys.exit(main())
