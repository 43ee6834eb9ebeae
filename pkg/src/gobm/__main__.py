import sys

from gobm.cli import main

sys.exit(main())
