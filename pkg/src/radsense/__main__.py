import sys

from radsense.cli import main

sys.exit(main())
