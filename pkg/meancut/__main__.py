import sys

from meancut.cli import main

sys.exit(main())
