import sys

from skforge.cli import main

sys.exit(main())
