import sys

from hypcross.cli import main

sys.exit(main())
