import sys

from sscl.cli import main

sys.exit(main())
