import sys

from chorsec.cli import main

sys.exit(main())
