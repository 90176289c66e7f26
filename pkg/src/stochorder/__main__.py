import sys

from stochorder.cli import main

sys.exit(main())
