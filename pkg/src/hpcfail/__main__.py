import sys

from hpcfail.cli import main

sys.exit(main())
