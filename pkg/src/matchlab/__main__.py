import sys

from matchlab.cli import main

sys.exit(main())
