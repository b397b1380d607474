import sys

from qfdsym.cli import main

sys.exit(main())
