import sys

from hamflow.cli import main

sys.exit(main())
