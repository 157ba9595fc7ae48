import sys

from freeconv.main import main

sys.exit(main())
