import sys

from wimpyrg.cli import main

sys.exit(main())
