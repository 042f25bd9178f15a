import sys

from cli.main_handler import main

sys.exit(main())
