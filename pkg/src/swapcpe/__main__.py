import sys

from swapcpe.cli import main

sys.exit(main())
