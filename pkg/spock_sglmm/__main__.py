import sys

from spock_sglmm.cli import main

sys.exit(main())
