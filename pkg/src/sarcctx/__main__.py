import sys

from sarcctx.cli import main

sys.exit(main())
