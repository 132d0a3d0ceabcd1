import sys

from delaystab.main import main

sys.exit(main())
