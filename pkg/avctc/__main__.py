"""python -m avctc"""

import sys

from avctc.main import main

sys.exit(main())
