import os
from collections import OrderedDict

path = os.path.join("a", "b")
d = OrderedDict()
