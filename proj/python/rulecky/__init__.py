"""CKY decoding toolkit: conventional and syntactic-rule-constrained parsing,
treebank binarization, rule extraction, and max-margin span-scorer training.
"""

from ._rulecky import *  # noqa: F401,F403
from ._rulecky import __doc__  # noqa: F401

__version__ = "0.1.0"
