"""Dimensions of complementary sets of gap sequences.

Modules:

``seqcore``   gap sequence families and log-space tail quantities
``setforge``  Cantor, countable and mixed set builders
``dimcalc``   closed-form dimension formulas on finite windows
``coverlab``  exact admissible covers and the empirical estimator
``cli``       the ``compdim`` command
"""

from .errors import (CompdimError, InfeasibleTargetError, PrecisionError,
                     SequenceIndexError, ValidationError)
from .seqcore import (DyadicBlockGeometric, DyadicBlockSchedule, ExplicitFinite,
                      PowerLawTelescoping, TelescopingTail, load_spec, loads_spec)

__version__ = "0.1.0"

__all__ = [
    "CompdimError", "InfeasibleTargetError", "PrecisionError", "SequenceIndexError",
    "ValidationError", "DyadicBlockGeometric", "DyadicBlockSchedule", "ExplicitFinite",
    "PowerLawTelescoping", "TelescopingTail", "load_spec", "loads_spec",
]
