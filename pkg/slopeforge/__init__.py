from .documentation import install_examples
from . import exceptions
from . import arith
from . import typealgebra
from . import filtrations
from . import lattices
from . import hncore
from . import phimod
from . import kisin
from . import isocrystal
from . import tori
