__version__ = '0.1.0'
# main entry points
from .elliptic import Lattice, lattice_from_periods
from .fingap import PotentialSpec, HeunParams
