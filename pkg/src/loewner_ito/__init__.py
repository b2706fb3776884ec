"""Randomized radial Loewner evolution and the Ito diffusion it becomes under
the substitution psi = phi / tau(B)."""
from .errors import DomainError, InvariantError, LoewnerItoError, ResolutionError, SizingError
from .herglotz import AtomicMeasure, Constant, RationalCayleyPlus, single_atom
from .paths import BrownianEnsemble, TimeGrid, generate_ensemble, refine
from .tau import Exponential, ProductExponent, Sampled, SquareExponent

__version__ = "0.1.0"
