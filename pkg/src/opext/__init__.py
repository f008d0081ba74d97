"""Toeplitz spaces and canonical unitary pseudo-extensions of commuting contraction tuples."""
from .asymptotics import AsymptoticLimit, asymptotic_limit, is_adjoint_pure
from .cpstine import CPProjection, StinespringTriple, canonical_extension_stinespring, phi_projection
from .pseudoext import PseudoExtension, canonical_extension_douglas, equivalence_unitary
from .toeplitz import OperatorSubspace, commutant_basis, toeplitz_basis
from .tuples import OperatorTuple, product_contraction, validate

__version__ = "0.1.0"

__all__ = [
    "AsymptoticLimit", "asymptotic_limit", "is_adjoint_pure",
    "CPProjection", "StinespringTriple", "canonical_extension_stinespring", "phi_projection",
    "PseudoExtension", "canonical_extension_douglas", "equivalence_unitary",
    "OperatorSubspace", "commutant_basis", "toeplitz_basis",
    "OperatorTuple", "product_contraction", "validate",
]
