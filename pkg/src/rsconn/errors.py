"""Error taxonomy shared by the whole package.

Errors split into three kinds: mathematical obstructions (``DomainError``),
bad input data (``InputError``) and misuse of the data structures
(``StructureError``).  The command line front end maps these to exit codes
2, 1 and 1 respectively.
"""


class RsconnError(Exception):
    """Base class for every error raised by this package."""

    @property
    def name(self) -> str:
        return type(self).__name__


class DomainError(RsconnError):
    """A mathematical obstruction: the requested object does not exist."""


class NotAUnit(DomainError):
    """Inversion of an element whose residue vanishes."""


class NotCoprime(DomainError):
    """Polynomials expected coprime share a nontrivial factor."""


class BadResidueFactorization(DomainError):
    """Residue factors do not multiply to the residue of the polynomial."""


class UnsupportedSpectrum(DomainError):
    """An eigenvalue lies outside the rationals; exact handling stops here."""


class SingularResidue(DomainError):
    """Linear system whose reduction modulo the maximal ideal is singular."""


class ResonantExponents(DomainError):
    """A nonzero integer equals a difference of residue eigenvalues."""


class NotLogarithmic(DomainError):
    """The connection matrix has a pole where none is allowed."""


class ShearBrokeLogarithmicity(DomainError):
    """A unit shear produced a pole.  Unreachable for correct projectors."""


class NotRecognized(DomainError):
    """Lattice saturation did not stabilize within the given bound."""


class UnsupportedBase(DomainError):
    """Operation restricted to the field base (t_order = 1)."""


class PrecisionExhausted(DomainError):
    """An x-window became empty, or a result is not certifiable at the
    requested precision."""


class InputError(RsconnError):
    """Problems with serialized data supplied from outside."""


class ParseError(InputError):
    """Malformed input file or JSON value."""


class ValidationError(InputError):
    """Well-formed input violating a documented invariant."""


class StructureError(RsconnError):
    """Incompatible operands, e.g. mixed truncation orders."""
