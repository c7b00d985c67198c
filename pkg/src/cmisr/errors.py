"""Exception taxonomy.

The CLI maps these onto process exit codes: validation problems exit 2,
file I/O problems exit 3, plugin/protocol problems exit 4.
"""


class CmisrError(Exception):
    """Base class for every error this package raises deliberately."""


class ValidationError(CmisrError):
    """Bad parameter or configuration value."""


class ShapeError(ValidationError):
    """Array shape or dimension constraint violated."""


class SingularGainError(ValidationError):
    """Loop gain cannot be resolved because the estimated gain is zero."""


class DivergenceError(CmisrError):
    """Iteration state left the finite range."""


class ImageIOError(CmisrError):
    """File cannot be read or written."""


class FormatError(ImageIOError):
    """File was readable but is not a supported image format or mode."""


class PluginError(CmisrError):
    """Plugin subprocess failed or reported an error frame."""


class ProtocolError(PluginError):
    """Plugin wire protocol was violated (bad frame, bad handshake, EOF)."""
