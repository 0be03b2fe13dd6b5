"""Exception hierarchy. Every error carries a short category used by the CLI."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class GeometryError(ToolkitError):
    """Invalid geometric input (inclusion too large, bad radius, ...)."""

    category = "geometry"


class MeshingError(ToolkitError):
    """Mesh generation produced a degenerate or non-conforming result."""

    category = "meshing"


class TilingError(ToolkitError):
    """Domain is not commensurate with the requested cell size."""

    category = "tiling"


class ConformityError(ToolkitError):
    """Vertex merge or edge bookkeeping failed while assembling a mesh."""

    category = "conformity"


class SolverConvergenceError(ToolkitError):
    """Iterative solver hit the iteration cap before reaching tolerance."""

    category = "solver"

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ValidationError(ToolkitError):
    """An invariant or precondition check failed."""

    category = "validation"


class InterpolationError(ToolkitError):
    """A query point could not be located in the source mesh."""

    category = "interpolation"


class ConfigError(ToolkitError):
    """Configuration text failed to parse or validate."""

    category = "config"


class OutputError(ToolkitError):
    """File output failed; message includes the offending path."""

    category = "io"
