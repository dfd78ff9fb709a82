"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class NonPhysicalState(SolverError):
    """Density or pressure became non-positive.

    Carries the offending cell index (or face index during flux
    evaluation) plus the step/stage counters when raised from inside
    the time loop, so a blow-up can be localised.
    """

    def __init__(self, message, cell=None, face=None, step=None, stage=None):
        self.cell = cell
        self.face = face
        self.step = step
        self.stage = stage
        where = []
        if cell is not None:
            where.append(f"cell {cell}")
        if face is not None:
            where.append(f"face {face}")
        if step is not None:
            where.append(f"step {step}")
        if stage is not None:
            where.append(f"stage {stage}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class MalformedMesh(SolverError):
    """Mesh topology is inconsistent (non-manifold faces, dangling vertices, ...)."""


class ParseError(SolverError):
    """A text input could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ConfigError(SolverError):
    """Bad run configuration; carries the offending key and source line."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        loc = ""
        if key is not None:
            loc += f" (key '{key}'"
            loc += f", line {line})" if line is not None else ")"
        elif line is not None:
            loc += f" (line {line})"
        super().__init__(message + loc)


class DegenerateGeometry(SolverError):
    """A vertex coincides with a cell centroid; inverse-distance weights blow up."""


class CFLViolation(SolverError):
    """A scalar-mode step was requested with a time step above the stability bound."""


class VacuumFormation(SolverError):
    """The Riemann problem opens a vacuum region between two rarefactions.

    The exception carries the structure of the vacuum solution: the
    left/right fan edges and a ``sample(xi)`` callable returning the
    self-similar primitive state (density zero inside the vacuum).
    """

    def __init__(self, message, head_left=None, head_right=None, sample=None):
        self.head_left = head_left
        self.head_right = head_right
        self.sample = sample
        super().__init__(message)
