from typing import Optional


class BaseSingflowException(Exception):
    pass


class NumericalError(BaseSingflowException):
    """Failure of a numerical method; carries the station where it happened when known."""

    station: Optional[float] = None

    def at(self, station: float) -> 'NumericalError':
        self.station = station
        return self


class UsageError(BaseSingflowException):
    pass


class InvalidArgument(UsageError):
    pass


class UnknownPreset(UsageError):
    def __init__(self, name: str, presets: list, *args):
        self.name = name
        self.presets = presets
        super().__init__(*args)

    def __str__(self):
        return f"unknown preset - {self.name}, expected one of {self.presets}"


class DegenerateSpec(UsageError):
    pass


class NotNMS(UsageError):
    def __str__(self):
        return 'half cloud must have x1 > 0 and nonnegative circulations'


class NonFiniteState(NumericalError):
    pass


class SingularSystem(NumericalError):
    def __init__(self, row: int, *args):
        self.row = row
        super().__init__(*args)

    def __str__(self):
        return f'zero pivot at row {self.row}'


class NoBracket(NumericalError):
    def __init__(self, a: float, b: float, fa: float, fb: float, *args):
        self.a, self.b, self.fa, self.fb = a, b, fa, fb
        super().__init__(*args)

    def __str__(self):
        return f'no sign change on [{self.a}, {self.b}]: f(a)={self.fa}, f(b)={self.fb}'


class DomainError(NumericalError):
    pass


class ShapeError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class NonPhysicalDensity(NumericalError):
    def __init__(self, rho: float, *args):
        self.rho = rho
        super().__init__(*args)

    def __str__(self):
        return f'density must be positive, got {self.rho}'


class VacuumReached(NumericalError):
    def __str__(self):
        return 'speed exceeds the cavitation bound of the Bernoulli law'


class NoShockSolution(NumericalError):
    def __init__(self, normal_mach: float, *args):
        self.normal_mach = normal_mach
        super().__init__(*args)

    def __str__(self):
        return f'upstream normal Mach number {self.normal_mach:.6g} < 1'


class SolverFailure(NumericalError):
    pass


class DetachedShock(NumericalError):
    pass


class NotSupersonic(NumericalError):
    def __init__(self, mach: float, *args):
        self.mach = mach
        super().__init__(*args)

    def __str__(self):
        return f'freestream Mach number {self.mach:.6g} <= 1'


class HyperbolicityLost(NumericalError):
    def __str__(self):
        where = f' at z={self.station:.6g}' if self.station is not None else ''
        return f'axial velocity dropped below the sound speed{where}'


class GeometryCollapse(NumericalError):
    def __str__(self):
        where = f' at z={self.station:.6g}' if self.station is not None else ''
        return f'shock met the body{where}'


class StepTooLarge(NumericalError):
    def __init__(self, courant: float, limit: float, *args):
        self.courant = courant
        self.limit = limit
        super().__init__(*args)

    def __str__(self):
        return f'Courant number {self.courant:.4g} exceeds {self.limit:.4g}'


class UpwindBreakdown(NumericalError):
    def __init__(self, x: float, y: float, *args):
        self.x = x
        self.y = y
        super().__init__(*args)

    def __str__(self):
        return f'streamwise velocity lost positivity at x={self.x:.4g}, y={self.y:.4g}'


class AxisCollision(NumericalError):
    def __str__(self):
        return 'a ring reached the symmetry axis'


class InadmissibleGeometry(NumericalError):
    def __str__(self):
        return 'cone perturbation violates the smallness bound'
