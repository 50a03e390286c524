class ScanError(Exception):

    @staticmethod
    def make(scanner, msg, extra=None):
        return ScanError(msg, scanner.text, scanner.pos, extra)

    def __init__(self, message, text, pos, extra=None):
        self.message = message
        self.text = text
        self.pos = pos
        self.extra = extra

    def __str__(self):
        return ('ScanError: {{\n'
                '      message: {!r}\n'
                '         text: "{}"\n'
                '                {}^\n'
                '          pos: {}\n'
                '        extra: {!r}\n'
                '}}').format(self.message, self.text, ' ' * self.pos,
                             self.pos, self.extra)


class UnexpectedTokenError(Exception):
    def __init__(self, found, expected, message=None, token=None):
        self.found = found
        self.expected = expected
        self.message = message
        self.token = token

    def __str__(self):
        return ('UnexpectedTokenError {{\n'
                '       found: {!r}\n'
                '    expected: {!r}\n'
                '     message: {!r}\n'
                '       token: {!r}\n'
                '}}').format(self.found, self.expected, self.message, self.token)


class ConfigError(Exception):
    def __init__(self, message, extra=None):
        self.message = message
        self.extra = extra

    def __str__(self):
        return ('ConfigError {{\n'
                '      message: {!r}\n'
                '        extra: {!r}\n'
                '}}').format(self.message, self.extra)


class ContextMismatchError(Exception):
    def __init__(self, left, right, op=None):
        self.left = left
        self.right = right
        self.op = op

    def __str__(self):
        return ('ContextMismatchError {{\n'
                '       left: {!r}\n'
                '      right: {!r}\n'
                '         op: {!r}\n'
                '}}').format(self.left, self.right, self.op)


class HeungapError(Exception):
    """Base of the numeric and consistency failures raised by the library."""

    def __init__(self, message, extra=None):
        self.message = message
        self.extra = extra

    def __str__(self):
        return ('{} {{\n'
                '      message: {!r}\n'
                '        extra: {!r}\n'
                '}}').format(type(self).__name__, self.message, self.extra)


class LatticeError(HeungapError):
    pass


class PoleError(HeungapError):

    @staticmethod
    def make(x, lattice_point):
        return PoleError('evaluation at a lattice point', x, lattice_point)

    def __init__(self, message, x, lattice_point):
        HeungapError.__init__(self, message, lattice_point)
        self.x = x
        self.lattice_point = lattice_point

    def __str__(self):
        return ('PoleError {{\n'
                '          message: {!r}\n'
                '                x: {!r}\n'
                '    lattice point: {!r}\n'
                '}}').format(self.message, self.x, self.lattice_point)


class ConsistencyError(HeungapError):
    def __init__(self, invariant, message, extra=None):
        HeungapError.__init__(self, message, extra)
        self.invariant = invariant

    def __str__(self):
        return ('ConsistencyError {{\n'
                '    invariant: {!r}\n'
                '      message: {!r}\n'
                '        extra: {!r}\n'
                '}}').format(self.invariant, self.message, self.extra)


class PathError(HeungapError):
    pass


class SearchError(HeungapError):
    def __init__(self, message, grid, residuals):
        HeungapError.__init__(self, message)
        self.grid = grid
        self.residuals = residuals

    def __str__(self):
        return ('SearchError {{\n'
                '        message: {!r}\n'
                '      grid size: {}\n'
                '   min residual: {!r}\n'
                '}}').format(self.message, len(self.grid),
                             min(self.residuals) if len(self.residuals) else None)


class DomainError(HeungapError):
    pass


class ExtractionError(HeungapError):
    def __init__(self, message, residual):
        HeungapError.__init__(self, message, residual)
        self.residual = residual

    def __str__(self):
        return ('ExtractionError {{\n'
                '       message: {!r}\n'
                '      residual: {!r}\n'
                '}}').format(self.message, self.residual)


class ExcludedPointError(HeungapError):
    pass
