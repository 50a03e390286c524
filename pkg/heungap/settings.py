from collections import namedtuple
import logging
import os

from .exceptions import ConfigError


logger = logging.getLogger(__name__)

ENV_VAR = 'HEUNGAP_TOL'

_FIELDS = (
    'lattice',
    'identity',
    'ode_rtol',
    'det',
    'edge',
    'quad',
    'delta',
    'nullspace',
    'agreement',
)

_DEFAULTS = (1e-12, 1e-10, 1e-10, 1e-8, 1e-10, 1e-10, 1e-10, 1e-8, 1e-6)


class Tolerances(namedtuple('Tolerances', ' '.join(_FIELDS))):
    """
    Numeric tolerances shared by every module. Instances are immutable, use
    `replace` to derive overridden copies.
    """
    __slots__ = ()

    def __new__(cls, *args, **kwargs):
        values = dict(zip(_FIELDS, _DEFAULTS))
        values.update(zip(_FIELDS, args))
        for name, value in kwargs.items():
            if name not in values:
                raise ConfigError('Unknown tolerance: %s' % name, extra=sorted(values))
            values[name] = float(value)
        return super(Tolerances, cls).__new__(cls, **values)

    def replace(self, **kwargs):
        values = self._asdict()
        values.update(kwargs)
        return Tolerances(**values)

    def render(self):
        """Inverse of `parse_overrides` for the non-default fields."""
        default = Tolerances()
        return ','.join('%s=%r' % (name, getattr(self, name))
                        for name in _FIELDS
                        if getattr(self, name) != getattr(default, name))

    @staticmethod
    def parse_overrides(text):
        overrides = {}
        for item in text.split(','):
            item = item.strip()
            if not item:
                continue
            if '=' not in item:
                raise ConfigError('Invalid tolerance override, "name=value" expected.', extra=item)
            name, value = item.split('=', 1)
            try:
                overrides[name.strip()] = float(value)
            except ValueError:
                raise ConfigError('Invalid tolerance value for %s' % name.strip(), extra=value)
        return overrides

    @staticmethod
    def from_env(environ=None):
        environ = os.environ if environ is None else environ
        text = environ.get(ENV_VAR, '')
        if not text:
            return DEFAULT_TOLERANCES
        overrides = Tolerances.parse_overrides(text)
        logger.info('tolerance overrides from %s: %s', ENV_VAR, overrides)
        return Tolerances(**overrides)


DEFAULT_TOLERANCES = Tolerances()
