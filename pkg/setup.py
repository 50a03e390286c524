# -*- coding: utf-8 -*-
"""
Finite-gap Heun and Lame potentials on a complex torus: the symbolic
Xi-function, spectral polynomial and commuting operator, monodromy by
Floquet integration, hyperelliptic integrals and the Hermite-Krichever
form, band edges, Lame-polynomial spectra with their large-l density,
and formal WKB and large-E expansions.

Numerics sit on `NumPy`_, `SciPy`_ and `mpmath`_.

.. _NumPy: https://numpy.org
.. _SciPy: https://scipy.org
.. _mpmath: https://mpmath.org
"""
import ast
import re
from setuptools import setup


_version_re = re.compile(r'^__version__\s+=\s+(.*)$', re.MULTILINE)

with open('heungap/__init__.py', 'rb') as f:
    version = str(ast.literal_eval(_version_re.search(
        f.read().decode('utf-8')).group(1)))

with open('README.rst', 'rb') as f:
    long_desc = f.read().decode('utf-8')


setup(
    name='heungap',
    version=version,
    license='MIT',
    description='Finite-gap Heun and Lame potentials: spectral curves, monodromy and spectra.',
    long_description=long_desc,
    zip_safe=False,
    classifiers=[
        # status of this dist
        'Development Status :: 3 - Alpha',
        # for who
        'Intended Audience :: Science/Research',
        # for what
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
        # license
        'License :: OSI Approved :: MIT License',
        # env
        'Operating System :: OS Independent',
        # python versions
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    keywords='heun lame finite-gap elliptic monodromy floquet wkb',
    packages=['heungap'],
    package_data={'heungap': ['golden/*.txt', 'golden/*.json', 'schemas/*.json']},
    python_requires='>=3.8',
    install_requires=[
        "mpmath>=1.1",
        "numpy>=1.17",
        "scipy>=1.4",
        "sympy>=1.12",
    ],
    entry_points={
        'console_scripts': ['heungap = heungap.cli:main'],
    },
    include_package_data=True
)
