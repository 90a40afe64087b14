#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Setup script for parqlab.

This setup.py is maintained for backward compatibility.
For modern installations, pyproject.toml is the primary configuration.
"""

import sys
from pathlib import Path
from setuptools import setup, find_packages

if sys.version_info < (3, 9):
    sys.exit('Python 3.9 or higher is required for parqlab.')

HERE = Path(__file__).parent.resolve()


def read_file(filename: str) -> str:
    """Read content from a file."""
    filepath = HERE / filename
    if filepath.exists():
        return filepath.read_text(encoding='utf-8')
    return ''


def get_version() -> str:
    """Extract version from parqlab/__init__.py."""
    init_file = HERE / 'parqlab' / '__init__.py'
    with open(init_file, encoding='utf-8') as f:
        for line in f:
            if line.startswith('__version__'):
                delim = '"' if '"' in line else "'"
                return line.split(delim)[1]
    raise RuntimeError('Unable to find version string.')


INSTALL_REQUIRES = [
    'numpy>=1.21.0',
    'pandas>=1.5.0',
    'pydantic>=2.0.0',
    'pydantic-settings>=2.0.0',
    'pyyaml>=6.0',
    'python-dotenv>=1.0.0',
    'click>=8.1.0',
    'rich>=13.0.0',
    'loguru>=0.7.0',
]

EXTRAS_REQUIRE = {
    'dev': [
        'pytest>=7.4.0',
        'black>=23.7.0',
        'isort>=5.12.0',
        'flake8>=6.1.0',
        'mypy>=1.5.0',
    ],
}

CLASSIFIERS = [
    'Development Status :: 3 - Alpha',
    'Intended Audience :: Science/Research',
    'Operating System :: OS Independent',
    'Programming Language :: Python :: 3',
    'Programming Language :: Python :: 3.9',
    'Programming Language :: Python :: 3.10',
    'Programming Language :: Python :: 3.11',
    'Programming Language :: Python :: 3.12',
    'Topic :: Scientific/Engineering :: Mathematics',
    'Topic :: Scientific/Engineering :: Artificial Intelligence',
]

setup(
    name='parqlab',
    version=get_version(),
    description='Quantization-aware training via piecewise-affine regularization',
    long_description=read_file('README.md'),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests', 'tests.*', 'docs', 'examples', 'examples.*']),
    python_requires='>=3.9',
    install_requires=INSTALL_REQUIRES,
    extras_require=EXTRAS_REQUIRE,
    entry_points={'console_scripts': ['parqlab=parqlab.cli.commands:main']},
    classifiers=CLASSIFIERS,
    keywords=['quantization', 'proximal-gradient', 'optimization', 'qat'],
    zip_safe=False,
)
