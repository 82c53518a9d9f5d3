# -*- coding: utf-8 -*-

from __future__ import print_function

import sys, re, os

try:
    from setuptools import setup
except ImportError:
    print("The preferred way to invoke 'setup.py' is via pip, as in 'pip "
          "install .'. If you wish to run the setup script directly, you must "
          "first install the build dependencies listed in pyproject.toml!",
          file=sys.stderr)
    raise

VERSION_REGEX = re.compile(
    r"^\s*SKFORGE_VERSION_([A-Z]+)\s*=\s*(\d+)\s*$", re.MULTILINE)

this_directory = os.path.abspath(os.path.dirname(__file__))

with open(os.path.join(this_directory, "skforge/config.py")) as f:
    matches = dict(VERSION_REGEX.findall(f.read()))
    skforge_version = "{MAJOR}.{MINOR}.{PATCH}".format(**matches)

with open(os.path.join(this_directory, 'README.rst'), encoding='utf-8') as f:
    long_description = f.read()

long_description = long_description[long_description.find('About this project'):]

setup(
    name="skforge",
    version=skforge_version,
    description="Gate synthesis by zigzag refinement of roughly exponential "
                "steps",
    license="BSD",
    long_description=long_description,
    long_description_content_type='text/x-rst',
    packages=['skforge'],
    package_data={'skforge': ['data/*.json']},
    install_requires=['numpy>=1.21', 'mpmath>=1.2', 'pandas>=1.5'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['skforge=skforge.cli:main']},
    python_requires=">=3.8"
)
