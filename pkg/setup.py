"""gramdet setup.py.

Notes:
    See pyproject.toml for the rest of the setup config. gramdet is pure
    Python, this file only exists for tools that still call setup.py.
"""

from setuptools import setup

setup()
