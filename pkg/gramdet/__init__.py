"""Gram determinant reliability scoring for reported datasets."""
from gramdet._version import __version__
