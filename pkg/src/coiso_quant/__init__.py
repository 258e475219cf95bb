"""Exact first-order deformation checks for line bundles on coisotropic subvarieties."""

__version__ = "0.1.0"
