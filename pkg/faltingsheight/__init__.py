"""Faltings heights of elliptic curves over Q and the census of S_X"""

__version__ = "0.1.0"
