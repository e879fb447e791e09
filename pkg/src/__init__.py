"""
fkrylov - Krylov approximation of Fréchet derivative actions of matrix functions
"""

__version__ = "0.1.0"
