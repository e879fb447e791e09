"""
Core numerical functionality for fkrylov
"""
