"""Numerical channel Laplacian growth"""
