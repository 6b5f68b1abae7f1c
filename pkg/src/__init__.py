"""Channel Laplacian growth tau-function and double Hurwitz numbers"""

__version__ = "0.1.0"
