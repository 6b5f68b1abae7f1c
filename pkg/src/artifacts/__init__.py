"""Output files and run manifests"""
