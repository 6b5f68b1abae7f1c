"""Partitions, permutations and Hurwitz counting"""
