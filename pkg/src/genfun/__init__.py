"""Exact graded generating series"""
