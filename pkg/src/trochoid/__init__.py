"""Closed-form trochoid solution"""
