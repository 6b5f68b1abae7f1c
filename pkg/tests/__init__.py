"""Test suite for channel-tau"""
