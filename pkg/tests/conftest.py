"""Shared pytest configuration.

Keeping this file present also puts the tests directory on sys.path, so the
oracle helpers import as a plain module.
"""
