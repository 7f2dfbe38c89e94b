"""Keeps the repo root importable when the suite runs under pytest."""
