"""Corruption policies, one module per policy."""
