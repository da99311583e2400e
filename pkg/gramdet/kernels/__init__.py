"""Kernel implementations, one module per kernel kind."""
