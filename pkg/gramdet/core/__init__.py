"""Core scoring, simulation and ingestion modules."""
