"""Reproducible experiment pipelines."""
