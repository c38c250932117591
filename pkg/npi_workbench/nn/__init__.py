"""Minimal differentiable-compute kernel on numpy arrays."""
