"""Desk-scale capture-cluster toolkit: capacity planning, stream placement,
netboot and data-plane simulation, agent/manager control plane and metrics."""

__version__ = "0.1.0"
