"""Multigrid waveform relaxation for time-fractional heat equations on graded meshes."""

from ._fracwrmg import HMatrix, dense_r, graded_mesh, mittag_leffler, solve, uniform_mesh

__all__ = ["HMatrix", "dense_r", "graded_mesh", "mittag_leffler", "solve", "uniform_mesh"]
