"""Cascade gain-scheduled LPV guidance toolkit.

Layers, bottom up:

* :mod:`lpvcascade.plant`      nonlinear bicycle-model ground truth
* :mod:`lpvcascade.lpv`        scheduling boxes and quasi-LPV embeddings
* :mod:`lpvcascade.sdp`        barrier solver for LMI-constrained programs
* :mod:`lpvcascade.synthesis`  vertex-wise LQR design and certificates
* :mod:`lpvcascade.scheduler`  multilinear gain blending and control laws
* :mod:`lpvcascade.planner`    waypoint spline paths and speed profiles
* :mod:`lpvcascade.simulate`   two-rate closed-loop simulator and metrics
* :mod:`lpvcascade.config`     TOML run configuration
* :mod:`lpvcascade.cli`        synth / simulate / report entry points
"""

__version__ = "0.1.0"
