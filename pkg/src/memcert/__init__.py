"""Certify quantum memories with semiquantum games.

Modules: ``linalg`` (bipartite operator algebra), ``channels`` (Kraus/Choi
channels, instruments, supermaps), ``certification`` (PPT test, witnesses,
product-state decompositions), ``games`` (scenarios, correlations, payoffs,
the certification pipeline), ``io`` and ``cli``.
"""

__version__ = "0.1.0"
