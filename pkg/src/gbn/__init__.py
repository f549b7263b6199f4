"""Blue-noise sampling of graph signals.

Graph construction, spectral tools, void-and-cluster and greedy samplers,
vertex- and spectral-domain quality metrics, least-squares reconstruction and
a reproducible experiment runner.
"""
from .graph import Graph, DisconnectedGraphError, geodesic_distances, laplacian
from .pattern import SamplingPattern
from .spectral import SpectralBasis, eigendecompose, gft, igft, redness, power_spectrum
from .samplers import VacParams, vac, white_noise, greedy_sigma_min, greedy_spectral_proxy
from .reconstruct import reconstruct_ls

__version__ = "0.1.0"

__all__ = [
    "Graph", "DisconnectedGraphError", "geodesic_distances", "laplacian",
    "SamplingPattern", "SpectralBasis", "eigendecompose", "gft", "igft",
    "redness", "power_spectrum", "VacParams", "vac", "white_noise",
    "greedy_sigma_min", "greedy_spectral_proxy", "reconstruct_ls",
]
