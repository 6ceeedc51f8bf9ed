"""Threshold secret sharing for edge storage: split, place, survive, rebuild."""

from .errors import *  # noqa: F401,F403
from .gf256 import gf_inv, gf_mul, lagrange_weights_at_zero, poly_eval
from .kernels import BACKEND
from .rng import RandomSource
from .shares import ChunkLayout, Share, SharePolicy, decode_share, encode_share
from .sss import chunk, reconstruct, reconstruct_data, split, split_data

__version__ = "0.1.0"
