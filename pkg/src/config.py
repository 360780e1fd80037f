"""Toolkit-wide configuration: tolerances, default sample counts, target values and seeds."""

import os
import zlib
from dataclasses import dataclass, replace

import numpy as np

####################################
# Tolerances
####################################
# analytic identities (closed-form states, exact probabilities)
TOLERANCE = 1e-10
# quantities recomputed under random rotations
ROTATION_TOLERANCE = 1e-9
# dfs_project accepts states whose residual outside span{phi0, phi1} is below this
SUBSPACE_TOLERANCE = 1e-8
# "zero component" threshold when comparing supports in a product basis
SUPPORT_TOLERANCE = 1e-8
# |sin(theta_a - theta_b)| below this is a cosecant singularity
DEGENERACY_TOLERANCE = 1e-12
# immunity verdict: min fidelity > 1 - IMMUNITY_TOLERANCE
IMMUNITY_TOLERANCE = 1e-9
# width of statistical acceptance bands, in standard errors
SIGMA_BAND = 5.0

####################################
# Default sample counts
####################################
DEFAULT_ROTATIONS = 100
DEFAULT_DECOHERENCE_SAMPLES = 1000
DEFAULT_ROUNDS = 1_000_000
DEFAULT_GRID = 200
DEFAULT_REFINE_TOL = 1e-12
DEFAULT_STARTS = 64
DEFAULT_BATCH = 20_000
MAX_QUBITS = 8

####################################
# Exact target values
####################################
HARDY_PROBABILITY = 9 / 112
GOLDEN_HARDY_PROBABILITY = ((np.sqrt(5) - 1) / 2) ** 5
REDUCED_EIGENVALUES = ((7 + np.sqrt(13)) / 14, (7 - np.sqrt(13)) / 14)
DISTINGUISHABLE_OMEGAS = tuple(n * np.pi / 6 for n in range(6))

####################################
# Seeds
####################################
DEFAULT_SEED = 20031107
SEED_ENV = "DFS_HARDY_SEED"
TOL_ENV = "DFS_HARDY_TOL"

TOOLKIT_VERSION = "0.1.0"
REPORT_SCHEMA_VERSION = 1

# Section order of the full report; also the names of the random sub-streams.
SUITES = ("correlations", "simulate", "decoherence", "distinguish", "hardy", "lhv")


@dataclass(frozen=True)
class ToolkitConfig:
    seed: int = DEFAULT_SEED
    tolerance: float = TOLERANCE
    rotations: int = DEFAULT_ROTATIONS
    decoherence_samples: int = DEFAULT_DECOHERENCE_SAMPLES
    rounds: int = DEFAULT_ROUNDS
    grid: int = DEFAULT_GRID
    refine_tol: float = DEFAULT_REFINE_TOL
    starts: int = DEFAULT_STARTS

    def with_overrides(self, **kwargs):
        """Copy with every non-None keyword applied."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def load_config(environ=None):
    """Build the configuration, honouring the seed and tolerance environment overrides."""
    environ = os.environ if environ is None else environ
    config = ToolkitConfig()
    if environ.get(SEED_ENV):
        config = replace(config, seed=int(environ[SEED_ENV]))
    if environ.get(TOL_ENV):
        config = replace(config, tolerance=float(environ[TOL_ENV]))
    return config


def resolve_tol(tol):
    return TOLERANCE if tol is None else tol


####################################
# Random streams
####################################
def seed_sequence(root_seed, name):
    """SeedSequence for the named sub-stream of ``root_seed``.

    The spawn key is the CRC-32 of the name, so the stream of one suite does
    not depend on which other suites run or in which order.
    """
    return np.random.SeedSequence(int(root_seed), spawn_key=(zlib.crc32(name.encode()),))


def seed_stream(root_seed, name):
    return np.random.default_rng(seed_sequence(root_seed, name))


def spawn_generators(seed, n):
    """Split ``seed`` (int, SeedSequence or Generator) into ``n`` independent generators."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(n)
    if isinstance(seed, np.random.SeedSequence):
        # fresh copy: spawning advances the parent's child counter
        seed = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    else:
        seed = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in seed.spawn(n)]


def as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def seed_info(seed):
    """JSON-friendly description of a seed or SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": int(seed.entropy), "spawn_key": [int(k) for k in seed.spawn_key]}
    if isinstance(seed, np.random.Generator):
        return "generator"
    return int(seed)
