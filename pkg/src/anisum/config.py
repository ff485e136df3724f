"""Centralized numeric defaults, printed in every CLI report header."""

import os

DEFAULTS = {
    "restarts": 32,      # multistart restarts
    "max_iters": 500,    # ascent iterations per restart
    "tol": 1e-9,         # relative-improvement convergence threshold
    "fd_step": 1e-6,     # central finite-difference step
    "kmax": 16,          # atom-count ceiling for the doubling schedule
    "ktol": 1e-6,        # relative gain threshold that stops the doubling
    "exchange_tol": 1e-7,
    "exchange_rounds": 50,
    "maurey_atoms": 8,
    "grid": 64,          # dual-grid size for domination LPs
    "tests": 32,         # training vectors for domination LPs
    "extreme_point_cap": 20,
    "theorem_gap": 1e-2,  # relative tolerance for equality-type checks
}


def thread_count() -> int:
    """Worker threads for multistart; overridable via ANISUM_THREADS."""
    raw = os.environ.get("ANISUM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
