"""Variational EM driver for block recovery."""
import json
import logging
import os
import warnings
from dataclasses import dataclass

import numpy as np

from ..model import BlockAssignment
from .init import init_blocks
from .layers import SparseLayers
from .omega import ClampWarning, lower_bound, omega
from .state import VariationalState, smoothed_one_hot
from .updates import EmptyCellWarning, update_eta, update_pi, update_xi

log = logging.getLogger(__name__)

INIT_SMOOTHING = 1e-2
REL_TOL = 1e-9


@dataclass
class EMResult:
    assignment: BlockAssignment
    state: VariationalState
    trace: list
    initial: BlockAssignment
    converged: bool
    iterations: int

    @property
    def lower_bounds(self):
        return np.array([lb for _, lb in self.trace])


def modal_assignment(xi):
    """Row-wise argmax of ``xi`` (ties go to the lowest index), relabelled densely."""
    return BlockAssignment.from_labels(np.argmax(xi, axis=1))


def initial_state(g, x, z, K, layers, smoothing=INIT_SMOOTHING):
    xi = smoothed_one_hot(np.asarray(z, dtype=np.int64), K, smoothing)
    eta = update_eta(xi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyCellWarning)
        pi1, _ = update_pi(g, x, xi, layers, warn=False)
    return VariationalState(xi=xi, eta=eta, pi1=pi1)


def write_checkpoint(directory, state):
    """``xi_<iter>.bin`` (int64 header n, K, iteration then row-major float64) and ``params_<iter>.json``."""
    os.makedirs(directory, exist_ok=True)
    it = state.iteration
    with open(os.path.join(directory, f"xi_{it:05d}.bin"), "wb") as fh:
        fh.write(np.array([state.n, state.K, it], dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(state.xi, dtype="<f8").tobytes())
    with open(os.path.join(directory, f"params_{it:05d}.json"), "w") as fh:
        json.dump({"iteration": it, "eta": state.eta.tolist(), "pi1": state.pi1.tolist()}, fh)


def read_checkpoint_xi(path):
    with open(path, "rb") as fh:
        n, K, it = np.frombuffer(fh.read(24), dtype="<i8")
        xi = np.frombuffer(fh.read(), dtype="<f8").reshape(int(n), int(K))
    return xi.copy(), int(it)


def em_run(g, x=None, K_max=10, iters=250, seed=0, init=None, tol=REL_TOL, quad_form="derived",
           max_nnz=None, checkpoint_dir=None, use_covariates=True):
    """Recover blocks by variational EM with MM updates of ``xi``.

    Each iteration runs ``omega -> xi -> eta -> pi -> lower bound``. It stops
    after ``iters`` iterations or once the relative lower-bound improvement
    drops below ``tol``; ``tol=0`` always runs ``iters`` iterations. The trace holds ``(iteration, lower_bound)`` pairs,
    starting with iteration 0 at the initial state.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    if not use_covariates:
        x = None
    layers = SparseLayers(g, x, max_nnz=max_nnz)
    if init is None:
        init = init_blocks(g, K_max, seed=seed)
    elif not isinstance(init, BlockAssignment):
        init = BlockAssignment.from_labels(init)
    if init.K > K_max:
        raise ValueError(f"initial partition has {init.K} blocks, more than K_max={K_max}")
    state = initial_state(g, x, init.z, init.K, layers)
    om = omega(g, x, state, layers)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClampWarning)
        lb = lower_bound(g, x, state, layers, om, warn=False)
    trace = [(0, lb)]
    converged = False
    for it in range(1, iters + 1):
        xi = update_xi(g, x, state, layers, om, quad_form)
        eta = update_eta(xi)
        pi1, n_empty = update_pi(g, x, xi, layers, warn=False)
        if n_empty:
            log.debug("iteration %d: %d empty pi cells", it, n_empty)
        state = VariationalState(xi=xi, eta=eta, pi1=pi1, iteration=it)
        om = omega(g, x, state, layers)
        new_lb = lower_bound(g, x, state, layers, om, warn=False)
        trace.append((it, new_lb))
        if checkpoint_dir:
            write_checkpoint(checkpoint_dir, state)
        improvement = new_lb - lb
        lb = new_lb
        if tol > 0 and abs(improvement) <= tol * max(abs(lb), 1.0):
            converged = True
            break
    state.trace = trace
    return EMResult(modal_assignment(state.xi), state, trace, init, converged, state.iteration)
