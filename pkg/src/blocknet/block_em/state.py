from dataclasses import dataclass, field

import numpy as np

XI_FLOOR = 1e-12
PI_CLAMP = 1e-12


@dataclass
class VariationalState:
    """Variational block probabilities and the link-probability tables.

    ``pi1[c, k, l]`` is the probability of a link between a node in block
    ``k`` and one in block ``l`` whose covariate-match pattern has code
    ``c`` (bit ``s`` set when covariate ``s`` matches). The no-link table
    is ``1 - pi1``.
    """

    xi: np.ndarray
    eta: np.ndarray
    pi1: np.ndarray
    iteration: int = 0
    trace: list = field(default_factory=list)

    @property
    def n(self):
        return self.xi.shape[0]

    @property
    def K(self):
        return self.xi.shape[1]

    @property
    def C(self):
        return self.pi1.shape[0]

    def log_pi(self):
        """``(2, C, K, K)`` array of clamped ``log pi(d, c)``."""
        p1 = np.clip(self.pi1, PI_CLAMP, 1.0 - PI_CLAMP)
        return np.log(np.stack([1.0 - p1, p1]))

    def clamped_cells(self):
        return int(np.count_nonzero((self.pi1 < PI_CLAMP) | (self.pi1 > 1.0 - PI_CLAMP)))


@dataclass(frozen=True)
class MinorizerCoeffs:
    """Per-node quadratic programs ``sum_k quad[i,k] xi_k**2 + lin[i,k] xi_k``."""

    quad: np.ndarray
    lin: np.ndarray

    def value(self, xi):
        return float((self.quad * xi * xi + self.lin * xi).sum())


def floor_rows(xi, floor=XI_FLOOR):
    xi = np.maximum(xi, floor)
    return xi / xi.sum(axis=1, keepdims=True)


def smoothed_one_hot(z, K, smoothing):
    n = z.shape[0]
    xi = np.full((n, K), smoothing / K)
    xi[np.arange(n), z] += 1.0 - smoothing
    return floor_rows(xi)
