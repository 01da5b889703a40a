"""
Signal-design subproblem: transmit beamformers (power folded in) and receive combiners for a fixed allocation.

The harmonic-rate objective sum I_n / R_n is minimized through its weighted MSE reformulation by
block-coordinate updates of combiners, weights and beamformers.
"""


# global imports
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import numpy as np
import scipy.linalg

# local imports
from .model import (Allocation, BeamformingState, ChannelSet, NetworkInstance, Pair, cooccurrence, link_rate,
                    matched_filter)
from .validation import check_positive, check_positive_int
from ..errors.errors import ValidationError


logger = logging.getLogger(__name__)

# supported logarithms of the weight formula
LOG_BASES = {"e": np.log, "2": np.log2}

# c(x) = -scale / ln(x) has derivative 1 / (x log(x)^2) in the given base
_UTILITY_SCALE = {"e": 1.0, "2": np.log(2.0) ** 2}


@dataclass(frozen=True)
class WmmseConfig:
    """
    Settings of the WMMSE loop.

    attributes:
        tolerance: Stop when the change of sum log2 w_n drops below this value.
        max_iterations: Hard cap on rounds.
        bisection_tolerance: Relative power tolerance of the multiplier search.
        mse_floor: Clamp of the MSE away from 0 and 1 before the weight update.
        rate_floor: Links below this rate in bits per second are reported as weak.
        log_base: Logarithm of c(x) = -1/log(x), "e" or "2".

    """
    tolerance: float = 1e-4
    max_iterations: int = 100
    bisection_tolerance: float = 1e-12
    mse_floor: float = 1e-12
    rate_floor: float = 1.0
    log_base: str = "e"

    def __post_init__(self) -> None:
        check_positive("tolerance", self.tolerance)
        check_positive_int("max_iterations", self.max_iterations)
        check_positive("bisection_tolerance", self.bisection_tolerance)
        check_positive("mse_floor", self.mse_floor)
        check_positive("rate_floor", self.rate_floor)
        if not self.mse_floor < 0.5:
            raise ValidationError("Value of parameter 'mse_floor' should be below 0.5.")
        if self.log_base not in LOG_BASES:
            raise ValidationError(f"Value of parameter 'log_base' should be one of {sorted(LOG_BASES)}.")


@dataclass
class WmmseState:
    """
    Iterate of the WMMSE loop, all lists in link order.

    attributes:
        beamformers: Combined beamformers g_n.
        combiners: Unnormalized MMSE combiners z_n.
        weights: Weights w_n.
        mse: MSE e_n of (z, g).
        gammas: Clamped MSE each weight was computed from.
        surrogate_value: Weighted MSE objective of the round.
        iteration: Round counter.

    """
    beamformers: List[np.ndarray]
    combiners: List[np.ndarray]
    weights: np.ndarray
    mse: np.ndarray
    gammas: np.ndarray
    surrogate_value: float
    iteration: int
    multiplier: float = 0.0


@dataclass(frozen=True)
class WmmseResult:
    """
    Outcome of wmmse_optimize.

    attributes:
        beamforming: Exported state, beamformers with power folded in and unit-norm combiners.
        state: Iterate the export was made from, None when nothing was optimized.
        converged: False when max_iterations was hit.
        iterations: Rounds run.
        surrogate_history: Surrogate value after every round.
        gamma_history: Clamped MSE values the weights of every round were computed from.
        weak_links: Pairs whose exported rate is below the rate floor.

    """
    beamforming: BeamformingState
    state: Optional[WmmseState] = None
    converged: bool = True
    iterations: int = 0
    surrogate_history: Tuple[float, ...] = ()
    gamma_history: Tuple[np.ndarray, ...] = ()
    weak_links: Tuple[Pair, ...] = field(default_factory=tuple)


def mmse_combiner(n: int, g: Sequence[np.ndarray], alloc: Allocation, ch: ChannelSet, noise_power: float,
                  m_matrix: Optional[np.ndarray] = None) -> np.ndarray:
    """
    MMSE receive combiner z = J^-1 H g of link n, also the SINR maximizer.

    :param n: Link index.
    :param g: Beamformers of every link.
    :param alloc: Allocation.
    :param ch: Channel set.
    :param noise_power: Noise power sigma^2.
    :param m_matrix: Precomputed co-occurrence matrix.
    :return: Unnormalized combiner.
    """
    if m_matrix is None:
        m_matrix = cooccurrence(alloc)
    tx, rx, _ = alloc.links[n]
    desired = ch[(tx, rx)] @ g[n]

    # check for a silent desired signal
    if not np.any(desired):
        return np.zeros_like(desired)

    # J = sum over co-channel links of H g g^H H^H + sigma^2 I
    cov = noise_power * np.eye(desired.shape[0], dtype=complex)
    for m, link in enumerate(alloc.links):
        if m_matrix[n, m]:
            h = ch[(link.tx, rx)] @ g[m]
            cov += np.outer(h, h.conj())
    return scipy.linalg.solve(cov, desired, assume_a="pos")


def link_mse(n: int, z: np.ndarray, g: Sequence[np.ndarray], alloc: Allocation, ch: ChannelSet,
             noise_power: float, m_matrix: Optional[np.ndarray] = None) -> float:
    """
    Mean square error at the receiver of link n.

    :param n: Link index.
    :param z: Combiner of link n, any norm.
    :param g: Beamformers of every link.
    :param alloc: Allocation.
    :param ch: Channel set.
    :param noise_power: Noise power sigma^2.
    :param m_matrix: Precomputed co-occurrence matrix.
    :return: e_n = |1 - z^H H g|^2 + co-channel interference + sigma^2 ||z||^2.
    """
    if m_matrix is None:
        m_matrix = cooccurrence(alloc)
    tx, rx, _ = alloc.links[n]

    # desired signal error first, then co-channel interference
    e = abs(1.0 - np.vdot(z, ch[(tx, rx)] @ g[n])) ** 2
    for m, link in enumerate(alloc.links):
        if m != n and m_matrix[n, m]:
            e += abs(np.vdot(z, ch[(link.tx, rx)] @ g[m])) ** 2
    return float(e + noise_power * np.vdot(z, z).real)


def update_weight(e: float, mse_floor: float = 1e-12, log_base: str = "e") -> float:
    """
    Weight w = 1 / (e (log e)^2) of an MSE value, the derivative of c(x) = -1/log(x).

    :param e: MSE, clamped to [mse_floor, 1 - mse_floor].
    :param mse_floor: Clamp margin.
    :param log_base: "e" or "2".
    :return: Positive finite weight.
    """
    # clamp into the open unit interval
    e = min(max(e, mse_floor), 1.0 - mse_floor)
    log = LOG_BASES[log_base](e)
    return float(1.0 / (e * log ** 2))


def surrogate_value(mse: np.ndarray, weights: np.ndarray, gammas: np.ndarray, data_lengths: np.ndarray,
                    log_base: str = "e") -> float:
    """
    Weighted MSE objective sum I_n (w_n e_n + c(gamma_n) - w_n gamma_n).

    :param mse: Current MSE of every link.
    :param weights: Weights of every link.
    :param gammas: Clamped MSE each weight was computed from.
    :param data_lengths: Data length of every link's sender.
    :param log_base: "e" or "2".
    :return: Objective value.
    """
    c = -_UTILITY_SCALE[log_base] / np.log(gammas)
    return float(np.sum(data_lengths * (weights * mse + c - weights * gammas)))


def beamformer_objective(g: Sequence[np.ndarray], z: Sequence[np.ndarray], w: Sequence[float], alloc: Allocation,
                         ch: ChannelSet, data_lengths: Sequence[float]) -> float:
    """
    Quadratic objective of the beamformer subproblem (noise term dropped, it doesn't depend on g).

    :param g: Beamformers of every link.
    :param z: Combiners of every link.
    :param w: Weights of every link.
    :param alloc: Allocation.
    :param ch: Channel set.
    :param data_lengths: Data length of every link's sender.
    :return: Objective value.
    """
    m_matrix = cooccurrence(alloc)
    value = 0.0
    for n, (tx, rx, _) in enumerate(alloc.links):
        value += data_lengths[n] * w[n] * abs(1.0 - np.vdot(z[n], ch[(tx, rx)] @ g[n])) ** 2
        for m, link in enumerate(alloc.links):
            if m != n and m_matrix[n, m]:
                value += data_lengths[m] * w[m] * abs(np.vdot(z[m], ch[(tx, link.rx)] @ g[n])) ** 2
    return float(value)


def solve_beamformers(z: Sequence[np.ndarray], w: Sequence[float], alloc: Allocation, ch: ChannelSet,
                      net: NetworkInstance, data_lengths: Sequence[float],
                      bisection_tolerance: float = 1e-12) -> Tuple[List[np.ndarray], float]:
    """
    Minimize the weighted MSE over beamformers under the sum power budget.

    For a multiplier mu, g_n(mu) = (A_n + mu I)^-1 b_n. When sum ||g_n(0)||^2 <= P the multiplier is 0,
    otherwise it is found by bisection on the strictly decreasing power sum(||g_n(mu)||^2) = P.

    :param z: Combiners of every link.
    :param w: Weights of every link.
    :param alloc: Allocation.
    :param ch: Channel set.
    :param net: Network instance (power budget).
    :param data_lengths: Data length of every link's sender.
    :param bisection_tolerance: Relative power tolerance.
    :return: Tuple (beamformers, mu).
    """
    m_matrix = cooccurrence(alloc)
    budget = net.power_budget

    # eigendecomposition of every A_n and projection of b_n onto its range
    eigvals, eigvecs, coeffs = [], [], []
    for n, (tx, rx, _) in enumerate(alloc.links):
        a = ch[(tx, rx)].conj().T @ z[n]
        b = data_lengths[n] * w[n] * a
        mat = np.zeros((a.shape[0], a.shape[0]), dtype=complex)
        for m, link in enumerate(alloc.links):
            if m_matrix[m, n]:
                h = ch[(tx, link.rx)].conj().T @ z[m]
                mat += data_lengths[m] * w[m] * np.outer(h, h.conj())
        lam, vec = scipy.linalg.eigh(mat)
        c = vec.conj().T @ b
        threshold = 1e-12 * max(float(lam.max()), 0.0)
        c[lam <= threshold] = 0.0
        eigvals.append(np.maximum(lam, 0.0))
        eigvecs.append(vec)
        coeffs.append(c)

    def beamformers(mu: float) -> List[np.ndarray]:
        out = []
        for lam, vec, c in zip(eigvals, eigvecs, coeffs):
            denom = lam + mu
            scaled = np.divide(c, denom, out=np.zeros_like(c), where=denom > 0)
            out.append(vec @ scaled)
        return out

    def power(mu: float) -> float:
        total = 0.0
        for lam, c in zip(eigvals, coeffs):
            denom = lam + mu
            total += float(np.sum(np.divide(np.abs(c) ** 2, denom ** 2, out=np.zeros(len(c)), where=denom > 0)))
        return total

    # check if the unconstrained solution fits the budget
    if power(0.0) <= budget:
        return beamformers(0.0), 0.0

    # sum ||g(mu)||^2 <= ||b||^2 / mu^2 gives a feasible upper end
    lo = 0.0
    hi = float(np.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in coeffs) / budget))
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if power(mid) > budget:
            lo = mid
        else:
            hi = mid
            if budget - power(hi) <= bisection_tolerance * budget:
                break
    return beamformers(hi), hi


def _unit(z: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Unit-norm copy of z, fallback when z is zero."""
    norm = np.linalg.norm(z)
    return z / norm if norm > 0 else fallback


def wmmse_optimize(alloc: Allocation, ch: ChannelSet, net: NetworkInstance, cfg: WmmseConfig,
                   init: BeamformingState) -> WmmseResult:
    """
    Alternate MMSE combiners, weights and beamformers until sum log2 w_n settles.

    :param alloc: Fixed allocation.
    :param ch: Channel set.
    :param net: Network instance.
    :param cfg: Loop settings.
    :param init: Initial beamformers, missing or silent links start from matched-filter defaults.
    :return: Result holding the exported beamforming state.
    """
    # check for an empty allocation
    if alloc.num_links == 0:
        return WmmseResult(beamforming=init)

    m_matrix = cooccurrence(alloc)
    data = net.data_lengths[[link.tx for link in alloc.links]]
    noise = net.noise_power

    # start from the given beamformers, silent ones from matched filters
    g = []
    for tx, rx in alloc.pairs:
        beam, _ = init.for_pair(tx, rx, ch, net)
        if not np.any(beam):
            beam = np.sqrt(net.default_link_power) * matched_filter(ch[(tx, rx)])[0]
        g.append(beam)

    weights = np.full(alloc.num_links, 2.0)
    history: List[float] = []
    gamma_history: List[np.ndarray] = []
    state = best = None
    converged = False

    for iteration in range(1, cfg.max_iterations + 1):
        # update combiners with beamformers fixed
        z = [mmse_combiner(n, g, alloc, ch, noise, m_matrix) for n in range(alloc.num_links)]
        mse = np.array([link_mse(n, z[n], g, alloc, ch, noise, m_matrix) for n in range(alloc.num_links)])

        # update weights
        previous = weights
        weights = np.array([update_weight(e, cfg.mse_floor, cfg.log_base) for e in mse])
        gammas = np.clip(mse, cfg.mse_floor, 1.0 - cfg.mse_floor)

        # update beamformers
        g, mu = solve_beamformers(z, weights, alloc, ch, net, data, cfg.bisection_tolerance)

        mse = np.array([link_mse(n, z[n], g, alloc, ch, noise, m_matrix) for n in range(alloc.num_links)])
        value = surrogate_value(mse, weights, gammas, data, cfg.log_base)
        # record the round, the lowest surrogate is kept
        history.append(value)
        gamma_history.append(gammas)
        state = WmmseState(beamformers=g, combiners=z, weights=weights, mse=mse, gammas=gammas,
                           surrogate_value=value, iteration=iteration, multiplier=mu)
        if best is None or value < best.surrogate_value:
            best = state

        # check if sum log2 w has settled
        change = abs(float(np.sum(np.log2(weights)) - np.sum(np.log2(previous))))
        logger.debug("WMMSE round %d: surrogate %.9g, weight change %.3g, mu %.3g.", iteration, value, change, mu)
        if change < cfg.tolerance:
            converged = True
            break

    final = state if converged else best
    if not converged:
        logger.debug("WMMSE hit %d rounds without convergence, best round %d kept.",
                     cfg.max_iterations, final.iteration)

    # combiners matched to the exported beamformers, normalized
    beamformers, combiners = {}, {}
    for n, (tx, rx) in enumerate(alloc.pairs):
        z_n = mmse_combiner(n, final.beamformers, alloc, ch, noise, m_matrix)
        beamformers[(tx, rx)] = final.beamformers[n]
        combiners[(tx, rx)] = _unit(z_n, matched_filter(ch[(tx, rx)])[1])
    exported = BeamformingState(beamformers, combiners)

    # check for links below the rate floor
    weak = tuple(pair for n, pair in enumerate(alloc.pairs)
                 if link_rate(n, alloc, exported, ch, net, m_matrix) < cfg.rate_floor)
    if weak:
        logger.debug("Links %s are below the rate floor of %g bit/s.", weak, cfg.rate_floor)

    return WmmseResult(beamforming=exported, state=final, converged=converged, iterations=len(history),
                       surrogate_history=tuple(history), gamma_history=tuple(gamma_history), weak_links=weak)
