"""Exact (closed-form or finite-sum) win and last probabilities.

Four independent routes are provided and cross-checked in the tests:

* ``win_probs_dp`` / ``last_probs_dp``: forward sweeps over the state
  lattice, processing states in an order compatible with the coordinate
  partial order and absorbing boundary mass.
* ``win_prob_negmulti``: the finite (m-1)-fold negative-multinomial sum.
* ``win_prob_two_player`` / ``win_prob_sum_beta``: regularized
  incomplete-beta reductions (the latter for canonical probabilities).
* ``last_prob_inclusion_exclusion``: alternating sum of marginal
  negative-multinomial rectangle probabilities with renormalized tails.

Hot loops are numba kernels; with numba disabled the module dispatches to
vectorized numpy equivalents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import njit, using_numba
from .model import BudgetError, GameSpec, Kind, Method, RaceProbabilities
from .special import reg_inc_beta

__all__ = [
    "Budgets",
    "DEFAULT_BUDGETS",
    "NegMultinomialParams",
    "last_prob_inclusion_exclusion",
    "last_probs_dp",
    "last_probs_rational",
    "negmulti_rect_prob",
    "win_prob_negmulti",
    "win_prob_sum_beta",
    "win_prob_two_player",
    "win_probs_dp",
    "win_probs_rational",
]


@dataclass(frozen=True)
class Budgets:
    """Resource limits for the exact methods."""

    state_budget: int = 10**8
    term_budget: int = 10**7


DEFAULT_BUDGETS = Budgets()


@dataclass(frozen=True)
class NegMultinomialParams:
    """Negative multinomial parameters: success count and failure probs."""

    n1: int
    tail_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if int(self.n1) != self.n1 or self.n1 < 1:
            raise ValueError(f"n1 must be a positive integer, got {self.n1!r}")
        tail = tuple(float(p) for p in self.tail_probs)
        object.__setattr__(self, "tail_probs", tail)
        for p in tail:
            if not (0.0 < p < 1.0):
                raise ValueError(f"tail probabilities must lie in (0,1), got {p!r}")
        if 1.0 - math.fsum(tail) <= 0.0:
            raise ValueError("tail probabilities must sum to less than 1")

    @property
    def success_prob(self) -> float:
        return 1.0 - math.fsum(self.tail_probs)


# ---------------------------------------------------------------------------
# lattice sweeps
# ---------------------------------------------------------------------------


@njit(cache=True)
def _win_dp_kernel(dims, probs):
    m = dims.size
    size = 1
    for i in range(m):
        size *= dims[i]
    strides = np.empty(m, np.int64)
    acc = 1
    for i in range(m - 1, -1, -1):
        strides[i] = acc
        acc *= dims[i]
    mass = np.zeros(size, np.float64)
    mass[0] = 1.0
    pi = np.zeros(m, np.float64)
    digits = np.zeros(m, np.int64)
    for flat in range(size):
        w = mass[flat]
        if w > 0.0:
            for l in range(m):
                wl = w * probs[l]
                if digits[l] + 1 == dims[l]:
                    pi[l] += wl
                else:
                    mass[flat + strides[l]] += wl
        i = m - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] == dims[i]:
                digits[i] = 0
                i -= 1
            else:
                break
    return pi


@njit(cache=True)
def _last_dp_kernel(goals, probs):
    m = goals.size
    size = 1
    for i in range(m):
        size *= goals[i] + 1
    strides = np.empty(m, np.int64)
    acc = 1
    for i in range(m - 1, -1, -1):
        strides[i] = acc
        acc *= goals[i] + 1
    mass = np.zeros(size, np.float64)
    mass[0] = 1.0
    tau = np.zeros(m, np.float64)
    digits = np.zeros(m, np.int64)
    for flat in range(size):
        w = mass[flat]
        if w > 0.0:
            p_unf = 0.0
            n_unf = 0
            only = -1
            for l in range(m):
                if digits[l] < goals[l]:
                    p_unf += probs[l]
                    n_unf += 1
                    only = l
            if n_unf == 1:
                tau[only] += w
            else:
                for l in range(m):
                    if digits[l] < goals[l]:
                        mass[flat + strides[l]] += w * probs[l] / p_unf
        i = m - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] == goals[i] + 1:
                digits[i] = 0
                i -= 1
            else:
                break
    return tau


def _strides_of(dims: tuple[int, ...]) -> np.ndarray:
    strides = np.empty(len(dims), np.int64)
    acc = 1
    for i in range(len(dims) - 1, -1, -1):
        strides[i] = acc
        acc *= dims[i]
    return strides


def _level_buckets(dims: tuple[int, ...]):
    # Flat-index buckets grouped by coordinate sum, in increasing order.
    lev = None
    m = len(dims)
    for i, d in enumerate(dims):
        shape = [1] * m
        shape[i] = d
        arange = np.arange(d, dtype=np.int32).reshape(shape)
        lev = arange if lev is None else lev + arange
    flat = lev.reshape(-1)
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return order, offsets


def _win_dp_numpy(goals: tuple[int, ...], probs: np.ndarray) -> np.ndarray:
    dims = goals
    m = len(dims)
    strides = _strides_of(dims)
    order, offsets = _level_buckets(dims)
    mass = np.zeros(int(np.prod([int(d) for d in dims], dtype=np.int64)))
    mass[0] = 1.0
    pi = np.zeros(m)
    for s in range(len(offsets) - 1):
        idx = order[offsets[s] : offsets[s + 1]]
        w = mass[idx]
        nz = w > 0.0
        if not nz.any():
            continue
        idx = idx[nz]
        w = w[nz]
        for l in range(m):
            dig = (idx // strides[l]) % dims[l]
            absorb = dig == dims[l] - 1
            if absorb.any():
                pi[l] += w[absorb].sum() * probs[l]
            keep = ~absorb
            if keep.any():
                np.add.at(mass, idx[keep] + strides[l], w[keep] * probs[l])
    return pi


def _last_dp_numpy(goals: tuple[int, ...], probs: np.ndarray) -> np.ndarray:
    dims = tuple(g + 1 for g in goals)
    m = len(dims)
    strides = _strides_of(dims)
    order, offsets = _level_buckets(dims)
    mass = np.zeros(int(np.prod([int(d) for d in dims], dtype=np.int64)))
    mass[0] = 1.0
    tau = np.zeros(m)
    for s in range(len(offsets) - 1):
        idx = order[offsets[s] : offsets[s + 1]]
        w = mass[idx]
        nz = w > 0.0
        if not nz.any():
            continue
        idx = idx[nz]
        w = w[nz]
        unfinished = []
        p_unf = np.zeros(len(idx))
        n_unf = np.zeros(len(idx), np.int8)
        for l in range(m):
            dig = (idx // strides[l]) % dims[l]
            u = dig < goals[l]
            unfinished.append(u)
            p_unf += probs[l] * u
            n_unf += u
        absorb = n_unf == 1
        for l in range(m):
            u = unfinished[l]
            if absorb.any():
                tau[l] += w[absorb & u].sum()
            move = u & ~absorb
            if move.any():
                np.add.at(
                    mass, idx[move] + strides[l], w[move] * probs[l] / p_unf[move]
                )
    return tau


def win_probs_dp(game: GameSpec, budgets: Budgets = DEFAULT_BUDGETS) -> RaceProbabilities:
    """Winning probabilities by forward recursion over the open lattice."""
    goals = game.integer_goals()
    states = math.prod(goals)
    if states > budgets.state_budget:
        raise BudgetError(
            f"win DP needs {states} states, over the budget of {budgets.state_budget}"
        )
    probs = np.asarray(game.probs, np.float64)
    if using_numba():
        pi = _win_dp_kernel(np.asarray(goals, np.int64), probs)
    else:
        pi = _win_dp_numpy(goals, probs)
    return RaceProbabilities(Kind.WIN, tuple(pi.tolist()), Method.DP, 0.0)


def last_probs_dp(game: GameSpec, budgets: Budgets = DEFAULT_BUDGETS) -> RaceProbabilities:
    """Last-place probabilities by forward recursion over the capped lattice.

    Coordinates are capped at the goals; transitions renormalize away the
    self-loops of finished players, which preserves the finishing-order
    law.  A player's probability is the first-entry mass into the region
    where everyone else has finished.
    """
    goals = game.integer_goals()
    states = math.prod(g + 1 for g in goals)
    if states > budgets.state_budget:
        raise BudgetError(
            f"last DP needs {states} states, over the budget of {budgets.state_budget}"
        )
    probs = np.asarray(game.probs, np.float64)
    if using_numba():
        tau = _last_dp_kernel(np.asarray(goals, np.int64), probs)
    else:
        tau = _last_dp_numpy(goals, probs)
    return RaceProbabilities(Kind.LAST, tuple(tau.tolist()), Method.DP, 0.0)


# ---------------------------------------------------------------------------
# weighted grid sums (negative multinomial, sum-of-beta)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _grid_sum_kernel(uppers, axis_logw, axis_off, k_table, fac):
    # Kahan-compensated sum over the k grid of
    #   exp(sum_l axis_logw[l][k_l] + k_table[K]) * fac[K],  K = sum_l k_l.
    naxes = uppers.size
    total = 0.0
    comp = 0.0
    k = np.zeros(naxes, np.int64)
    while True:
        big_k = 0
        acc = 0.0
        for i in range(naxes):
            ki = k[i]
            big_k += ki
            acc += axis_logw[axis_off[i] + ki]
        term = math.exp(acc + k_table[big_k]) * fac[big_k]
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        i = naxes - 1
        advanced = False
        while i >= 0:
            k[i] += 1
            if k[i] > uppers[i]:
                k[i] = 0
                i -= 1
            else:
                advanced = True
                break
        if not advanced:
            break
    return total


_CHUNK = 1 << 21


def _grid_sum_numpy(uppers, axis_logw_list, k_table, fac) -> float:
    naxes = len(uppers)
    if naxes == 0:
        return float(math.exp(k_table[0]) * fac[0])
    m = naxes
    # Broadcast per-axis log weights and the K index over the grid,
    # chunking along axis 0 to bound memory.
    tails = []
    k_tails = []
    for i in range(1, m):
        shape = [1] * (m - 1)
        shape[i - 1] = uppers[i] + 1
        tails.append(axis_logw_list[i].reshape(shape))
        k_tails.append(np.arange(uppers[i] + 1, dtype=np.int64).reshape(shape))
    tail_logw = 0.0
    tail_k = 0
    for arr in tails:
        tail_logw = tail_logw + arr
    for arr in k_tails:
        tail_k = tail_k + arr
    total = 0.0
    head_size = uppers[0] + 1
    tail_size = int(np.prod([u + 1 for u in uppers[1:]], dtype=np.int64)) if m > 1 else 1
    step = max(1, _CHUNK // max(tail_size, 1))
    for lo in range(0, head_size, step):
        hi = min(head_size, lo + step)
        head_idx = np.arange(lo, hi, dtype=np.int64)
        logw = axis_logw_list[0][lo:hi].reshape((-1,) + (1,) * (m - 1)) + tail_logw
        big_k = head_idx.reshape((-1,) + (1,) * (m - 1)) + tail_k
        total += float(np.sum(np.exp(logw + k_table[big_k]) * fac[big_k]))
    return total


def _grid_sum(uppers, axis_logw_list, k_table, fac) -> float:
    if using_numba() and len(uppers) > 0:
        axis_logw = np.concatenate(axis_logw_list) if axis_logw_list else np.zeros(0)
        axis_off = np.concatenate(
            ([0], np.cumsum([len(a) for a in axis_logw_list]))
        ).astype(np.int64)
        return float(
            _grid_sum_kernel(
                np.asarray(uppers, np.int64), axis_logw, axis_off, k_table, fac
            )
        )
    return _grid_sum_numpy(uppers, axis_logw_list, k_table, fac)


def negmulti_rect_prob(params: NegMultinomialParams, uppers) -> float:
    """P(A_k <= uppers[k] for all k) for a negative multinomial vector.

    Evaluated as the finite sum with log-space multinomial weights.
    """
    uppers = [int(u) for u in uppers]
    if len(uppers) != len(params.tail_probs):
        raise ValueError("uppers length must match tail_probs length")
    for u in uppers:
        if u < 0:
            raise ValueError(f"uppers must be >= 0, got {u!r}")
    n1 = int(params.n1)
    q1 = params.success_prob
    base = n1 * math.log(q1) - math.lgamma(n1)
    axis_logw_list = []
    for u, q in zip(uppers, params.tail_probs):
        ks = np.arange(u + 1, dtype=np.float64)
        axis_logw_list.append(ks * math.log(q) - np.array([math.lgamma(k + 1.0) for k in ks]))
    k_max = sum(uppers)
    k_table = np.array(
        [base + math.lgamma(n1 + j) for j in range(k_max + 1)], np.float64
    )
    fac = np.ones(k_max + 1, np.float64)
    val = _grid_sum(uppers, axis_logw_list, k_table, fac)
    return min(1.0, max(0.0, val))


def win_prob_negmulti(
    game: GameSpec, player: int, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """Winning probability of one player via the negative-multinomial sum."""
    goals = game.integer_goals()
    m = game.m
    if not (0 <= player < m):
        raise ValueError(f"player index out of range: {player!r}")
    others = [k for k in range(m) if k != player]
    terms = math.prod(goals[k] for k in others)
    if terms > budgets.term_budget:
        raise BudgetError(
            f"negative-multinomial sum needs {terms} terms, over the budget "
            f"of {budgets.term_budget}"
        )
    params = NegMultinomialParams(
        goals[player], tuple(game.probs[k] for k in others)
    )
    return negmulti_rect_prob(params, [goals[k] - 1 for k in others])


def win_prob_two_player(n1: int, n2: int) -> float:
    """pi_1 for two players with canonical probabilities."""
    if int(n1) != n1 or int(n2) != n2 or n1 < 1 or n2 < 1:
        raise ValueError(f"goals must be positive integers, got {n1!r}, {n2!r}")
    n1 = int(n1)
    n2 = int(n2)
    return reg_inc_beta(n1 / (n1 + n2), float(n1), float(n2))


def win_prob_sum_beta(game: GameSpec, budgets: Budgets = DEFAULT_BUDGETS) -> float:
    """pi_1 for canonical probabilities as a nested sum of gamma-ratio
    weights times regularized incomplete beta values.

    Only valid for the canonical choice p = n / sum(n), under which the
    reduction holds; other probability vectors raise a ValueError.
    """
    goals = game.integer_goals()
    if not game.is_canonical():
        raise ValueError(
            "win_prob_sum_beta requires canonical probabilities p = n/sum(n)"
        )
    m = game.m
    n1 = goals[0]
    n_m = goals[m - 1]
    mids = goals[1 : m - 1]
    terms = math.prod(mids) if mids else 1
    if terms > budgets.term_budget:
        raise BudgetError(
            f"sum-of-beta needs {terms} terms, over the budget of {budgets.term_budget}"
        )
    s_head = sum(goals[: m - 1])
    s_all = sum(goals)
    x = s_head / s_all
    base = n1 * math.log(n1) - math.lgamma(n1)
    uppers = [n - 1 for n in mids]
    axis_logw_list = []
    for n in mids:
        ks = np.arange(n, dtype=np.float64)
        axis_logw_list.append(
            ks * math.log(n) - np.array([math.lgamma(k + 1.0) for k in ks])
        )
    k_max = sum(uppers) if uppers else 0
    log_s_head = math.log(s_head)
    k_table = np.array(
        [
            base + math.lgamma(n1 + j) - (n1 + j) * log_s_head
            for j in range(k_max + 1)
        ],
        np.float64,
    )
    fac = np.array(
        [reg_inc_beta(x, float(n1 + j), float(n_m)) for j in range(k_max + 1)],
        np.float64,
    )
    val = _grid_sum(uppers, axis_logw_list, k_table, fac)
    return min(1.0, max(0.0, val))


def last_prob_inclusion_exclusion(
    game: GameSpec, player: int, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """Last-place probability of one player by inclusion-exclusion.

    tau = sum over subsets S of the other players of (-1)^|S| times the
    probability that everyone in S finishes within their goal, evaluated
    as a marginal negative-multinomial rectangle with tail probabilities
    renormalized by p_player + sum_{j in S} p_j.
    """
    goals = game.integer_goals()
    m = game.m
    if not (0 <= player < m):
        raise ValueError(f"player index out of range: {player!r}")
    others = [k for k in range(m) if k != player]
    total_terms = math.prod(goals[k] + 1 for k in others)
    if total_terms > budgets.term_budget:
        raise BudgetError(
            f"inclusion-exclusion needs {total_terms} terms, over the budget "
            f"of {budgets.term_budget}"
        )
    p_player = game.probs[player]
    n1 = goals[player]
    contributions = []
    for bits in range(1 << len(others)):
        subset = [others[i] for i in range(len(others)) if bits >> i & 1]
        if not subset:
            contributions.append(1.0)
            continue
        denom = p_player + math.fsum(game.probs[k] for k in subset)
        params = NegMultinomialParams(
            n1, tuple(game.probs[k] / denom for k in subset)
        )
        value = negmulti_rect_prob(params, [goals[k] - 1 for k in subset])
        contributions.append(value if len(subset) % 2 == 0 else -value)
    return min(1.0, max(0.0, math.fsum(contributions)))


# ---------------------------------------------------------------------------
# exact-rational reference recursion (small games)
# ---------------------------------------------------------------------------


def win_probs_rational(goals) -> list[Fraction]:
    """Winning probabilities as exact rationals (canonical p), for
    calibrating the floating-point tolerances on small games."""
    goals = tuple(int(g) for g in goals)
    m = len(goals)
    total = sum(goals)
    p = [Fraction(g, total) for g in goals]
    pi = [Fraction(0)] * m
    current = {(0,) * m: Fraction(1)}
    while current:
        nxt: dict[tuple, Fraction] = {}
        for state, w in current.items():
            for l in range(m):
                wl = w * p[l]
                if state[l] + 1 == goals[l]:
                    pi[l] += wl
                else:
                    tgt = state[:l] + (state[l] + 1,) + state[l + 1 :]
                    nxt[tgt] = nxt.get(tgt, Fraction(0)) + wl
        current = nxt
    return pi


def last_probs_rational(goals) -> list[Fraction]:
    """Last-place probabilities as exact rationals (canonical p)."""
    goals = tuple(int(g) for g in goals)
    m = len(goals)
    total = sum(goals)
    p = [Fraction(g, total) for g in goals]
    tau = [Fraction(0)] * m
    current = {(0,) * m: Fraction(1)}
    while current:
        nxt: dict[tuple, Fraction] = {}
        for state, w in current.items():
            unfinished = [l for l in range(m) if state[l] < goals[l]]
            if len(unfinished) == 1:
                tau[unfinished[0]] += w
                continue
            p_unf = sum(p[l] for l in unfinished)
            for l in unfinished:
                tgt = state[:l] + (state[l] + 1,) + state[l + 1 :]
                nxt[tgt] = nxt.get(tgt, Fraction(0)) + w * p[l] / p_unf
        current = nxt
    return tau
