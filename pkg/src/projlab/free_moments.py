"""Mixed moments of free products of projection blocks.

A family is an ordered list of blocks. A :class:`PairBlock` contributes two
generators ``p_i, q_i`` whose joint law is a :class:`PairState`; a
:class:`SingleBlock` contributes one projection ``r_j`` of trace ``alpha``.
Distinct blocks are free.

Mixed moments are computed by the centering recursion. Split a word
cyclically into maximal runs ``a_1 ... a_m`` that alternate between blocks,
with ``c_i = tau(a_i)``. Freeness gives
``tau((a_1 - c_1) ... (a_m - c_m)) = 0``; expanding isolates
``tau(a_1 ... a_m)`` in terms of words with fewer runs.
"""
from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .entropy_functionals import chi_proj_pair
from .errors import ContractViolation
from .grassmann_sim import GibbsPairSpec, pair_from_eigenvalues, sample_gibbs_pair_batch, \
    sample_projection
from .linalg_core import as_generator, spawn
from .two_projection_model import FunctionOnUnitInterval, PairState, canonical_form, \
    cyclic_reduce, free_pair_state, pair_moment


@dataclass(frozen=True, eq=False)
class PairBlock:
    """Pair of projections with joint law ``state``.

    Attributes
    ----------
    state : PairState
        Law of the pair.
    sampler : {"haar", "gibbs", "fixed"} or None
        How matrix models of this block are produced in
        :func:`asymptotic_freeness_report`: independent Haar projections,
        the weighted ensemble with field ``psi``, or the fixed ``matrices``.
        ``None`` means no matrix model is available.
    psi : FunctionOnUnitInterval, optional
        Field of the weighted ensemble.
    matrices : tuple of ndarray, optional
        Fixed ``(P, Q)``.
    """

    state: PairState
    sampler: str | None = None
    psi: FunctionOnUnitInterval | None = None
    matrices: tuple | None = None

    @classmethod
    def haar(cls, alpha: float, beta: float, n_nodes: int = 2000) -> "PairBlock":
        return cls(free_pair_state(alpha, beta, n_nodes), "haar")

    @classmethod
    def fixed(cls, P, Q) -> "PairBlock":
        return cls(canonical_form(P, Q), "fixed", matrices=(np.asarray(P), np.asarray(Q)))

    @classmethod
    def gibbs(cls, state: PairState, psi: FunctionOnUnitInterval) -> "PairBlock":
        return cls(state, "gibbs", psi=psi)


@dataclass(frozen=True)
class SingleBlock:
    """Single projection of trace ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ContractViolation("alpha must lie in [0, 1]")


_NAME_RE = re.compile(r"([pqr])(\d+)")


class BlockFamily:
    """Ordered free product of pair and single blocks.

    Generators are numbered from 0 in block order. They are named ``p1, q1,
    p2, q2, ...`` for pair blocks and ``r1, r2, ...`` for single blocks.
    """

    def __init__(self, blocks: Sequence):
        self.blocks = tuple(blocks)
        if not self.blocks:
            raise ContractViolation("a family needs at least one block")
        gen_block, gen_letter, names = [], [], []
        n_pair = n_single = 0
        for b, blk in enumerate(self.blocks):
            if isinstance(blk, PairBlock):
                n_pair += 1
                gen_block += [b, b]
                gen_letter += ["e", "f"]
                names += [f"p{n_pair}", f"q{n_pair}"]
            elif isinstance(blk, SingleBlock):
                n_single += 1
                gen_block.append(b)
                gen_letter.append("r")
                names.append(f"r{n_single}")
            else:
                raise ContractViolation(f"unknown block type {type(blk).__name__}")
        self.gen_block = tuple(gen_block)
        self.gen_letter = tuple(gen_letter)
        self.names = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}
        self._cache: dict = {}

    @property
    def n_generators(self) -> int:
        return len(self.names)

    def parse_word(self, w) -> tuple[int, ...]:
        """Word from a string of generator names (``"p1 q2 r1"``) or a sequence of indices."""
        if isinstance(w, str):
            tokens = _NAME_RE.findall(w.replace(" ", ""))
            if "".join(a + b for a, b in tokens) != w.replace(" ", ""):
                raise ContractViolation(f"cannot parse word {w!r}")
            try:
                out = tuple(self._index[a + b] for a, b in tokens)
            except KeyError as exc:
                raise ContractViolation(f"unknown generator {exc.args[0]}") from exc
        else:
            out = tuple(int(c) for c in w)
            if any(not 0 <= c < self.n_generators for c in out):
                raise ContractViolation(f"word {out} references an unknown generator")
        if not out:
            raise ContractViolation("words must be nonempty")
        return out

    def format_word(self, w: Sequence[int]) -> str:
        return "".join(self.names[c] for c in w)

    def block_moment(self, w: Sequence[int]) -> float:
        """Trace of a word whose letters all lie in one block."""
        blk = self.blocks[self.gen_block[w[0]]]
        if isinstance(blk, SingleBlock):
            return blk.alpha
        return pair_moment(blk.state, [self.gen_letter[c] for c in w])

    def moment(self, w) -> float:
        return self._moment(self.parse_word(w))

    def _moment(self, w: tuple) -> float:
        if not w:
            return 1.0
        w = cyclic_reduce(w)
        gb = self.gen_block
        L = len(w)
        starts = [i for i in range(L) if gb[w[i]] != gb[w[i - 1]]]
        if not starts:
            return self.block_moment(w)
        key = min(w[i:] + w[:i] for i in starts)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        runs: list[tuple] = []
        for c in key:
            if runs and gb[runs[-1][-1]] == gb[c]:
                runs[-1] = runs[-1] + (c,)
            else:
                runs.append((c,))
        m = len(runs)
        cs = [self.block_moment(r) for r in runs]
        total = 0.0
        for mask in range((1 << m) - 1):
            prod = 1.0
            sub: tuple = ()
            size = 0
            for i in range(m):
                if mask >> i & 1:
                    sub += runs[i]
                    size += 1
                else:
                    prod *= cs[i]
            if prod == 0.0:
                continue
            sign = -1.0 if (m - size) % 2 else 1.0
            total += sign * prod * self._moment(sub)
        val = -total
        self._cache[key] = val
        return val

    def alternating_words(self, max_len: int) -> list[tuple]:
        """Words up to ``max_len`` whose neighbouring letters lie in different blocks."""
        gb = self.gen_block
        out: list[tuple] = []
        layer: list[tuple] = [(g,) for g in range(self.n_generators)]
        out += layer
        for _ in range(max_len - 1):
            layer = [w + (g,) for w in layer for g in range(self.n_generators) if gb[g] != gb[w[-1]]]
            out += layer
        return out


def free_mixed_moment(family: BlockFamily, w) -> float:
    """Trace of a word in the free product of the family's blocks.

    Parameters
    ----------
    family : BlockFamily
    w : str or sequence of int
        Generator names such as ``"p1q2p1"`` or 0-based generator indices.

    Raises
    ------
    ContractViolation
        If the word references an unknown generator.
    """
    return family.moment(w)


# ---------------------------------------------------------------------------
# asymptotic freeness


def _round_rank(alpha: float, N: int) -> int:
    return int(math.floor(alpha * N + 0.5))


def _block_sampler(blk, N: int):
    """Return a callable ``rng -> list of matrices`` or an explanation string."""
    if isinstance(blk, SingleBlock):
        k = _round_rank(blk.alpha, N)
        return lambda rng: [sample_projection(N, k, rng)]
    if blk.sampler == "fixed":
        P, Q = blk.matrices
        if P.shape[0] != N:
            return f"fixed block has dimension {P.shape[0]}"
        return lambda rng: [P, Q]
    if blk.sampler in ("haar", "gibbs"):
        st = blk.state
        k, l = _round_rank(st.alpha, N), _round_rank(st.beta, N)
        if blk.sampler == "haar":
            if not (0 <= k <= N and 0 <= l <= N):
                return "ranks out of range"
            return lambda rng: [sample_projection(N, k, rng), sample_projection(N, l, rng)]
        swap = k > l
        kk, ll = (l, k) if swap else (k, l)
        if not (0 < kk <= ll and kk + ll <= N):
            return f"infeasible ranks k={k}, l={l} for N={N}"
        spec = GibbsPairSpec(N, kk, ll, blk.psi)

        def draw(rng):
            x = sample_gibbs_pair_batch(spec, rng, 1, burn_in=200, thin=1)[0]
            P, Q = pair_from_eigenvalues(N, kk, ll, x, rng)
            return [Q, P] if swap else [P, Q]

        return draw
    return "no matrix model for this block"


def _run_cell(family: BlockFamily, words, N: int, samples: int, rng) -> list[dict]:
    samplers = [_block_sampler(b, N) for b in family.blocks]
    bad = [s for s in samplers if isinstance(s, str)]
    targets = [family._moment(w) for w in words]
    if bad:
        return [{"word": family.format_word(w), "N": N, "samples": 0, "mean_abs_error": None,
                 "std_error": None, "available": False, "note": bad[0]} for w in words]
    errs = np.zeros((samples, len(words)))
    for s in range(samples):
        mats = []
        for smp in samplers:
            mats += smp(rng)
        for j, w in enumerate(words):
            M = mats[w[0]]
            for c in w[1:]:
                M = M @ mats[c]
            errs[s, j] = abs(float(np.real(np.trace(M))) / N - targets[j])
    mean = errs.mean(axis=0)
    se = errs.std(axis=0, ddof=1) / math.sqrt(samples) if samples > 1 else np.zeros(len(words))
    return [{"word": family.format_word(w), "N": N, "samples": samples,
             "mean_abs_error": float(mean[j]), "std_error": float(se[j]), "available": True,
             "note": ""} for j, w in enumerate(words)]


def asymptotic_freeness_report(family: BlockFamily, words, N_list: Sequence[int], samples: int,
                               rng, threads: int = 1) -> list[dict]:
    """Mean absolute deviation of matrix moments from free moments.

    Every block is modelled by independent random matrices of size ``N``
    (ranks rounded to nearest), the empirical ``(1/N) Tr`` of each word is
    compared with :func:`free_mixed_moment`. Each ``N`` gets its own child
    seed, so results do not depend on ``threads``.

    Returns
    -------
    list of dict
        One row per (word, N) with keys ``word, N, samples, mean_abs_error,
        std_error, decreasing, available, note``. ``decreasing`` compares
        with the previous ``N`` for the same word.
    """
    rng = as_generator(rng)
    words = [family.parse_word(w) for w in words]
    N_list = [int(n) for n in N_list]
    seeds = spawn(rng, len(N_list))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cells = list(ex.map(lambda a: _run_cell(family, words, a[0], samples, a[1]),
                                zip(N_list, seeds)))
    else:
        cells = [_run_cell(family, words, n, samples, r) for n, r in zip(N_list, seeds)]
    rows = []
    for j in range(len(words)):
        prev = None
        for cell in cells:
            row = dict(cell[j])
            cur = row["mean_abs_error"]
            row["decreasing"] = None if prev is None or cur is None else bool(cur < prev)
            prev = cur
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# additivity


@dataclass(frozen=True)
class AdditivityReport:
    """Additive entropy bound and freeness deviation of a joint law.

    ``bound`` is the sum of block entropies. ``score`` sums
    ``|joint(w) - free(w)|`` over the supplied alternating words of length
    at most 4; ``n_words`` counts them.
    """

    bound: float
    score: float
    n_words: int


def additivity_gap(family: BlockFamily, joint_moments: Mapping) -> AdditivityReport:
    """Sum of block entropies and the deviation of ``joint_moments`` from freeness."""
    bound = 0.0
    for blk in family.blocks:
        if isinstance(blk, PairBlock):
            bound += chi_proj_pair(blk.state).chi
    gb = family.gen_block
    score, n = 0.0, 0
    for w, v in joint_moments.items():
        word = family.parse_word(w)
        if len(word) > 4 or any(gb[a] == gb[b] for a, b in zip(word, word[1:])):
            continue
        score += abs(float(v) - family._moment(word))
        n += 1
    return AdditivityReport(float(bound), float(score), n)


def empirical_moments(mats: Sequence[np.ndarray], words: Sequence[Sequence[int]]) -> dict:
    """``(1/N) Tr`` of each word in the given matrices."""
    out = {}
    for w in words:
        M = mats[w[0]]
        for c in w[1:]:
            M = M @ mats[c]
        out[tuple(w)] = float(np.real(np.trace(M))) / M.shape[0]
    return out
