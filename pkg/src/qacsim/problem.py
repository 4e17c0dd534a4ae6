"""Ising problems, repetition-code encodings (U/C/EP/QAC) and anneal schedules.

Spin and basis-index conventions used throughout the package:

* a configuration is a length-``num_spins`` array of +-1 values;
* computational-basis index ``x`` maps to a configuration by reading bits
  most-significant-first, spin ``q`` being +1 when bit ``num_spins-1-q`` of
  ``x`` is 0 (this matches Kronecker-product operator ordering with qubit 0
  as the leftmost factor);
* all energies are dimensionless until multiplied by a schedule value; the
  schedule curves A(s), B(s) are angular frequencies in rad/ns (the "GHz"
  of hardware specifications), so with hbar = 1 times are in ns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ResourceLimitError, ValidationError
from .topology import LogicalBlock, LogicalEncoding

__all__ = [
    "IsingProblem",
    "EncodedProblem",
    "AnnealSchedule",
    "GapLevel",
    "STRATEGIES",
    "make_af_chain",
    "dense_encoding",
    "encode_problem",
    "ising_energy",
    "all_config_energies",
    "classical_excitation_gaps",
    "schedule_linear",
    "schedule_from_table",
    "write_schedule_csv",
    "read_problem_csv",
    "write_problem_csv",
    "config_from_index",
    "index_from_config",
]

STRATEGIES = ("U", "C", "EP", "QAC")

BRUTE_FORCE_SPIN_CAP = 24
_CHUNK = 1 << 20


# ---------------------------------------------------------------------------
# Ising problems


@dataclass(frozen=True)
class IsingProblem:
    """Dimensionless Ising problem: fields h_i and pair couplings J_ij.

    Treated as immutable after construction; the dicts must not be mutated.
    """

    num_spins: int
    local_fields: dict[int, float] = field(default_factory=dict)
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.num_spins < 1:
            raise ValidationError("num_spins must be >= 1")
        for i, h in self.local_fields.items():
            if not 0 <= i < self.num_spins:
                raise ValidationError(f"field index {i} out of range")
            if abs(h) > 1 + 1e-12:
                raise ValidationError(f"|h_{i}| = {abs(h)} exceeds 1")
        for (i, j), val in self.couplings.items():
            if i == j or not (0 <= i < self.num_spins and 0 <= j < self.num_spins):
                raise ValidationError(f"bad coupling pair ({i},{j})")
            if i > j:
                raise ValidationError(f"coupling key ({i},{j}) must be ordered i < j")
            if abs(val) > 1 + 1e-12:
                raise ValidationError(f"|J_{i}{j}| = {abs(val)} exceeds 1")

    def energy(self, config) -> float:
        return ising_energy(config, self)

    def scaled(self, factor: float) -> "IsingProblem":
        return IsingProblem(
            self.num_spins,
            {i: factor * h for i, h in self.local_fields.items()},
            {k: factor * v for k, v in self.couplings.items()},
        )

    def is_chain(self) -> bool:
        """A field-free open chain with exactly the couplings (i, i+1)."""
        expected = {(i, i + 1) for i in range(self.num_spins - 1)}
        return not self.local_fields and set(self.couplings) == expected


def make_af_chain(length: int) -> IsingProblem:
    """Antiferromagnetic chain: J_{i,i+1} = +1, no local fields."""
    if length < 2:
        raise ValidationError("chain length must be >= 2")
    return IsingProblem(length, {}, {(i, i + 1): 1.0 for i in range(length - 1)})


def ising_energy(config, problem: IsingProblem) -> float:
    """Sum of h_i s_i plus J_ij s_i s_j for one +-1 configuration."""
    config = np.asarray(config)
    if config.shape != (problem.num_spins,):
        raise ValidationError(f"config length {config.shape} != num_spins {problem.num_spins}")
    if not np.all(np.abs(config) == 1):
        raise ValidationError("config entries must be +-1")
    e = sum(h * config[i] for i, h in problem.local_fields.items())
    e += sum(v * config[i] * config[j] for (i, j), v in problem.couplings.items())
    return float(e)


def config_from_index(x: int, num_spins: int) -> np.ndarray:
    bits = (x >> (num_spins - 1 - np.arange(num_spins))) & 1
    return 1 - 2 * bits


def index_from_config(config) -> int:
    config = np.asarray(config)
    n = len(config)
    bits = (1 - config) // 2
    return int(np.sum(bits << (n - 1 - np.arange(n))))


def all_config_energies(problem: IsingProblem) -> np.ndarray:
    """Energies of all 2^N configurations, indexed by basis index."""
    n = problem.num_spins
    if n > BRUTE_FORCE_SPIN_CAP:
        raise ResourceLimitError(f"{n} spins exceeds the brute-force cap of {BRUTE_FORCE_SPIN_CAP}")
    out = np.empty(1 << n)
    shifts = n - 1 - np.arange(n)
    for start in range(0, 1 << n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        spins = 1.0 - 2.0 * ((idx[:, None] >> shifts) & 1)
        e = np.zeros(len(idx))
        for i, h in problem.local_fields.items():
            e += h * spins[:, i]
        for (i, j), v in problem.couplings.items():
            e += v * spins[:, i] * spins[:, j]
        out[start : start + len(idx)] = e
    return out


# ---------------------------------------------------------------------------
# encodings


def dense_encoding(
    num_logical: int,
    n: int = 3,
    with_penalty: bool = True,
    incomplete: set[int] | frozenset[int] = frozenset(),
) -> LogicalEncoding:
    """Compactly indexed encoding: block i owns n problem qubits then its
    penalty qubit (omitted for blocks listed in ``incomplete``)."""
    blocks = []
    nxt = 0
    for i in range(num_logical):
        problem = tuple(range(nxt, nxt + n))
        nxt += n
        penalty = None
        if with_penalty and i not in incomplete:
            penalty = nxt
            nxt += 1
        blocks.append(LogicalBlock(i, problem, penalty))
    return LogicalEncoding(n, tuple(blocks))


def _compact(encoding: LogicalEncoding, drop_penalties: bool) -> tuple[LogicalEncoding, list[int]]:
    """Re-index onto compact physical ids 0..K-1 and positional logical ids,
    remembering the original physical ids."""
    blocks = []
    hardware_ids: list[int] = []
    nxt = 0
    for pos, blk in enumerate(encoding.blocks):
        problem = tuple(range(nxt, nxt + len(blk.problem_ids)))
        hardware_ids.extend(blk.problem_ids)
        nxt += len(blk.problem_ids)
        penalty = None
        if blk.penalty_id is not None and not drop_penalties:
            penalty = nxt
            hardware_ids.append(blk.penalty_id)
            nxt += 1
        blocks.append(LogicalBlock(pos, problem, penalty))
    return LogicalEncoding(encoding.n, tuple(blocks)), hardware_ids


@dataclass(frozen=True)
class EncodedProblem:
    """A logical problem mapped to physical qubits under one strategy.

    ``physical`` holds the scaled couplings alpha*J and -beta penalties over
    the compact index space; ``problem_part``/``penalty_part`` keep the
    unscaled structure so spectra can be resolved into exact multiples of
    alpha and beta.  ``hardware_ids[k]`` is the hardware qubit behind compact
    index k (identity for abstract encodings).
    """

    strategy: str
    logical: IsingProblem
    encoding: LogicalEncoding | None
    alpha: float
    beta: float
    physical: IsingProblem
    problem_part: IsingProblem
    penalty_part: IsingProblem
    hardware_ids: tuple[int, ...]

    @property
    def num_physical(self) -> int:
        return self.physical.num_spins

    def code_config(self, logical_config) -> np.ndarray:
        """Embed a logical +-1 configuration as the matching code state."""
        logical_config = np.asarray(logical_config)
        out = np.empty(self.num_physical, dtype=int)
        if self.encoding is None:
            out[:] = logical_config
            return out
        for blk in self.encoding.blocks:
            val = logical_config[blk.logical_id]
            for q in blk.problem_ids:
                out[q] = val
            if blk.penalty_id is not None:
                out[blk.penalty_id] = val
        return out


def encode_problem(
    logical: IsingProblem,
    strategy: str,
    alpha: float,
    beta: float = 0.0,
    encoding: LogicalEncoding | None = None,
) -> EncodedProblem:
    """Apply one of the U/C/EP/QAC strategies to a logical problem.

    U leaves the problem unencoded at scale alpha.  C replicates it over n
    unpenalized copies.  EP and QAC add the -beta penalty couplings between
    each complete block's problem qubits and its penalty qubit (they share
    the same physical Hamiltonian and differ only in decoding).  When no
    encoding is given a compact defect-free one is generated.
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not 0 < alpha <= 1:
        raise ValidationError("alpha must lie in (0, 1]")
    if not 0 <= beta <= 1:
        raise ValidationError("beta must lie in [0, 1]")
    if strategy in ("U", "C") and beta != 0.0:
        raise ValidationError(f"beta must be 0 under the {strategy} strategy")

    if strategy == "U":
        empty = IsingProblem(logical.num_spins)
        return EncodedProblem(
            strategy, logical, None, alpha, 0.0,
            logical.scaled(alpha), logical, empty,
            tuple(range(logical.num_spins)),
        )

    if encoding is None:
        encoding = dense_encoding(logical.num_spins, with_penalty=strategy != "C")
    if len(encoding.blocks) < logical.num_spins:
        raise ValidationError(f"encoding provides {len(encoding.blocks)} blocks for {logical.num_spins} logical spins")
    trimmed = LogicalEncoding(encoding.n, encoding.blocks[: logical.num_spins], encoding.host)
    compact, hw_ids = _compact(trimmed, drop_penalties=strategy == "C")
    blocks = compact.blocks

    prob_fields: dict[int, float] = {}
    prob_couplings: dict[tuple[int, int], float] = {}
    pen_couplings: dict[tuple[int, int], float] = {}
    for i, h in logical.local_fields.items():
        for q in blocks[i].problem_ids:
            prob_fields[q] = h
    for (i, j), v in logical.couplings.items():
        for qa, qb in zip(blocks[i].problem_ids, blocks[j].problem_ids):
            prob_couplings[(min(qa, qb), max(qa, qb))] = v
    if strategy in ("EP", "QAC"):
        for blk in blocks:
            if blk.penalty_id is not None:
                for q in blk.problem_ids:
                    pen_couplings[(min(q, blk.penalty_id), max(q, blk.penalty_id))] = -1.0

    num_phys = sum(len(b.problem_ids) + (b.penalty_id is not None) for b in blocks)
    problem_part = IsingProblem(num_phys, prob_fields, prob_couplings)
    penalty_part = IsingProblem(num_phys, {}, pen_couplings)
    physical = IsingProblem(
        num_phys,
        {i: alpha * h for i, h in prob_fields.items()},
        {**{k: alpha * v for k, v in prob_couplings.items()},
         **{k: -beta for k in pen_couplings}},
    )
    return EncodedProblem(strategy, logical, compact, alpha, beta, physical, problem_part, penalty_part, tuple(hw_ids))


# ---------------------------------------------------------------------------
# exact classical spectra


@dataclass(frozen=True)
class GapLevel:
    """One excitation level: gap = problem_weight*alpha + penalty_weight*beta."""

    gap: float
    degeneracy: int
    problem_weight: float
    penalty_weight: float


def classical_excitation_gaps(problem: EncodedProblem) -> list[GapLevel]:
    """Exact excitation gaps of the physical Ising spectrum.

    Enumerates all configurations and groups them by their exact
    (problem-part, penalty-part) energy coefficients, so for integer logical
    couplings each gap is reported as an exact multiple of alpha and beta.
    Levels whose coefficients differ appear separately even if the scaled
    energies coincide for the particular (alpha, beta).
    """
    u = all_config_energies(problem.problem_part)
    v = all_config_energies(problem.penalty_part)
    energies = problem.alpha * u + problem.beta * v
    ground = energies.min()
    order = np.lexsort((v, u, energies))
    levels: list[GapLevel] = []
    k = 0
    while k < len(order):
        idx = order[k]
        same = (u[order[k:]] == u[idx]) & (v[order[k:]] == v[idx]) & (energies[order[k:]] == energies[idx])
        run = int(np.argmin(same)) if not same.all() else len(same)
        if energies[idx] != ground or u[idx] != u[order[0]] or v[idx] != v[order[0]]:
            iground = order[0]
            du = float(u[idx] - u[iground])
            dv = float(v[idx] - v[iground])
            levels.append(GapLevel(du * problem.alpha + dv * problem.beta, run, du, dv))
        k += run
    levels.sort(key=lambda lv: (lv.gap, lv.problem_weight, lv.penalty_weight))
    return levels


# ---------------------------------------------------------------------------
# anneal schedules


@dataclass(frozen=True)
class AnnealSchedule:
    """Sampled A(s), B(s) curves in rad/ns with piecewise-linear interpolation."""

    t_f_us: float
    s: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        s, A, B = map(np.asarray, (self.s, self.A, self.B))
        if len(s) < 2 or not (len(s) == len(A) == len(B)):
            raise FormatError("schedule needs matching s, A, B samples with at least two rows")
        if not (np.all(np.diff(s) > 0) and s[0] == 0.0 and s[-1] == 1.0):
            raise FormatError("schedule s values must increase strictly from 0 to 1")
        tol_a = 1e-6 * max(A.max(), 1e-300)
        tol_b = 1e-6 * max(B.max(), 1e-300)
        if abs(A[-1]) > tol_a:
            raise FormatError(f"schedule must satisfy A(1) ~ 0, got {A[-1]}")
        if abs(B[0]) > tol_b:
            raise FormatError(f"schedule must satisfy B(0) ~ 0, got {B[0]}")
        if self.t_f_us <= 0:
            raise ValidationError("t_f must be positive")

    @property
    def t_f_ns(self) -> float:
        return 1e3 * self.t_f_us

    def A_of(self, s):
        return np.interp(s, self.s, self.A)

    def B_of(self, s):
        return np.interp(s, self.s, self.B)

    def derivatives_of(self, s):
        """Piecewise-constant dA/ds and dB/ds at s (right-sided at knots)."""
        k = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2)
        ds = self.s[k + 1] - self.s[k]
        return (self.A[k + 1] - self.A[k]) / ds, (self.B[k + 1] - self.B[k]) / ds


def schedule_linear(A0: float, t_f_us: float = 20.0) -> AnnealSchedule:
    """Linear interpolating schedule A(s) = 2 A0 (1-s), B(s) = 2 A0 s."""
    if A0 <= 0:
        raise ValidationError("A0 must be positive")
    return AnnealSchedule(
        t_f_us,
        np.array([0.0, 1.0]),
        np.array([2.0 * A0, 0.0]),
        np.array([0.0, 2.0 * A0]),
    )


def schedule_from_table(path, t_f_us: float = 20.0) -> AnnealSchedule:
    """Load a schedule from CSV rows ``s,A_GHz,B_GHz`` (header optional)."""
    rows = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = ln.split(",")
            if parts[0] in ("s", "S"):
                continue
            try:
                rows.append(tuple(float(x) for x in parts[:3]))
            except ValueError as exc:
                raise FormatError(f"{path}: bad schedule row {ln!r}") from exc
    if not rows:
        raise FormatError(f"{path}: empty schedule table")
    arr = np.array(rows)
    return AnnealSchedule(t_f_us, arr[:, 0], arr[:, 1], arr[:, 2])


def write_schedule_csv(path, schedule: AnnealSchedule) -> None:
    with open(path, "w") as fh:
        fh.write("s,A_GHz,B_GHz\n")
        for s, a, b in zip(schedule.s, schedule.A, schedule.B):
            fh.write(f"{float(s)!r},{float(a)!r},{float(b)!r}\n")


# ---------------------------------------------------------------------------
# problem files


def read_problem_csv(path) -> IsingProblem:
    """Read ``h,<i>,<value>`` and ``J,<i>,<j>,<value>`` rows."""
    fields: dict[int, float] = {}
    couplings: dict[tuple[int, int], float] = {}
    top = -1
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = ln.split(",")
            try:
                if parts[0] == "h":
                    i, val = int(parts[1]), float(parts[2])
                    fields[i] = val
                    top = max(top, i)
                elif parts[0] == "J":
                    i, j, val = int(parts[1]), int(parts[2]), float(parts[3])
                    couplings[(min(i, j), max(i, j))] = val
                    top = max(top, i, j)
                else:
                    raise ValueError(parts[0])
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{path}: bad problem row {ln!r}") from exc
    if top < 0:
        raise FormatError(f"{path}: empty problem file")
    return IsingProblem(top + 1, fields, couplings)


def write_problem_csv(path, problem: IsingProblem) -> None:
    with open(path, "w") as fh:
        for i in sorted(problem.local_fields):
            fh.write(f"h,{i},{problem.local_fields[i]!r}\n")
        for (i, j) in sorted(problem.couplings):
            fh.write(f"J,{i},{j},{problem.couplings[(i, j)]!r}\n")
