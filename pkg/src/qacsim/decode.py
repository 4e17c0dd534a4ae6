"""Majority-vote decoding, ground matching, and error-distribution analyses.

Penalty qubits never vote: each block's logical value is the sign of the sum
over its problem qubits (the code length n is odd, so there are no ties).
Because chain problems have two degenerate logical ground states, a decoded
configuration is matched to the ground with which the majority of its
logical qubits agree; ties break toward the smaller Hamming distance and
then lexicographically (with -1 ordered before +1).  A sample is decodable
when its decoded logical configuration matches the aligned ground exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ResourceLimitError, ValidationError
from .problem import (
    EncodedProblem,
    IsingProblem,
    all_config_energies,
    config_from_index,
    ising_energy,
)
from .topology import LogicalEncoding

__all__ = [
    "SampleRecord",
    "SampleSet",
    "DecodedRecord",
    "HistogramSuite",
    "majority_decode",
    "ground_reference",
    "align_and_distance",
    "physical_hamming",
    "domain_wall_profile",
    "decode_record",
    "decodable_mask",
    "ground_indices",
    "empirical_success",
    "histogram_suite",
    "read_samples_csv",
    "write_samples_csv",
    "export_histograms",
]


# ---------------------------------------------------------------------------
# sample containers


@dataclass(frozen=True)
class SampleRecord:
    bits: tuple[int, ...]
    count: int
    embedding_id: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValidationError("sample count must be >= 1")
        if any(b not in (-1, 1) for b in self.bits):
            raise ValidationError("sample bits must be +-1")


@dataclass(frozen=True)
class SampleSet:
    records: tuple[SampleRecord, ...]
    problem: EncodedProblem | None = None

    def __post_init__(self) -> None:
        if not self.records:
            raise ValidationError("sample set is empty")
        width = len(self.records[0].bits)
        if any(len(r.bits) != width for r in self.records):
            raise ValidationError("inconsistent bitstring lengths")
        if self.problem is not None and width != self.problem.num_physical:
            raise ValidationError("bitstring length does not match the problem")

    @property
    def num_qubits(self) -> int:
        return len(self.records[0].bits)

    @property
    def total_count(self) -> int:
        return sum(r.count for r in self.records)


# ---------------------------------------------------------------------------
# decoding primitives


def _blocks_or_trivial(encoding: LogicalEncoding | None, width: int):
    if encoding is not None:
        return encoding.blocks
    from .topology import LogicalBlock

    return tuple(LogicalBlock(i, (i,), None) for i in range(width))


def majority_decode(sample, encoding: LogicalEncoding | None):
    """Vote each block's problem qubits; penalty qubits are excluded.

    Returns (logical config, per-block disagreement weight with the majority,
    per-block flag for a penalty qubit disagreeing with the majority).  With
    no encoding every qubit is its own length-1 block.
    """
    sample = np.asarray(sample)
    blocks = _blocks_or_trivial(encoding, len(sample))
    if encoding is not None and encoding.n % 2 == 0:
        raise ValidationError("majority vote requires odd code length")
    logical = np.empty(len(blocks), dtype=int)
    weights = np.zeros(len(blocks), dtype=int)
    penalty_flags = np.zeros(len(blocks), dtype=bool)
    for k, blk in enumerate(blocks):
        votes = sample[list(blk.problem_ids)]
        value = 1 if votes.sum() > 0 else -1
        logical[k] = value
        weights[k] = int((votes != value).sum())
        if blk.penalty_id is not None:
            penalty_flags[k] = sample[blk.penalty_id] != value
    return logical, weights, penalty_flags


def ground_reference(problem: IsingProblem, spin_cap: int = 24) -> tuple[tuple[int, ...], ...]:
    """Complete set of logical ground configurations.

    Chains are solved analytically (propagate the bond signs from each end
    spin value); anything else is enumerated up to ``spin_cap`` spins.
    """
    if problem.is_chain() and all(v != 0 for v in problem.couplings.values()):
        grounds = []
        for first in (1, -1):
            cfg = [first]
            for i in range(problem.num_spins - 1):
                sign = 1 if problem.couplings[(i, i + 1)] > 0 else -1
                cfg.append(-sign * cfg[-1])
            grounds.append(tuple(cfg))
        return tuple(sorted(grounds))
    if problem.num_spins > spin_cap:
        raise ResourceLimitError(f"{problem.num_spins} spins exceeds the ground-search cap of {spin_cap}")
    energies = all_config_energies(problem)
    tol = 1e-12 * max(1.0, float(np.abs(energies).max()))
    idx = np.flatnonzero(energies <= energies.min() + tol)
    return tuple(sorted(tuple(config_from_index(int(x), problem.num_spins)) for x in idx))


def align_and_distance(decoded, ground_set) -> tuple[tuple[int, ...], int]:
    """Ground the majority of decoded qubits agree with, plus the Hamming
    distance to it; ties break to the smaller distance then lexicographic."""
    if not ground_set:
        raise ValidationError("empty ground set")
    decoded = tuple(int(v) for v in np.asarray(decoded))
    best = min(
        ((sum(a != b for a, b in zip(decoded, g)), g) for g in ground_set),
        key=lambda pair: (pair[0], pair[1]),
    )
    return best[1], best[0]


def physical_hamming(sample, encoding: LogicalEncoding | None, matched_ground) -> int:
    """Physical disagreements with the code state embedding the matched
    ground; penalty qubits count, with target value equal to the block's
    logical ground value."""
    sample = np.asarray(sample)
    blocks = _blocks_or_trivial(encoding, len(sample))
    d = 0
    for blk, target in zip(blocks, matched_ground):
        for q in blk.problem_ids:
            d += sample[q] != target
        if blk.penalty_id is not None:
            d += sample[blk.penalty_id] != target
    return int(d)


def domain_wall_profile(decoded, matched_ground) -> list[int]:
    """Positions where the per-qubit correctness flag changes along a chain.

    A flipped suffix starting at position k yields the single kink [k]; an
    interior flipped qubit yields two kinks."""
    decoded = np.asarray(decoded)
    ground = np.asarray(matched_ground)
    correct = decoded == ground
    return [i + 1 for i in range(len(correct) - 1) if correct[i] != correct[i + 1]]


@dataclass(frozen=True)
class DecodedRecord:
    """Fully decoded readout: logical values, ground-relative error weights,
    penalty flips, Hamming distances, decodability and physical energy."""

    logical_config: tuple[int, ...]
    per_block_error_weight: tuple[int, ...]
    penalty_flipped: tuple[bool, ...]
    d_physical: int
    d_logical: int
    decodable: bool
    energy: float
    matched_ground: tuple[int, ...]
    count: int = 1
    embedding_id: int = 0


def decode_record(
    sample,
    problem: EncodedProblem,
    ground_set=None,
    count: int = 1,
    embedding_id: int = 0,
) -> DecodedRecord:
    """Run the full decoding pipeline on one physical readout."""
    sample = np.asarray(sample)
    encoding = problem.encoding
    if len(sample) != problem.num_physical:
        raise ValidationError("sample length does not match the problem")
    if ground_set is None:
        ground_set = ground_reference(problem.logical)
    logical, _, _ = majority_decode(sample, encoding)
    matched, d_logical = align_and_distance(logical, ground_set)
    blocks = _blocks_or_trivial(encoding, len(sample))
    weights = tuple(
        int(sum(sample[q] != g for q in blk.problem_ids)) for blk, g in zip(blocks, matched)
    )
    pen = tuple(
        bool(blk.penalty_id is not None and sample[blk.penalty_id] != g)
        for blk, g in zip(blocks, matched)
    )
    return DecodedRecord(
        logical_config=tuple(int(v) for v in logical),
        per_block_error_weight=weights,
        penalty_flipped=pen,
        d_physical=physical_hamming(sample, encoding, matched),
        d_logical=d_logical,
        decodable=d_logical == 0,
        energy=ising_energy(sample, problem.physical),
        matched_ground=matched,
        count=count,
        embedding_id=embedding_id,
    )


# ---------------------------------------------------------------------------
# state-level classifiers


def ground_indices(problem: EncodedProblem) -> np.ndarray:
    """Basis indices of the exact physical ground configurations."""
    energies = all_config_energies(problem.physical)
    tol = 1e-12 * max(1.0, float(np.abs(energies).max()))
    return np.flatnonzero(energies <= energies.min() + tol)


def decodable_mask(problem: EncodedProblem, encoding: LogicalEncoding | None = None) -> np.ndarray:
    """Boolean mask over all basis states: True where the configuration
    majority-decodes to a logical ground configuration."""
    encoding = encoding if encoding is not None else problem.encoding
    n = problem.num_physical
    ground_set = set(ground_reference(problem.logical))
    mask = np.zeros(1 << n, dtype=bool)
    for x in range(1 << n):
        logical, _, _ = majority_decode(config_from_index(x, n), encoding)
        mask[x] = tuple(int(v) for v in logical) in ground_set
    return mask


def empirical_success(samples: SampleSet, problem: EncodedProblem) -> tuple[float, float]:
    """(P_GS, P_S) estimated by counting over a sample set."""
    ground_set = ground_reference(problem.logical)
    code_grounds = {tuple(problem.code_config(g)) for g in ground_set}
    n_gs = n_s = 0
    for rec in samples.records:
        if rec.bits in code_grounds:
            n_gs += rec.count
        logical, _, _ = majority_decode(rec.bits, problem.encoding)
        if tuple(int(v) for v in logical) in ground_set:
            n_s += rec.count
    total = samples.total_count
    return n_gs / total, n_s / total


# ---------------------------------------------------------------------------
# histogram suite


@dataclass(frozen=True)
class HistogramSuite:
    """Frequencies for the Hamming, per-position and decodability analyses.

    Energies are measured from the code ground state in units of the logical
    coupling (the physical energy difference divided by alpha).
    """

    hamming_physical: dict[int, float]
    hamming_logical: dict[int, float]
    position_weights: np.ndarray  # (num_logical, 3): weight-1/2/3 frequencies
    penalty_flips: np.ndarray  # (num_logical,)
    decodability: dict[tuple[int, float], tuple[int, int]]  # (d_phys, energy) -> (total, decodable)
    total_count: int = 0


def histogram_suite(
    samples: SampleSet,
    problem: EncodedProblem,
    ground_set=None,
    symmetrize: bool = False,
) -> HistogramSuite:
    """Aggregate decoded statistics over a sample set.

    ``symmetrize`` averages the per-position histograms over the two chain
    directions (chain problems only).
    """
    if ground_set is None:
        ground_set = ground_reference(problem.logical)
    if symmetrize and not problem.logical.is_chain():
        raise ValidationError("direction symmetrization requires a chain problem")
    num_logical = problem.logical.num_spins
    n = problem.num_physical
    total = samples.total_count
    e_ground = ising_energy(problem.code_config(ground_set[0]), problem.physical)

    ham_phys: dict[int, int] = {}
    ham_log: dict[int, int] = {}
    pos = np.zeros((num_logical, 3))
    pen = np.zeros(num_logical)
    dec_map: dict[tuple[int, float], list[int]] = {}

    for rec in samples.records:
        record = decode_record(rec.bits, problem, ground_set, rec.count, rec.embedding_id)
        ham_phys[record.d_physical] = ham_phys.get(record.d_physical, 0) + rec.count
        ham_log[record.d_logical] = ham_log.get(record.d_logical, 0) + rec.count
        for k, w in enumerate(record.per_block_error_weight):
            if 1 <= w <= 3:
                pos[k, w - 1] += rec.count
        for k, flag in enumerate(record.penalty_flipped):
            if flag:
                pen[k] += rec.count
        energy_rel = round((record.energy - e_ground) / problem.alpha, 9)
        key = (record.d_physical, energy_rel)
        bucket = dec_map.setdefault(key, [0, 0])
        bucket[0] += rec.count
        if record.decodable:
            bucket[1] += rec.count

    if symmetrize:
        pos = 0.5 * (pos + pos[::-1])
        pen = 0.5 * (pen + pen[::-1])

    return HistogramSuite(
        hamming_physical={d: c / total for d, c in sorted(ham_phys.items())},
        hamming_logical={d: c / total for d, c in sorted(ham_log.items())},
        position_weights=pos / total,
        penalty_flips=pen / total,
        decodability={k: (v[0], v[1]) for k, v in sorted(dec_map.items())},
        total_count=total,
    )


# ---------------------------------------------------------------------------
# files


def write_samples_csv(path, samples: SampleSet) -> None:
    with open(path, "w") as fh:
        fh.write("embedding_id,count,bits\n")
        for rec in samples.records:
            bits = "".join("0" if b == 1 else "1" for b in rec.bits)
            fh.write(f"{rec.embedding_id},{rec.count},{bits}\n")


def read_samples_csv(path, problem: EncodedProblem | None = None) -> SampleSet:
    records = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#") or ln.startswith("embedding_id"):
                continue
            try:
                emb, count, bits = ln.split(",")
                values = tuple(1 if ch == "0" else -1 for ch in bits.strip())
                if not all(ch in "01" for ch in bits.strip()):
                    raise ValueError(bits)
                records.append(SampleRecord(values, int(count), int(emb)))
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{path}: bad sample row {ln!r}") from exc
    if not records:
        raise FormatError(f"{path}: empty sample file")
    return SampleSet(tuple(records), problem)


def export_histograms(outdir, suite: HistogramSuite) -> list[str]:
    """Write the four histogram CSV files; returns the paths written."""
    import os

    paths = []

    def write(name, header, rows):
        path = os.path.join(outdir, name)
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(str(x) for x in row) + "\n")
        paths.append(path)

    write("hamming_physical.csv", "d_physical,frequency", [(d, repr(f)) for d, f in suite.hamming_physical.items()])
    write("hamming_logical.csv", "d_logical,frequency", [(d, repr(f)) for d, f in suite.hamming_logical.items()])
    write(
        "position_error_classes.csv",
        "position,weight1,weight2,weight3,penalty_flip",
        [
            (k, repr(float(suite.position_weights[k, 0])), repr(float(suite.position_weights[k, 1])),
             repr(float(suite.position_weights[k, 2])), repr(float(suite.penalty_flips[k])))
            for k in range(suite.position_weights.shape[0])
        ],
    )
    write(
        "decodability_map.csv",
        "d_physical,energy,total,decodable,fraction",
        [
            (d, repr(e), tot, dec, repr(dec / tot))
            for (d, e), (tot, dec) in suite.decodability.items()
        ],
    )
    return paths
