"""
Reverse construction of Markush supervision data.

Substituents are drawn from a weighted fragment database and attached onto
skeletons; each record keeps the assignment that produced its molecule.
Every record has its own RNG seed, derived from ``(master_seed, index,
attempt)``, so any record can be regenerated alone and parallel runs
produce the same output as serial ones.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import GenerationExhaustedError, MarkushKitError
from .markush import (
    HYDROGEN,
    MarkushStructure,
    Substituent,
    SubstituentAssignment,
    attach,
    substituent_from_text,
)
from .molgraph import MolGraph
from .smiles import parse, write_canonical

__all__ = [
    "FragmentDatabase",
    "GenRecord",
    "filter_skeletons",
    "sample_assignment",
    "generate",
    "derive_seed",
    "load_skeletons",
    "write_jsonl",
    "read_jsonl",
    "split_holdout",
]

DEFAULT_RETRIES = 20
ATTEMPT_FACTOR = 10


@dataclass(frozen=True)
class FragmentDatabase:
    """Weighted substituent fragments; ``[H]`` stands for a bare hydrogen."""

    entries: tuple[tuple[str, float], ...]
    fragments: tuple[Substituent, ...] = field(init=False, repr=False, compare=False)
    by_heavy: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = tuple((str(s), float(w)) for s, w in self.entries)
        if not entries:
            raise ValueError("fragment database is empty")
        graphs = []
        index: dict[int, list[int]] = {}
        for k, (text, weight) in enumerate(entries):
            if not math.isfinite(weight) or weight <= 0:
                raise ValueError(f"fragment {text!r} has non-positive or non-finite weight {weight}")
            value = substituent_from_text(text)
            graphs.append(value)
            heavy = 0 if value is HYDROGEN else value.heavy_atom_count
            index.setdefault(heavy, []).append(k)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "fragments", tuple(graphs))
        object.__setattr__(self, "by_heavy", {n: tuple(v) for n, v in sorted(index.items())})

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    @classmethod
    def from_jsonl(cls, path: str | Path) -> FragmentDatabase:
        entries = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    entries.append((obj["fragment"], obj.get("weight", 1.0)))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad fragment record: {exc}") from exc
        return cls(tuple(entries))

    @classmethod
    def default(cls) -> FragmentDatabase:
        """The bundled starter database (about 220 fragments, 1-12 heavy atoms)."""
        with resources.as_file(resources.files(__package__) / "data" / "fragments.jsonl") as p:
            return cls.from_jsonl(p)


def load_skeletons(path: str | Path | None = None) -> list[str]:
    """One extended SMILES per line; blank lines and ``#`` comments are skipped.

    With no path the bundled starter skeletons are returned.
    """
    if path is None:
        text = (resources.files(__package__) / "data" / "skeletons.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


@dataclass(frozen=True)
class GenRecord:
    markush: str
    molecule: str
    assignment: dict[str, str]
    seed_path: str

    def to_json(self) -> dict:
        return {
            "markush": self.markush,
            "molecule": self.molecule,
            "assignment": dict(self.assignment),
            "seed_path": self.seed_path,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def from_json(cls, obj: dict) -> GenRecord:
        return cls(obj["markush"], obj["molecule"], dict(obj["assignment"]), obj["seed_path"])


def filter_skeletons(
    candidates: Iterable[MarkushStructure | MolGraph | str],
    min_heavy: int = 5,
) -> list[MarkushStructure]:
    """Keep single-component skeletons with a placeholder and enough heavy atoms.

    Unparseable candidates are dropped as well. Input order is preserved.
    """
    kept = []
    for cand in candidates:
        if isinstance(cand, MarkushStructure):
            markush = cand
        else:
            try:
                g = parse(cand) if isinstance(cand, str) else cand
                if not g.is_connected or not g.placeholder_indices():
                    continue
                markush = MarkushStructure(g)
            except MarkushKitError:
                continue
        if markush.skeleton.heavy_atom_count >= min_heavy:
            kept.append(markush)
    return kept


def derive_seed(master_seed: int, index: int, attempt: int = 0) -> int:
    """Counter-based 64-bit seed, independent for each (index, attempt)."""
    digest = hashlib.blake2b(f"{master_seed}:{index}:{attempt}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def sample_assignment(
    skeleton: MarkushStructure | str,
    db: FragmentDatabase,
    rng_seed: int,
    max_retries: int = DEFAULT_RETRIES,
) -> SubstituentAssignment:
    """One weighted draw per distinct label, redrawn while attachment fails.

    Raises:
        GenerationExhaustedError: no valid draw within ``max_retries`` tries.
    """
    markush = MarkushStructure.from_smiles(skeleton) if isinstance(skeleton, str) else skeleton
    if len(db) == 0:
        raise ValueError("fragment database is empty")
    rng = random.Random(rng_seed)
    population = range(len(db))
    weights = db.weights
    last_error: Exception | None = None
    for _ in range(max(1, max_retries)):
        picks = rng.choices(population, weights=weights, k=len(markush.labels))
        assignment = SubstituentAssignment(
            {label: db.fragments[k] for label, k in zip(markush.labels, picks)}
        )
        try:
            attach(markush, assignment)
        except MarkushKitError as exc:
            last_error = exc
            continue
        return assignment
    try:
        name = markush.smiles
    except MarkushKitError:
        name = "skeleton " + ",".join(markush.labels)
    raise GenerationExhaustedError(f"no valid assignment for {name} after {max_retries} draws: {last_error}")


def _make_record(
    skeletons: Sequence[MarkushStructure],
    db: FragmentDatabase,
    master_seed: int,
    index: int,
    max_retries: int,
) -> GenRecord:
    last: GenerationExhaustedError | None = None
    for attempt in range(ATTEMPT_FACTOR):
        seed = derive_seed(master_seed, index, attempt)
        skeleton = skeletons[seed % len(skeletons)]
        try:
            assignment = sample_assignment(skeleton, db, seed, max_retries)
        except GenerationExhaustedError as exc:
            last = exc
            continue
        mol = attach(skeleton, assignment)
        return GenRecord(
            markush=skeleton.smiles,
            molecule=write_canonical(mol),
            assignment=assignment.to_json(),
            seed_path=f"{master_seed}/{index}/{attempt}",
        )
    raise GenerationExhaustedError(f"record {index}: every attempt exhausted its retries ({last})")


def _worker(args: tuple) -> GenRecord:
    skeleton_texts, entries, master_seed, index, max_retries = args
    return _make_record(
        [MarkushStructure.from_smiles(s) for s in skeleton_texts],
        FragmentDatabase(entries),
        master_seed,
        index,
        max_retries,
    )


def generate(
    skeletons: Sequence[MarkushStructure | str],
    db: FragmentDatabase,
    count: int,
    master_seed: int,
    max_retries: int = DEFAULT_RETRIES,
    workers: int = 1,
) -> Iterator[GenRecord]:
    """Yield exactly ``count`` records in index order.

    Record ``i`` depends only on ``(skeletons, db, master_seed, i)``. With
    ``workers > 1`` records are built in a process pool; output order and
    content are unchanged.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return
    markushes = [s if isinstance(s, MarkushStructure) else MarkushStructure.from_smiles(s) for s in skeletons]
    if not markushes:
        raise ValueError("no skeletons to generate from")
    if workers <= 1:
        for i in range(count):
            yield _make_record(markushes, db, master_seed, i, max_retries)
        return
    texts = tuple(m.smiles for m in markushes)
    jobs = ((texts, db.entries, master_seed, i, max_retries) for i in range(count))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # Executor.map yields results in submission order
        yield from pool.map(_worker, jobs, chunksize=max(1, min(256, count // (4 * workers))))


def write_jsonl(records: Iterable[GenRecord], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.dumps() + "\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> list[GenRecord]:
    with open(path, encoding="utf-8") as fh:
        return [GenRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def split_holdout(records: Sequence[GenRecord], k: int, seed: int) -> tuple[list[GenRecord], list[GenRecord]]:
    """Seeded shuffle picks ``k`` held-out records; both parts keep input order."""
    if not 0 <= k <= len(records):
        raise ValueError(f"holdout size {k} outside 0..{len(records)}")
    chosen = set(random.Random(derive_seed(seed, -1)).sample(range(len(records)), k))
    train = [r for i, r in enumerate(records) if i not in chosen]
    held = [r for i, r in enumerate(records) if i in chosen]
    return train, held
