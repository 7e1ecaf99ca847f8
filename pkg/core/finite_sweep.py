"""
Verification sweep for the finite theorem suite.
Runs every check over all functional graphs on small discrete spaces, over seeded random
non-T1 spaces with continuous maps, and over the epsilon(X, P_n) equivariance suite.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from config import (
    EQUIVARIANCE_PERIODS,
    MONOTONE_MAP_ATTEMPTS,
    RANDOM_RELATION_DENSITY,
    RANDOM_SPACE_SIZES,
    SWEEP_CHUNK,
    SWEEP_WORKERS,
    VERIFY_MAX_SIZE,
    VERIFY_SEED,
    VERIFY_TRIALS,
)
from core.externology import neighborhood_externology
from core.finite_space import FiniteSemiFlow, FiniteTopology, continuity_violation, m_periodic
from core.theorem_suite import attraction_check, externology_checks, theorem_suite

logger = logging.getLogger(__name__)

EQUIVARIANCE_CHECKS = ("omega_equivariance", "cech_orbit_constancy", "basin_partition", "equalizer")


class SweepInstance(NamedTuple):
    family: str
    index: int
    map: Tuple[int, ...]
    min_open: Tuple[Tuple[int, ...], ...]
    target: Optional[Tuple[int, ...]] = None
    period: Optional[int] = None


def all_maps(n: int) -> Iterator[FiniteSemiFlow]:
    """Every functional graph on n points, in lexicographic order of the map."""
    for values in itertools.product(range(n), repeat=n):
        yield FiniteSemiFlow(n, values)


def random_preorder(n: int, rng: np.random.Generator, density: float = RANDOM_RELATION_DENSITY) -> FiniteTopology:
    """A random finite topology: random relation, then reflexive-transitive closure."""
    below = rng.random((n, n)) < density
    np.fill_diagonal(below, True)
    for k in range(n):
        below |= below[:, k:k + 1] & below[k:k + 1, :]
    return FiniteTopology.from_preorder(below)


def _consistent(topo: FiniteTopology, assigned: Dict[int, int], x: int, image: int) -> bool:
    for y, y_image in assigned.items():
        if y in topo.min_open[x] and y_image not in topo.min_open[image]:
            return False
        if x in topo.min_open[y] and image not in topo.min_open[y_image]:
            return False
    return True


def _search_monotone(topo: FiniteTopology, rng: np.random.Generator) -> Tuple[int, ...]:
    """Backtracking over images in random order"""
    order = rng.permutation(topo.size).tolist()
    candidates = {x: rng.permutation(topo.size).tolist() for x in order}
    assigned: Dict[int, int] = {}

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        x = order[position]
        for image in candidates[x]:
            if _consistent(topo, assigned, x, image):
                assigned[x] = image
                if extend(position + 1):
                    return True
                del assigned[x]
        return False

    # constant maps are always continuous, so the search cannot come back empty
    extend(0)
    return tuple(assigned[x] for x in range(topo.size))


def random_monotone_map(topo: FiniteTopology, rng: np.random.Generator,
                        attempts: int = MONOTONE_MAP_ATTEMPTS) -> FiniteSemiFlow:
    """A random continuous self-map: rejection sampling, then a randomized backtracking search."""
    for _ in range(attempts):
        flow = FiniteSemiFlow(topo.size, tuple(rng.integers(0, topo.size, size=topo.size).tolist()))
        if continuity_violation(flow, topo) is None:
            return flow
    return FiniteSemiFlow(topo.size, _search_monotone(topo, rng))


def sierpinski_instance() -> SweepInstance:
    """min_open[0] = {0}, min_open[1] = {0, 1}, both points sent to 1."""
    return SweepInstance("non_t1", 0, (1, 1), ((0,), (0, 1)))


def _freeze_topology(topo: FiniteTopology) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(sorted(u)) for u in topo.min_open)


def _evaluate(instance: SweepInstance) -> List[Dict[str, Any]]:
    """Run the checks for one instance, one record per check"""
    flow = FiniteSemiFlow(len(instance.map), instance.map)
    topo = FiniteTopology(len(instance.min_open), instance.min_open)
    if instance.period is None:
        checks = theorem_suite(flow, topo, instance.target)
    else:
        target = m_periodic(flow, instance.period)
        ext = neighborhood_externology(topo, target)
        all_checks = externology_checks(ext, flow, topo)
        checks = {name: all_checks[name] for name in EQUIVARIANCE_CHECKS}
        checks["attraction_lemma"] = attraction_check(flow, topo, target)
    return [
        {
            "family": instance.family,
            "index": instance.index,
            "size": flow.size,
            "check": name,
            "holds": result.holds,
            "hypothesis_satisfied": result.hypothesis_satisfied,
        }
        for name, result in checks.items()
    ]


def _evaluate_chunk(chunk: List[SweepInstance]) -> List[Dict[str, Any]]:
    records = []
    for instance in chunk:
        records.extend(_evaluate(instance))
    return records


class TheoremSweep:
    """
    Exhaustive and seeded-random verification of the finite theorem suite.
    Results are identical for any worker count.
    """

    def __init__(self, max_size: int = VERIFY_MAX_SIZE, trials: int = VERIFY_TRIALS,
                 seed: int = VERIFY_SEED, workers: int = SWEEP_WORKERS):
        self.max_size = max_size
        self.trials = trials
        self.seed = seed
        self.workers = max(1, workers)

    def discrete_instances(self) -> List[SweepInstance]:
        """Every self-map of every discrete space up to max_size"""
        instances = []
        for n in range(1, self.max_size + 1):
            topo = _freeze_topology(FiniteTopology.discrete(n))
            for flow in all_maps(n):
                instances.append(SweepInstance("discrete", len(instances), flow.map, topo))
        return instances

    def non_t1_instances(self) -> List[SweepInstance]:
        """The Sierpinski space plus seeded random preorders with continuous maps"""
        rng = np.random.default_rng(self.seed)
        low, high = RANDOM_SPACE_SIZES
        instances = [sierpinski_instance()]
        for _ in range(self.trials):
            topo = random_preorder(int(rng.integers(low, high + 1)), rng)
            flow = random_monotone_map(topo, rng)
            mask = rng.random(topo.size) < 0.5
            target = tuple(np.flatnonzero(mask).tolist()) or None
            instances.append(SweepInstance("non_t1", len(instances), flow.map, _freeze_topology(topo), target))
        return instances

    def equivariance_instances(self) -> List[SweepInstance]:
        """Random maps on discrete spaces with a period for epsilon(X, P_m)"""
        rng = np.random.default_rng(self.seed + 1)
        low, high = RANDOM_SPACE_SIZES
        instances = []
        for _ in range(self.trials):
            n = int(rng.integers(low, high + 1))
            flow_map = tuple(rng.integers(0, n, size=n).tolist())
            period = int(rng.choice(EQUIVARIANCE_PERIODS))
            topo = _freeze_topology(FiniteTopology.discrete(n))
            instances.append(SweepInstance("equivariance", len(instances), flow_map, topo, period=period))
        return instances

    def _run(self, instances: List[SweepInstance]) -> List[Dict[str, Any]]:
        """Evaluate the instances in chunks, across processes when workers > 1"""
        chunks = [instances[i:i + SWEEP_CHUNK] for i in range(0, len(instances), SWEEP_CHUNK)]
        if self.workers == 1 or len(chunks) <= 1:
            results = [_evaluate_chunk(chunk) for chunk in chunks]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(_evaluate_chunk, chunks))
        records = []
        for chunk_records in results:
            records.extend(chunk_records)
        logger.debug("evaluated %d instances in %d chunks", len(instances), len(chunks))
        return records

    def _create_dataframe(self, records: List[Dict[str, Any]]) -> pd.DataFrame:
        """Records as a frame with the failure columns added"""
        if not records:
            return pd.DataFrame(columns=["family", "index", "size", "check", "holds", "hypothesis_satisfied"])
        frame = pd.DataFrame.from_records(records)
        frame["failed"] = ~frame["holds"]
        frame["violation_failure"] = frame["failed"] & ~frame["hypothesis_satisfied"]
        frame["satisfied_failure"] = frame["failed"] & frame["hypothesis_satisfied"]
        return frame

    @staticmethod
    def _per_check(frame: pd.DataFrame) -> Dict[str, Dict[str, int]]:
        """Counts per check name"""
        if frame.empty:
            return {}
        table = frame.groupby("check").agg(
            evaluated=("holds", "size"),
            held=("holds", "sum"),
            hypothesis_violation_failures=("violation_failure", "sum"),
            hypothesis_satisfied_failures=("satisfied_failure", "sum"),
        )
        return {
            check: {column: int(value) for column, value in row.items()}
            for check, row in table.sort_index().iterrows()
        }

    @staticmethod
    def _failure_examples(frame: pd.DataFrame, instances: List[SweepInstance], limit: int = 10) -> List[Dict[str, Any]]:
        """Instances behind the first failures under satisfied hypotheses"""
        if frame.empty:
            return []
        failing = frame[frame["satisfied_failure"]].head(limit)
        examples = []
        for _, row in failing.iterrows():
            instance = instances[int(row["index"])]
            examples.append({
                "check": row["check"],
                "map": list(instance.map),
                "min_open": [list(u) for u in instance.min_open],
                "S": None if instance.target is None else list(instance.target),
            })
        return examples

    def run(self) -> Dict[str, Any]:
        """Full sweep; the summary is a pure function of max_size, trials and seed."""
        discrete = self.discrete_instances()
        non_t1 = self.non_t1_instances()
        equivariance = self.equivariance_instances()
        logger.info(
            "sweeping %d discrete maps, %d non-T1 instances, %d equivariance instances",
            len(discrete), len(non_t1), len(equivariance),
        )

        theorem_frame = self._create_dataframe(self._run(discrete) + self._run(non_t1))
        equivariance_frame = self._create_dataframe(self._run(equivariance))

        violation = int(theorem_frame["violation_failure"].sum()) if not theorem_frame.empty else 0
        satisfied = int(theorem_frame["satisfied_failure"].sum()) if not theorem_frame.empty else 0
        equivariance_failures = int(equivariance_frame["failed"].sum()) if not equivariance_frame.empty else 0
        if satisfied:
            logger.error("%d checks failed with their hypotheses satisfied", satisfied)
        if violation:
            logger.warning("%d checks failed outside their hypotheses", violation)

        discrete_frame = theorem_frame[theorem_frame["family"] == "discrete"] if not theorem_frame.empty else theorem_frame
        non_t1_frame = theorem_frame[theorem_frame["family"] == "non_t1"] if not theorem_frame.empty else theorem_frame
        return {
            "max_size": self.max_size,
            "trials": self.trials,
            "seed": self.seed,
            "checked": len(discrete),
            "non_t1_checked": len(non_t1),
            "check_evaluations": int(len(theorem_frame)),
            "hypothesis_violation_failures": violation,
            "hypothesis_satisfied_failures": satisfied,
            "per_check": self._per_check(theorem_frame),
            "failures": (
                self._failure_examples(discrete_frame, discrete)
                + self._failure_examples(non_t1_frame, non_t1)
            ),
            "equivariance": {
                "checked": len(equivariance),
                "failures": equivariance_failures,
                "per_check": self._per_check(equivariance_frame),
            },
        }


def verify_sweep(max_size: int = VERIFY_MAX_SIZE, trials: int = VERIFY_TRIALS,
                 seed: int = VERIFY_SEED, workers: int = SWEEP_WORKERS) -> Dict[str, Any]:
    """Run a TheoremSweep and return its summary"""
    return TheoremSweep(max_size, trials, seed, workers).run()
