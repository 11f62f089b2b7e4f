"""Seeded experiment drivers producing CSV tables.

Every table has a fixed header (the ``*_HEADER`` constants below). With
timing off, the same configuration always yields byte-identical CSV text.
"""

from __future__ import annotations

import io
import itertools
import math
import time
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from ._rng import trial_generator
from .analysis import (
    PairBijection,
    check_event_A1,
    check_event_A3,
    count_nonfixed,
    flip_probability,
    is_independent,
    mc_flip_probabilities,
    mc_tail_bounds,
    nonfixed_lower_bound,
    pair_functional_graph,
    partition_nonfixed_pairs,
)
from .bounds import (
    coupled_deletion_sample,
    collision_probability,
    cycle_pair_instance,
    noisy_cut_samples,
    path_complement_instance,
    sample_noisy_cut,
    single_edge_removal_isomorphic,
    two_cut_special_count,
)
from .formats import write_rows
from .graph import random_graph, two_cut_distribution
from .noise import DELETION, FLIP, NoiseParams, ParameterError, generate_traces, normalize
from .pairing import (
    algorithm1_params,
    best_triple_exact,
    best_triple_heuristic,
    model_constants,
    oracle_pairing,
    pair_traces,
)
from .reconstruct import (
    DEFAULT_BUDGET,
    PLANS,
    REFERENCE,
    evaluate_reconstruction,
    reconstruct_end_to_end,
    required_traces,
)

SWEEP_HEADER = (
    "model", "n", "p_v", "edge_param", "t", "seed", "trial", "success",
    "class_count", "conflicts", "ambiguous", "wall_time",
)
VERIFY_HEADER = ("check", "params", "estimate", "reference", "passed")
COUPLING_HEADER = ("n", "samples", "seed", "statistic", "estimate", "reference", "stderr", "passed")
CUTSTATS_HEADER = ("r", "n", "graph", "special_count", "expected", "passed")


class ConfigError(ValueError):
    """A configuration field is missing or invalid; the message names it."""


@dataclass
class Table:
    header: tuple
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_rows(buf, self.header, self.rows)
        return buf.getvalue()

    @property
    def passed(self) -> bool:
        i = self.header.index("passed")
        return all(bool(row[i]) for row in self.rows)


# ---------------------------------------------------------------- configuration


@dataclass
class ExperimentConfig:
    """Settings shared by all subcommands; ``seed`` is mandatory.

    ``t`` holds one or more trace counts; ``"auto"`` resolves through
    :func:`required_traces`.
    """

    seed: Optional[int] = None
    subcommand: str = "reconstruct"
    model: str = DELETION
    p_v: float = 1.0
    p_e: Optional[float] = 0.5
    f_e: Optional[float] = None
    n: int = 50
    t: list = field(default_factory=lambda: ["auto"])
    trials: int = 1
    budget: int = 20_000
    plan: str = REFERENCE
    pairing: str = "algorithm1"
    timing: bool = False
    output: Optional[str] = None
    checks: Optional[list] = None
    samples: Optional[int] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown configuration field")
        cfg = cls(**data)
        if not isinstance(cfg.t, list):
            cfg.t = [cfg.t]
        return cfg

    def params(self) -> NoiseParams:
        try:
            if self.model == DELETION:
                return NoiseParams.deletion(self.p_v, self.p_e)
            if self.model == FLIP:
                return NoiseParams.flip(self.p_v, self.f_e)
        except ParameterError as exc:
            field_name = "p_v" if "p_v" in str(exc) else ("p_e" if self.model == DELETION else "f_e")
            raise ConfigError(f"{field_name}: {exc}") from None
        raise ConfigError(f"model: expected 'deletion' or 'flip', got {self.model!r}")

    def validate(self) -> None:
        if self.seed is None:
            raise ConfigError("seed: a seed is required")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: expected a non-negative integer, got {self.seed!r}")
        if self.trials < 0:
            raise ConfigError(f"trials: must be non-negative, got {self.trials}")
        if self.budget < 0:
            raise ConfigError(f"budget: must be non-negative, got {self.budget}")
        if self.plan not in PLANS:
            raise ConfigError(f"plan: expected one of {PLANS}, got {self.plan!r}")
        if self.pairing not in ("algorithm1", "oracle"):
            raise ConfigError(f"pairing: expected 'algorithm1' or 'oracle', got {self.pairing!r}")
        if self.samples is not None and self.samples < 1:
            raise ConfigError(f"samples: must be positive, got {self.samples}")
        if self.subcommand == "reconstruct":
            if self.n < 1:
                raise ConfigError(f"n: must be positive, got {self.n}")
            for t in self.t:
                if t != "auto" and (not isinstance(t, int) or t < 0):
                    raise ConfigError(f"t: expected 'auto' or a non-negative integer, got {t!r}")
            self.params()

    def resolved_t(self) -> list[int]:
        params = self.params()
        out = []
        for t in self.t:
            if t == "auto":
                try:
                    t = required_traces(params, self.n)
                except ParameterError as exc:
                    raise ConfigError(f"t: cannot resolve 'auto': {exc}") from None
            out.append(int(t))
        return out


def parse_t(text: str) -> list:
    """``"auto"``, ``"37"`` or ``"10,20,37"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        out.append(part if part == "auto" else int(part))
    return out


# ---------------------------------------------------------------- reconstruction sweep


def trial_seeds(seed: int, trial: int):
    """Generators for the hidden graph and for the run of one trial."""
    rng = trial_generator(seed, trial)
    return rng.spawn(2)


def run_trial(cfg: ExperimentConfig, t: int, trial: int):
    """One reconstruction trial; returns ``(row, report, G)``."""
    params = cfg.params()
    graph_rng, run_rng = trial_seeds(cfg.seed, trial)
    G = random_graph(cfg.n, graph_rng)
    start = time.perf_counter()
    report = reconstruct_end_to_end(
        G, params, t, cfg.budget, run_rng, plan=cfg.plan, pairing=cfg.pairing
    )
    elapsed = time.perf_counter() - start
    success = evaluate_reconstruction(report, G)
    row = (
        cfg.model, cfg.n, float(cfg.p_v), float(params.edge_param), t, cfg.seed, trial,
        success, report.class_count, report.conflicts, report.ambiguous,
        f"{elapsed:.3f}" if cfg.timing else "",
    )
    return row, report, G


def run_reconstruction_sweep(cfg: ExperimentConfig, on_trial: Optional[Callable] = None) -> Table:
    """Rows of ``SWEEP_HEADER`` for every (t, trial) combination.

    Raises
    ------
    ConfigError
        If the configuration is invalid, including parameters for which the
        anchor-set size would not be positive.
    """
    cfg.validate()
    ts = cfg.resolved_t()
    table = Table(SWEEP_HEADER)
    if cfg.trials == 0:
        return table
    if cfg.pairing == "algorithm1" and any(t > 1 for t in ts):
        try:
            algorithm1_params(cfg.n, cfg.p_v)
        except ParameterError as exc:
            raise ConfigError(f"p_v: {exc}") from None
    for t, trial in itertools.product(ts, range(cfg.trials)):
        row, report, G = run_trial(cfg, t, trial)
        table.rows.append(row)
        if on_trial is not None:
            on_trial(row, report, G)
    table.rows.sort(key=lambda r: (r[4], r[6]))
    return table


def success_rates(table: Table) -> dict[int, float]:
    """Mean success per trace count."""
    rates: dict[int, list] = {}
    for row in table.rows:
        rates.setdefault(row[4], []).append(bool(row[7]))
    return {t: float(np.mean(v)) for t, v in sorted(rates.items())}


# ---------------------------------------------------------------- verification checks


def _fmt(**kw) -> str:
    return ";".join(f"{k}={v}" for k, v in kw.items())


def check_flip_rates(seed: int, samples: Optional[int] = None):
    """Two-copy disagreement probabilities against their closed forms."""
    samples = samples or 10**6
    grid = [NoiseParams.deletion(1.0, p) for p in (0.1, 0.3, 0.5)]
    grid += [NoiseParams.flip(1.0, f) for f in (0.25, 0.4, 0.5)]
    rows = []
    for idx, (params, conditioned) in enumerate(itertools.product(grid, (False, True))):
        est = mc_flip_probabilities(params, conditioned, samples, trial_generator(seed, idx))
        rows.append((
            "flip_rates",
            _fmt(model=params.model, edge_param=params.edge_param, conditioned=int(conditioned), samples=samples),
            est.estimate, flip_probability(params, conditioned), est.within(3.0),
        ))
    return rows


def check_nonfixed_pairs(seed: int, samples: Optional[int] = None):
    """``m >= b (n' - 1 - b/2)`` exhaustively at ``n' = 6`` and on random permutations."""
    rows = []
    perms = np.array(list(itertools.permutations(range(6))))
    v = _nonfixed_violations(perms)
    rows.append(("nonfixed_pairs", _fmt(n_prime=6, permutations=len(perms), mode="exhaustive"), v, 0, v == 0))
    samples = samples or 10**4
    for i, n_prime in enumerate((10, 50)):
        rng = trial_generator(seed, i)
        perms = np.argsort(rng.random((samples, n_prime)), axis=1)
        v = _nonfixed_violations(perms)
        rows.append(("nonfixed_pairs", _fmt(n_prime=n_prime, permutations=samples, mode="random"), v, 0, v == 0))
    return rows


def _nonfixed_violations(perms: np.ndarray) -> int:
    n_prime = perms.shape[1]
    bad = 0
    for p in perms:
        b, m = count_nonfixed(p)
        bad += m < nonfixed_lower_bound(n_prime, b)
    return int(bad)


def random_partial_permutation(n_prime: int, rng) -> np.ndarray:
    """Identity with a random subset of vertices shuffled among themselves."""
    perm = np.arange(n_prime)
    moved = rng.choice(n_prime, size=int(rng.integers(0, n_prime + 1)), replace=False)
    perm[moved] = rng.permutation(moved)
    return perm


def partition_violations(perm) -> int:
    sigma = PairBijection(perm)
    nodes = sigma.nonfixed_pairs()
    part = partition_nonfixed_pairs(sigma)
    succ = pair_functional_graph(sigma, nodes)
    sizes = part.sizes
    bad = 0
    bad += not all(is_independent(p, succ) for p in part.parts)
    bad += max(sizes) - min(sizes) > 1
    bad += sorted(q for p in part.parts for q in p) != sorted(nodes)
    if len(nodes) >= 8:
        bad += min(sizes) < len(nodes) / 4
    return int(bad)


def check_partition(seed: int, samples: Optional[int] = None):
    samples = samples or 1000
    rng = trial_generator(seed, 0)
    bad = 0
    for _ in range(samples):
        perm = random_partial_permutation(int(rng.integers(2, 41)), rng)
        bad += partition_violations(perm) > 0
    return [("partition", _fmt(bijections=samples, max_n_prime=40), bad, 0, bad == 0)]


def triple_search_instance(seed: int, i: int):
    """Two random graphs with at most 7 vertices and a ``k`` the exact search can afford."""
    rng = trial_generator(seed, i)
    n1, n2 = (int(x) for x in rng.integers(3, 8, size=2))
    k = int(rng.integers(2, min(n1, n2) + 1))
    while math.comb(n1, k) * math.comb(n2, k) * math.factorial(k) > 10**6:
        k -= 1
    return random_graph(n1, rng), random_graph(n2, rng), k


def check_triple_search(seed: int, samples: Optional[int] = None, budget: int = 100_000):
    instances = samples or 100
    equal = below = 0
    for i in range(instances):
        g1, g2, k = triple_search_instance(seed, i)
        exact = best_triple_exact(g1, g2, k).delta
        heur = best_triple_heuristic(g1, g2, k, budget, trial_generator(seed, 10**6 + i)).delta
        equal += heur == exact
        below += heur < exact
    need = math.ceil(0.95 * instances)
    return [
        ("triple_search_never_below", _fmt(instances=instances, budget=budget), below, 0, below == 0),
        ("triple_search_equal", _fmt(instances=instances, budget=budget), equal, need, equal >= need),
    ]


def check_tail_bounds(seed: int, samples: Optional[int] = None):
    samples = samples or 10**5
    grid = [NoiseParams.deletion(1.0, p) for p in (0.3, 0.5)]
    grid += [NoiseParams.flip(1.0, f) for f in (0.25, 0.4)]
    rows = []
    for idx, (params, N) in enumerate(itertools.product(grid, (10**3, 10**4))):
        for c in mc_tail_bounds(params, N, samples, trial_generator(seed, idx)):
            rows.append((
                "tail_bounds",
                _fmt(model=params.model, edge_param=params.edge_param, N=N, event=c.event, samples=samples),
                c.empirical, c.bound, c.passed,
            ))
    return rows


def check_event_a1(seed: int, samples: Optional[int] = None):
    """Overlap of two traces inside its window, over seeded trace pairs."""
    pairs = samples or 10
    rows = []
    for n, p_v in ((200, 0.5), (1000, 0.5)):
        G = random_graph(n, trial_generator(seed, n))
        params = NoiseParams.deletion(p_v, 0.5)
        held = 0
        for i in range(pairs):
            t1, t2 = generate_traces(G, params, 2, trial_generator(seed, 10 * n + i))
            held += check_event_A1(t1, t2, n, p_v)
        rows.append(("event_a1", _fmt(n=n, p_v=p_v, pairs=pairs), held, pairs, held == pairs))
    return rows


def check_event_a3(seed: int, samples: Optional[int] = None):
    """Violation fraction of the signature separation events against the tail bound."""
    seeds = samples or 10
    n, p_v, p_e = 2000, 0.5, 0.5
    params = NoiseParams.deletion(p_v, p_e)
    constants = model_constants(params)
    G = random_graph(n, trial_generator(seed, 0))
    viol = total = 0
    m_min = n
    for i in range(seeds):
        t1, t2 = generate_traces(G, params, 2, trial_generator(seed, 1 + i))
        rep = check_event_A3(t1, t2, constants)
        viol += rep.violations
        total += rep.same_pairs + rep.distinct_pairs
        m_min = min(m_min, rep.m)
    frac = viol / total
    bound = 2 * n * n * math.exp(-(p_e**3) * m_min / 216)
    slack = 3 * math.sqrt(max(frac * (1 - frac), 1e-12) / total)
    return [("event_a3", _fmt(n=n, p_v=p_v, p_e=p_e, seeds=seeds), frac, bound, frac <= bound + slack)]


def coupling_table(n: int, samples: int, seed: int) -> Table:
    """Collision rate, collision-implies-isomorphism and per-edge survival."""
    G1, G2 = cycle_pair_instance(n)
    rng = trial_generator(seed, 0)
    collisions = 0
    surv1 = np.zeros((n, n))
    surv2 = np.zeros((n, n))
    failures = 0
    for _ in range(samples):
        try:
            s = coupled_deletion_sample(n, rng)
        except AssertionError:
            failures += 1
            continue
        collisions += s.collision
        surv1 += s.trace1.adjacency
        surv2 += s.trace2.adjacency
    table = Table(COUPLING_HEADER)
    p = collision_probability(n)
    se = math.sqrt(p * (1 - p) / samples)
    rate = collisions / samples
    table.rows.append((n, samples, seed, "collision_rate", rate, p, se, abs(rate - p) <= 3 * se))
    table.rows.append((n, samples, seed, "collision_not_isomorphic", failures, 0, 0.0, failures == 0))
    se = math.sqrt(0.25 / samples)
    for name, g, surv in (("C_n", G1, surv1), ("2C_n/2", G2, surv2)):
        for u, v in g.edges():
            f = surv[u, v] / samples
            table.rows.append((n, samples, seed, f"survival[{name}:{u}-{v}]", f, 0.5, se, abs(f - 0.5) <= 3 * se))
    return table


def cutstats_table(rs: Sequence[int]) -> Table:
    table = Table(CUTSTATS_HEADER)
    for r in rs:
        inst = path_complement_instance(r)
        for name, g, expected in (("G1", inst.G1, r), ("G2", inst.G2, r - 1)):
            count = two_cut_special_count(g)
            table.rows.append((r, inst.n, name, count, expected, count == expected))
    return table


def check_coupling(seed: int, samples: Optional[int] = None):
    table = coupling_table(10, samples or 10**5, seed)
    return [
        ("coupling", _fmt(n=row[0], samples=row[1], statistic=row[3]), row[4], row[5], row[7])
        for row in table.rows
    ]


def check_cutstats(seed: int, samples: Optional[int] = None):
    rows = [
        ("cutstats", _fmt(r=row[0], graph=row[2]), row[3], row[4], row[5])
        for row in cutstats_table((2, 3, 4)).rows
    ]
    iso = sum(
        single_edge_removal_isomorphic(2, i, j, k, l)
        for i, j, k, l in itertools.product(range(2), repeat=4)
    )
    rows.append(("edge_removal_isomorphic", _fmt(r=2, tuples=16), iso, 16, iso == 16))

    # the literal sampler's mean against half the mean cut
    draws = samples or 20_000
    inst = path_complement_instance(2)
    rng = trial_generator(seed, 0)
    literal = np.array([sample_noisy_cut(inst.G1, rng) for _ in range(draws)], dtype=float)
    expected = two_cut_distribution(inst.G1).mean() / 2
    se = literal.std(ddof=1) / math.sqrt(draws)
    rows.append((
        "noisy_cut_mean", _fmt(r=2, graph="G1", samples=draws),
        float(literal.mean()), float(expected), abs(literal.mean() - expected) <= 3 * se,
    ))
    fast = noisy_cut_samples(inst.G1, draws, trial_generator(seed, 1)).astype(float)
    se = math.sqrt(literal.var(ddof=1) / draws + fast.var(ddof=1) / draws)
    rows.append((
        "noisy_cut_sampler_agreement", _fmt(r=2, graph="G1", samples=draws),
        float(fast.mean()), float(literal.mean()), abs(fast.mean() - literal.mean()) <= 3 * se,
    ))
    return rows


PAIRING_HEADER = ("seed", "pair", "n", "p_v", "p_e", "k", "delta", "matched", "shared", "correct", "precision", "recall")


def pairing_quality_table(
    n: int, p_v: float, p_e: float, pairs: int, seed: int, budget: int = DEFAULT_BUDGET
) -> Table:
    """Algorithm-1 matchings of trace pairs scored against provenance.

    Each pair gets its own hidden graph. Precision is 0 when nothing is
    matched.
    """
    params = NoiseParams.deletion(p_v, p_e)
    table = Table(PAIRING_HEADER)
    for i in range(pairs):
        graph_rng, trace_rng, norm_rng, pair_rng = trial_generator(seed, i).spawn(4)
        G = random_graph(n, graph_rng)
        traces, eff = normalize(generate_traces(G, params, 2, trace_rng), params, norm_rng)
        t1, t2 = traces
        triple, matching = pair_traces(t1.observed, t2.observed, eff, n, budget, pair_rng)
        truth = oracle_pairing(t1, t2).pairs
        correct = sum(truth.get(a) == b for a, b in matching.items())
        table.rows.append((
            seed, i, n, float(p_v), float(p_e), triple.k, triple.delta, len(matching), len(truth), correct,
            correct / len(matching) if len(matching) else 0.0,
            correct / len(truth) if truth else 1.0,
        ))
    return table


def pooled_precision_recall(table: Table) -> tuple[float, float]:
    matched = sum(r[7] for r in table.rows)
    shared = sum(r[8] for r in table.rows)
    correct = sum(r[9] for r in table.rows)
    return (correct / matched if matched else 0.0), (correct / shared if shared else 1.0)


def check_pairing_quality(seed: int, samples: Optional[int] = None):
    table = pairing_quality_table(1000, 0.5, 0.5, samples or 10, seed)
    precision, recall = pooled_precision_recall(table)
    params = _fmt(n=1000, p_v=0.5, p_e=0.5, pairs=len(table.rows))
    return [
        ("pairing_precision", params, precision, 0.99, precision >= 0.99),
        ("pairing_recall", params, recall, 0.99, recall >= 0.99),
    ]


CHECKS: dict[str, Callable] = {
    "flip_rates": check_flip_rates,
    "nonfixed_pairs": check_nonfixed_pairs,
    "partition": check_partition,
    "triple_search": check_triple_search,
    "tail_bounds": check_tail_bounds,
    "event_a1": check_event_a1,
    "event_a3": check_event_a3,
    "coupling": check_coupling,
    "cutstats": check_cutstats,
    "pairing_quality": check_pairing_quality,
}

# pairing quality runs only on request; see the README for why it is red
DEFAULT_CHECKS = tuple(c for c in CHECKS if c != "pairing_quality")


def run_verify_suite(cfg: ExperimentConfig) -> Table:
    """One row per (check, parameter point).

    Runs ``cfg.checks`` or, when unset, :data:`DEFAULT_CHECKS`.
    """
    cfg.validate()
    names = cfg.checks or list(DEFAULT_CHECKS)
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ConfigError(f"checks: unknown check {unknown[0]!r}; available: {', '.join(CHECKS)}")
    table = Table(VERIFY_HEADER)
    for name in names:
        table.rows.extend(CHECKS[name](cfg.seed, cfg.samples))
    return table
