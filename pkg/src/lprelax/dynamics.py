"""Asynchronous, cyclic, scripted, and synchronous lp-relaxation dynamics.

A step updates one interior vertex (or, synchronously, all of them at once
from a frozen copy) to the minimizer of its local lp energy against its
neighbors' current values. Boundary values are never touched. The
epsilon-approximation time of a run is the first step at which the profile is
within epsilon of the p-harmonic extension of its boundary data in sup norm.

Vertex selection for the random schedule uses the package splitmix64 stream
with rejection sampling, so trajectories are bit-reproducible across
platforms and worker counts.

The continuous-time variant (i.i.d. rate-1 clocks on interior vertices) is
not simulated: its expected approximation time equals the discrete one
divided by the interior size, so estimates convert by that factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .extension import p_harmonic_extension
from .graph import Graph, require_valid
from .kernel import DEFAULT_SOLVE, LocalSolveConfig, local_argmin, validate_p
from .rng import SplitMix64, derive_seed


class ScheduleExhausted(RuntimeError):
    pass


class OrderingViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Vertex-selection rule: which interior vertex each step updates."""
    kind: str
    seed: int | None = None
    order: tuple[int, ...] | None = None
    script: tuple[int, ...] | None = None

    @staticmethod
    def uniform(seed: int) -> "Schedule":
        """I.i.d. uniform over the interior, driven by a splitmix64 stream."""
        return Schedule(kind="uniform", seed=int(seed))

    @staticmethod
    def cyclic(order=None) -> "Schedule":
        """Fixed repeating order; defaults to sorted interior ids."""
        return Schedule(kind="cyclic",
                        order=None if order is None else tuple(int(v) for v in order))

    @staticmethod
    def scripted(vertices) -> "Schedule":
        return Schedule(kind="scripted", script=tuple(int(v) for v in vertices))

    @staticmethod
    def synchronous() -> "Schedule":
        return Schedule(kind="synchronous")


def _schedule_order(graph: Graph, schedule: Schedule) -> list[int]:
    if schedule.kind == "cyclic":
        order = (schedule.order if schedule.order is not None
                 else tuple(int(v) for v in graph.interior))
        if not order:
            raise ValueError("cyclic schedule with empty order")
    elif schedule.kind == "scripted":
        order = schedule.script or ()
    else:
        return []
    for v in order:
        if not (0 <= v < graph.n) or graph.boundary_mask[v]:
            raise ValueError(f"scheduled vertex {v} is not interior")
    return list(order)


@dataclass
class DynamicsState:
    """Mutable run state: step counter, profile, exponent, RNG stream.

    ``last_vertex`` is the vertex updated by the most recent asynchronous
    step (None initially and for synchronous steps).
    """
    t: int
    f: np.ndarray
    p: float
    rng: SplitMix64 | None = None
    last_vertex: int | None = None


def make_state(graph: Graph, f0, p: float, schedule: Schedule) -> DynamicsState:
    require_valid(graph)
    p = validate_p(p)
    f = np.array(f0, dtype=float, copy=True)
    if f.shape != (graph.n,):
        raise ValueError(f"profile shape {f.shape} does not match n={graph.n}")
    if not np.all(np.isfinite(f)):
        raise ValueError("profile values must be finite")
    rng = SplitMix64(schedule.seed) if schedule.kind == "uniform" else None
    return DynamicsState(t=0, f=f, p=p, rng=rng)


def step(graph: Graph, state: DynamicsState, schedule: Schedule,
         cfg: LocalSolveConfig = DEFAULT_SOLVE) -> DynamicsState:
    """Advance one step in place and return the state.

    Asynchronous kinds update a single interior vertex; the synchronous kind
    updates every interior vertex simultaneously from a frozen copy of the
    previous profile. Deterministic given the schedule (and seed).
    """
    f = state.f
    adjacency = graph.adjacency
    if schedule.kind == "synchronous":
        frozen = f.copy()
        for v in graph.interior:
            v = int(v)
            f[v] = local_argmin([frozen[w] for w in adjacency[v]], state.p, cfg)
        state.last_vertex = None
    else:
        if schedule.kind == "uniform":
            interior = graph.interior
            v = int(interior[state.rng.next_below(interior.size)])
        else:
            order = _schedule_order(graph, schedule)
            if schedule.kind == "cyclic":
                v = order[state.t % len(order)]
            else:
                if state.t >= len(order):
                    raise ScheduleExhausted(
                        f"script has {len(order)} vertices, step {state.t + 1} requested")
                v = order[state.t]
        f[v] = local_argmin([f[w] for w in adjacency[v]], state.p, cfg)
        state.last_vertex = v
    state.t += 1
    return state


@dataclass(frozen=True)
class TrialOutcome:
    """Step count of one run; ``censored`` means the cap was hit first."""
    steps: int
    censored: bool
    sup_error: float


def run_tau(graph: Graph, f0, p: float, epsilon: float, schedule: Schedule,
            h, max_steps: int, cfg: LocalSolveConfig = DEFAULT_SOLVE) -> TrialOutcome:
    """First step count at which ``||f_t - h||_inf <= epsilon``.

    ``h`` must come from the extension solver at tolerance <= epsilon / 10 so
    the stopping test is meaningful. A run that exhausts ``max_steps`` is
    returned with ``censored=True``, never dropped.
    """
    require_valid(graph)
    p = validate_p(p)
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    f0 = np.asarray(f0, dtype=float)
    h = np.asarray(h, dtype=float)
    if f0.shape != (graph.n,) or h.shape != f0.shape:
        raise ValueError(
            f"profile shapes {f0.shape} / {h.shape} do not match n={graph.n}")
    if not np.array_equal(f0[graph.boundary_mask], h[graph.boundary_mask]):
        raise ValueError("h and f0 disagree on the boundary")

    f = [float(x) for x in f0]
    hv = [float(x) for x in h]
    n = graph.n
    adjacency = graph.adjacency

    errs = [abs(f[i] - hv[i]) for i in range(n)]
    cur = max(errs)
    if cur <= epsilon:
        return TrialOutcome(steps=0, censored=False, sup_error=cur)

    if schedule.kind == "synchronous":
        interior = [int(v) for v in graph.interior]
        for t in range(1, max_steps + 1):
            frozen = f[:]
            for v in interior:
                f[v] = local_argmin([frozen[w] for w in adjacency[v]], p, cfg)
            cur = max(abs(f[i] - hv[i]) for i in range(n))
            if cur <= epsilon:
                return TrialOutcome(steps=t, censored=False, sup_error=cur)
        return TrialOutcome(steps=max_steps, censored=True, sup_error=cur)

    if schedule.kind == "uniform":
        rng = SplitMix64(schedule.seed)
        interior = [int(v) for v in graph.interior]
        n_star = len(interior)
        picker = lambda t: interior[rng.next_below(n_star)]
    else:
        order = _schedule_order(graph, schedule)
        if schedule.kind == "cyclic":
            k = len(order)
            picker = lambda t: order[(t - 1) % k]
        else:
            if len(order) < max_steps:
                max_steps = len(order)
            picker = lambda t: order[t - 1]

    fsum = math.fsum
    arg = errs.index(cur)
    is_mean = (p == 2.0)
    for t in range(1, max_steps + 1):
        v = picker(t)
        vals = [f[w] for w in adjacency[v]]
        if is_mean:
            # inlined p = 2 path, bitwise identical to local_argmin
            lo = min(vals)
            y = lo if lo == max(vals) else fsum(vals) / len(vals)
        else:
            y = local_argmin(vals, p, cfg)
        f[v] = y
        e = abs(y - hv[v])
        errs[v] = e
        if e >= cur:
            cur = e
            arg = v
        elif arg == v:
            cur = max(errs)
            arg = errs.index(cur)
        if cur <= epsilon:
            return TrialOutcome(steps=t, censored=False, sup_error=cur)
    return TrialOutcome(steps=max_steps, censored=True, sup_error=cur)


@dataclass(frozen=True)
class TauEstimate:
    """Monte-Carlo estimate of the expected approximation time.

    ``mean`` averages all trials, counting a censored trial at its cap, so it
    is a lower bound on the true expectation whenever ``censored > 0``.
    ``ci95`` is the normal-approximation half-width 1.96 * stderr.
    """
    epsilon: float
    trials: int
    mean: float
    stderr: float
    ci95: float
    censored: int
    taus: tuple[int, ...] = field(repr=False, default=())
    censored_flags: tuple[bool, ...] = field(repr=False, default=())

    def to_json(self) -> dict:
        # h is certified to epsilon/20 in sup norm, so the measured count
        # brackets the true approximation time for thresholds eps*(1 +- 0.2)
        return {"epsilon": self.epsilon, "trials": self.trials,
                "mean": self.mean, "stderr": self.stderr,
                "ci95": self.ci95, "censored": self.censored,
                "threshold_bracket": [0.8 * self.epsilon, 1.2 * self.epsilon]}


_WORKER_ENV = None


def _worker_init(payload):
    global _WORKER_ENV
    (n, edges, boundary, f0, h, p, epsilon, max_steps, abs_tol, max_iter) = payload
    graph = Graph(n, edges, boundary)
    cfg = LocalSolveConfig(abs_tol=abs_tol, max_iter=max_iter)
    _WORKER_ENV = (graph, np.array(f0), np.array(h), p, epsilon, max_steps, cfg)


def _worker_trial(args):
    index, seed = args
    graph, f0, h, p, epsilon, max_steps, cfg = _WORKER_ENV
    out = run_tau(graph, f0, p, epsilon, Schedule.uniform(seed), h, max_steps, cfg)
    return index, out.steps, out.censored


def estimate_expected_tau(graph: Graph, f0, p: float, epsilon: float,
                          trials: int, master_seed: int,
                          max_steps: int = 1_000_000, *,
                          h=None, workers: int = 1,
                          cfg: LocalSolveConfig = DEFAULT_SOLVE) -> TauEstimate:
    """Monte-Carlo mean of the approximation time over independent runs.

    Trial ``i`` uses the seed ``derive_seed(master_seed, i)``, so results are
    identical for any worker count; outcomes are merged in trial-index order.
    When ``h`` is not supplied it is solved at tolerance ``epsilon / 10``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if h is None:
        h = p_harmonic_extension(graph, np.asarray(f0, dtype=float), p,
                                 tol=epsilon / 10.0, cfg=cfg).h
    jobs = [(i, derive_seed(master_seed, i)) for i in range(trials)]

    results: list[tuple[int, bool]] = [None] * trials  # type: ignore[list-item]
    if workers > 1 and trials > 1:
        payload = (graph.n, graph.edges.tolist(), graph.boundary.tolist(),
                   np.asarray(f0, dtype=float).tolist(),
                   np.asarray(h, dtype=float).tolist(),
                   p, epsilon, max_steps, cfg.abs_tol, cfg.max_iter)
        ctx = get_context("fork")
        chunk = max(1, trials // (4 * workers))
        with ctx.Pool(processes=workers, initializer=_worker_init,
                      initargs=(payload,)) as pool:
            for index, steps, censored in pool.imap_unordered(
                    _worker_trial, jobs, chunksize=chunk):
                results[index] = (steps, censored)
    else:
        for index, seed in jobs:
            out = run_tau(graph, f0, p, epsilon, Schedule.uniform(seed),
                          h, max_steps, cfg)
            results[index] = (out.steps, out.censored)

    taus = [steps for steps, _ in results]
    flags = [c for _, c in results]
    censored = sum(flags)
    mean = math.fsum(taus) / trials
    if trials > 1:
        var = math.fsum((t - mean) ** 2 for t in taus) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    return TauEstimate(epsilon=epsilon, trials=trials, mean=mean,
                       stderr=stderr, ci95=1.96 * stderr, censored=censored,
                       taus=tuple(taus), censored_flags=tuple(flags))


@dataclass(frozen=True)
class CoupledResult:
    f_low: np.ndarray
    f_high: np.ndarray
    steps: int
    max_order_defect: float


def run_coupled(graph: Graph, f0_low, f0_high, p: float, schedule: Schedule,
                steps: int, cfg: LocalSolveConfig = DEFAULT_SOLVE,
                ordering_tol: float = 1e-10) -> CoupledResult:
    """Advance two ordered profiles with the identical vertex sequence.

    Requires ``f0_low <= f0_high`` pointwise; updating both at the same
    vertex preserves that ordering, which is re-asserted after every step.
    ``max_order_defect`` records the worst (low - high) excess seen, a
    solver-noise diagnostic that stays below ``ordering_tol`` on healthy runs.
    """
    require_valid(graph)
    p = validate_p(p)
    low = np.array(f0_low, dtype=float)
    high = np.array(f0_high, dtype=float)
    if np.any(low > high):
        raise ValueError("f0_low must be <= f0_high pointwise")
    adjacency = graph.adjacency
    rng = SplitMix64(schedule.seed) if schedule.kind == "uniform" else None
    order = _schedule_order(graph, schedule)
    interior = [int(v) for v in graph.interior]
    defect = 0.0
    for t in range(steps):
        if schedule.kind == "synchronous":
            frozen_low, frozen_high = low.copy(), high.copy()
            for v in interior:
                nbrs = adjacency[v]
                low[v] = local_argmin([frozen_low[w] for w in nbrs], p, cfg)
                high[v] = local_argmin([frozen_high[w] for w in nbrs], p, cfg)
            worst = float(np.max(low - high))
            defect = max(defect, worst)
            if worst > ordering_tol:
                raise OrderingViolation(
                    f"coupled ordering violated by {worst:.3e} at sync step {t + 1}")
        else:
            if schedule.kind == "uniform":
                v = interior[rng.next_below(len(interior))]
            elif schedule.kind == "cyclic":
                v = order[t % len(order)]
            else:
                if t >= len(order):
                    raise ScheduleExhausted("script exhausted")
                v = order[t]
            nbrs = adjacency[v]
            yl = local_argmin([low[w] for w in nbrs], p, cfg)
            yh = local_argmin([high[w] for w in nbrs], p, cfg)
            defect = max(defect, yl - yh)
            if yl > yh + ordering_tol:
                raise OrderingViolation(
                    f"coupled ordering violated at vertex {v}, step {t + 1}: "
                    f"{yl} > {yh}")
            low[v] = yl
            high[v] = yh
    return CoupledResult(f_low=low, f_high=high, steps=steps,
                         max_order_defect=max(defect, 0.0))


@dataclass(frozen=True)
class CoverEquivalenceReport:
    """Synchronous dynamics vs cyclic stage sweeps on the double cover.

    Stage ``l`` sweeps the plus copies of the interior when ``l`` is odd and
    the minus copies when ``l`` is even. After each stage the freshly swept
    side must carry the synchronous profile at time ``l`` and the other side
    the profile at time ``l - 1``; ``per_stage`` holds the max absolute
    mismatch of those identities per stage.
    """
    stages: int
    per_stage: tuple[float, ...]
    max_discrepancy: float
    interior_count: int
    tau_sync: int | None = None
    tau_cyclic: int | None = None
    sandwich_ok: bool | None = None


def run_sync_vs_cyclic_cover(graph: Graph, f0, p: float, stages: int,
                             epsilon: float | None = None, h=None,
                             cfg: LocalSolveConfig = DEFAULT_SOLVE,
                             max_steps: int = 1_000_000) -> CoverEquivalenceReport:
    """Check that stage sweeps on the double cover replay the synchronous run.

    With ``epsilon`` (and the extension ``h``) given, also measures the
    synchronous approximation time tau_sync on the original graph and the
    per-update approximation time tau_cyclic of the stage schedule on the
    cover, and checks m * tau_sync <= tau_cyclic <= m * (tau_sync + 1) where
    m is the interior size. That comparison assumes a profile whose sup error
    is nonincreasing under synchronous steps (e.g. superharmonic starts).
    """
    from .graph import double_cover  # local import keeps module deps one-way

    require_valid(graph)
    p = validate_p(p)
    f0 = np.asarray(f0, dtype=float)
    n = graph.n
    dc = double_cover(graph)
    cover = dc.cover
    cov_adj = cover.adjacency
    adjacency = graph.adjacency
    interior = [int(v) for v in graph.interior]

    f_sync = [float(x) for x in f0]
    g = f_sync + f_sync[:]
    per_stage = []
    for ell in range(1, stages + 1):
        f_prev = f_sync  # frozen: the new profile is built into a copy
        f_sync = f_sync[:]
        for v in interior:
            f_sync[v] = local_argmin([f_prev[w] for w in adjacency[v]], p, cfg)
        offset = 0 if ell % 2 == 1 else n
        for v in interior:
            cv = v + offset
            g[cv] = local_argmin([g[w] for w in cov_adj[cv]], p, cfg)
        other = n - offset
        d = 0.0
        for v in range(n):
            d = max(d, abs(g[v + offset] - f_sync[v]),
                    abs(g[v + other] - f_prev[v]))
        per_stage.append(d)

    tau_sync = tau_cyc = None
    sandwich_ok = None
    if epsilon is not None:
        if h is None:
            raise ValueError("epsilon given without the extension h")
        h = np.asarray(h, dtype=float)
        out_sync = run_tau(graph, f0, p, epsilon, Schedule.synchronous(),
                           h, max_steps, cfg)
        if not out_sync.censored:
            tau_sync = out_sync.steps
            m = len(interior)
            # the cover of a bipartite graph is disconnected (two copies of
            # the input), which is fine here, so the tau loop runs inline
            # rather than through run_tau's validity gate
            h2 = [float(x) for x in h] * 2
            gc = [float(x) for x in f0] * 2
            budget = m * (tau_sync + 1)
            t = 0
            if max(abs(a - b) for a, b in zip(gc, h2)) <= epsilon:
                tau_cyc = 0
            for ell in range(1, tau_sync + 2):
                if tau_cyc is not None:
                    break
                offset = 0 if ell % 2 == 1 else n
                for v in interior:
                    cv = v + offset
                    gc[cv] = local_argmin([gc[w] for w in cov_adj[cv]], p, cfg)
                    t += 1
                    if max(abs(a - b) for a, b in zip(gc, h2)) <= epsilon:
                        tau_cyc = t
                        break
            if tau_cyc is not None:
                sandwich_ok = m * tau_sync <= tau_cyc <= budget
            else:
                sandwich_ok = False

    return CoverEquivalenceReport(
        stages=stages, per_stage=tuple(per_stage),
        max_discrepancy=max(per_stage) if per_stage else 0.0,
        interior_count=len(interior),
        tau_sync=tau_sync, tau_cyclic=tau_cyc, sandwich_ok=sandwich_ok)
