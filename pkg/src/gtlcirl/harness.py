"""Closed-loop orchestration, baselines, and result emission.

One run executes K training episodes.  In the full closed loop every
episode may add counterexamples (episode violations plus perturbation
synthesis around them), after which the buffer is scored for
sufficiency/necessity/existence, the surrogate model absorbs the
objective value, and the next cause parameters are proposed by UCB.
Baselines train on raw environment rewards and never touch the formula,
buffer, or surrogate machinery.

All randomness is derived from the master seed through labeled streams,
so identical configurations reproduce every emitted byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import instrumentation
from .causal import CausalSpec, SneScores, evaluate_sne, objective_J
from .config import RunConfig
from .counterexamples import CounterexampleBuffer, generate_counterexamples
from .environments import make_environment
from .environments.base import Environment
from .formulas import format_formula
from .gp import GpModel, UcbSchedule, propose_theta, recommend_theta, ucb_value
from .qlearning import QTable, TauState, run_episode, select_action
from .rng import child_seed, stream


@dataclass
class EpisodeRow:
    episode: int
    success: bool
    cumulative_reward: float
    effect_robustness: float | None = None
    counterexamples: int = 0
    theta: tuple[float, ...] | None = None
    scores: SneScores | None = None
    objective: float | None = None


@dataclass
class GpLogRow:
    iteration: int
    theta: tuple[float, ...]
    scores: SneScores
    objective: float
    ucb: float


@dataclass
class RunRecord:
    config: RunConfig
    rows: list[EpisodeRow] = field(default_factory=list)
    gp_log: list[GpLogRow] = field(default_factory=list)
    qtable_lines: list[str] = field(default_factory=list)
    mined_formula: str | None = None
    final_theta: tuple[float, ...] | None = None
    update_count: int = 0
    counter_delta: dict[str, int] = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return sum(r.success for r in self.rows) / len(self.rows)

    def final_window_success(self, window: int = 50) -> float:
        tail = self.rows[-window:]
        return sum(r.success for r in tail) / len(tail)


def _build_env(cfg: RunConfig) -> Environment:
    params = dict(cfg.env_params)
    params.setdefault("episode_length", cfg.rl.horizon)
    return make_environment(cfg.environment, params, topology_seed=child_seed(cfg.seed, "topology"))


def run_gtl_cirl(cfg: RunConfig, env: Environment | None = None) -> RunRecord:
    """The full closed loop: train, collect counterexamples, refine."""
    cfg.validate()
    if env is None:
        env = _build_env(cfg)
    template = cfg.template()
    effect = cfg.effect()
    theta = np.asarray(cfg.theta0, dtype=float)
    spec = CausalSpec(template.instantiate(theta), effect, template, tuple(theta))
    table = QTable(env.action_count)
    buffer = CounterexampleBuffer(cfg.buffer_capacity)
    gp = GpModel(
        length_scale=cfg.gp.length_scale,
        noise_variance=cfg.gp.noise_variance,
        bounds=template.bounds(),
    )
    schedule = UcbSchedule(cfg.gp.ucb_c)
    record = RunRecord(config=cfg)

    for k in range(cfg.episodes):
        episode_rng = stream(cfg.seed, f"episode/{k}")
        result = run_episode(env, table, spec, cfg.rl, episode_rng, cfg.rl.epsilon_at(k))
        if result.counterexample:
            buffer.add(result.trace, "episode-violation", spec)
            snapshot = result.trace.snapshot(0)
            actions = result.trace.meta.get("actions", (0,))
            first_action = int(actions[0]) if actions else 0
            for candidate in generate_counterexamples(
                env, snapshot, first_action, spec, cfg.perturbation
            ):
                buffer.add(candidate, "perturbation-synthesized", spec)

        row = EpisodeRow(
            episode=k,
            success=result.effect_robustness > 0,
            cumulative_reward=result.cumulative_reward,
            effect_robustness=result.effect_robustness,
            counterexamples=buffer.total_added,
            theta=tuple(theta),
        )
        if len(buffer) > 0 and k % cfg.sne_every == 0:
            scores = evaluate_sne(
                buffer, spec, env, cfg.sne_iterations, cfg.eps_d1, cfg.eps_d2,
                stream(cfg.seed, f"sne/{k}"),
            )
            objective = objective_J(scores, cfg.lambda_s, cfg.lambda_n)
            gp.add(theta, objective)
            theta = propose_theta(gp, template.bounds(), schedule, k, stream(cfg.seed, f"propose/{k}"))
            spec = CausalSpec(template.instantiate(theta), effect, template, tuple(theta))
            row.scores = scores
            row.objective = objective
            record.gp_log.append(
                GpLogRow(k, tuple(theta), scores, objective, ucb_value(gp, theta, schedule, k))
            )
        record.rows.append(row)

    mined = recommend_theta(gp)
    if mined is None:
        mined = theta
    record.mined_formula = format_formula(template.instantiate(mined))
    record.final_theta = tuple(theta)
    record.qtable_lines = table.checkpoint_lines()
    record.update_count = table.update_count
    return record


def run_baseline(cfg: RunConfig, env: Environment | None = None) -> RunRecord:
    """Raw-reward Q-learning, optionally with one-step counterfactual
    updates for every action not taken."""
    cfg.validate()
    if cfg.method not in ("standard_rl", "counterfactual_rl"):
        raise ValueError(f"not a baseline method: {cfg.method!r}")
    before = instrumentation.snapshot()
    if env is None:
        env = _build_env(cfg)
    table = QTable(env.action_count)
    hypothetical = cfg.method == "counterfactual_rl"
    record = RunRecord(config=cfg)

    from .qlearning import q_update

    for k in range(cfg.episodes):
        rng = stream(cfg.seed, f"episode/{k}")
        epsilon = cfg.rl.epsilon_at(k)
        observation = env.reset(int(rng.integers(0, 2**31 - 1)))
        state = TauState.initial(1, observation)
        total = 0.0
        for _ in range(cfg.rl.horizon):
            action = select_action(table, state, epsilon, rng)
            pre = env.clone() if hypothetical else None
            observation = env.step(action)
            next_state = state.push(observation)
            reward = env.raw_reward()
            q_update(table, state, action, reward, next_state, cfg.rl)
            total += reward
            if hypothetical:
                for other in range(env.action_count):
                    if other == action:
                        continue
                    sim = pre.clone()
                    sim.step(other)
                    hyp_state = state.push(sim.current_snapshot())
                    q_update(table, state, other, sim.raw_reward(), hyp_state, cfg.rl)
            state = next_state
        record.rows.append(
            EpisodeRow(
                episode=k,
                success=env.episode_success(),
                cumulative_reward=total,
            )
        )
    record.qtable_lines = table.checkpoint_lines()
    record.update_count = table.update_count
    record.counter_delta = instrumentation.delta(before)
    return record


def run(cfg: RunConfig, env: Environment | None = None) -> RunRecord:
    if cfg.method == "gtl_cirl":
        return run_gtl_cirl(cfg, env)
    return run_baseline(cfg, env)


# -- result emission ----------------------------------------------------------


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.6f}"


def emit_results(record: RunRecord, out_dir: str | Path) -> list[Path]:
    """Write episodes.csv, qtable.txt, and (for the closed loop) the mined
    formula and optimizer log; figures render alongside when enabled."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    slot_names = [s.name for s in record.config.slots]

    episodes = out / "episodes.csv"
    header = (
        ["episode", "success", "cumulative_reward", "effect_robustness", "counterexamples"]
        + [f"theta_{name}" for name in slot_names]
        + ["S", "N", "E", "J"]
    )
    lines = [",".join(header)]
    for row in record.rows:
        theta = row.theta if row.theta is not None else [None] * len(slot_names)
        scores = row.scores
        cells = [
            str(row.episode),
            "1" if row.success else "0",
            _fmt(row.cumulative_reward),
            _fmt(row.effect_robustness),
            str(row.counterexamples),
            *[_fmt(v) for v in theta],
            _fmt(scores.sufficiency if scores else None),
            _fmt(scores.necessity if scores else None),
            _fmt(scores.existence if scores else None),
            _fmt(row.objective),
        ]
        lines.append(",".join(cells))
    episodes.write_text("\n".join(lines) + "\n")
    written.append(episodes)

    qtable = out / "qtable.txt"
    qtable.write_text("\n".join(record.qtable_lines) + ("\n" if record.qtable_lines else ""))
    written.append(qtable)

    if record.mined_formula is not None:
        mined = out / "mined_formula.txt"
        mined.write_text(record.mined_formula + "\n")
        written.append(mined)

    if record.gp_log:
        gp_log = out / "gp_log.csv"
        dim = len(record.gp_log[0].theta)
        header = ["iter"] + [f"theta_{i + 1}" for i in range(dim)] + ["S", "N", "E", "J", "ucb_value"]
        rows = [",".join(header)]
        for entry in record.gp_log:
            rows.append(
                ",".join(
                    [str(entry.iteration)]
                    + [_fmt(v) for v in entry.theta]
                    + [
                        _fmt(entry.scores.sufficiency),
                        _fmt(entry.scores.necessity),
                        _fmt(entry.scores.existence),
                        _fmt(entry.objective),
                        _fmt(entry.ucb),
                    ]
                )
            )
        gp_log.write_text("\n".join(rows) + "\n")
        written.append(gp_log)

    if record.config.figures:
        from .plots import save_learning_curve

        figures = out / "figures"
        figures.mkdir(exist_ok=True)
        curve = figures / "learning_curve.png"
        save_learning_curve(record, curve)
        written.append(curve)
    return written


@dataclass
class SweepSummary:
    method: str
    environment: str
    seeds: tuple[int, ...]
    success_rates: tuple[float, ...]
    final_window_rates: tuple[float, ...]

    @property
    def mean_success(self) -> float:
        return float(np.mean(self.success_rates))

    @property
    def std_success(self) -> float:
        return float(np.std(self.success_rates))

    @property
    def mean_final(self) -> float:
        return float(np.mean(self.final_window_rates))

    @property
    def std_final(self) -> float:
        return float(np.std(self.final_window_rates))


def sweep(
    cfg: RunConfig,
    seeds: list[int],
    methods: list[str] | None = None,
    out_dir: str | Path | None = None,
    emit: bool = True,
) -> tuple[list[SweepSummary], dict[str, list[RunRecord]]]:
    """Independent runs across seeds (and optionally methods).

    Each run gets isolated state and its own labeled streams; results
    land under ``out/<method>/seed_<n>/`` with a cross-method summary and
    comparison figure at the root.
    """
    methods = methods or [cfg.method]
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    summaries: list[SweepSummary] = []
    all_records: dict[str, list[RunRecord]] = {}
    for method in methods:
        records = []
        for seed in seeds:
            run_cfg = replace(cfg, method=method, seed=seed)
            record = run(run_cfg)
            if emit:
                emit_results(record, out / method / f"seed_{seed:03d}")
            records.append(record)
        all_records[method] = records
        summaries.append(
            SweepSummary(
                method=method,
                environment=cfg.environment,
                seeds=tuple(seeds),
                success_rates=tuple(r.success_rate for r in records),
                final_window_rates=tuple(r.final_window_success() for r in records),
            )
        )
    if emit:
        write_summary(summaries, out / "summary.csv")
        if cfg.figures:
            from .plots import save_success_comparison

            figures = out / "figures"
            figures.mkdir(parents=True, exist_ok=True)
            save_success_comparison(all_records, figures / "success_rate.png")
    return summaries, all_records


def write_summary(summaries: list[SweepSummary], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,environment,seeds,mean_success,std_success,final50_mean,final50_std"]
    for s in summaries:
        lines.append(
            ",".join(
                [
                    s.method,
                    s.environment,
                    str(len(s.seeds)),
                    f"{s.mean_success:.6f}",
                    f"{s.std_success:.6f}",
                    f"{s.mean_final:.6f}",
                    f"{s.std_final:.6f}",
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")
