"""Run configuration: embedded defaults plus flat key=value INI files.

A configuration file holds one section per subsystem; every key has an
embedded default, so a file only states overrides.  Cause templates are
declared as a skeleton formula string with ``${slot}`` placeholders and
one ``slot.<name> = <kind> <lower> <upper>`` entry per parameter, in
optimization order.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .causal import CauseTemplate, Slot
from .formulas import Formula, horizon
from .parsing import parse_formula
from .qlearning import RlConfig

ENVIRONMENTS = ("gene", "grid")
METHODS = ("gtl_cirl", "standard_rl", "counterfactual_rl")


class ConfigError(ValueError):
    """Raised for invalid or inconsistent run configurations."""


@dataclass(frozen=True)
class GpConfig:
    length_scale: float = 0.2
    noise_variance: float = 1e-4
    ucb_c: float = 2.0


@dataclass(frozen=True)
class RunConfig:
    environment: str = "gene"
    method: str = "gtl_cirl"
    episodes: int = 300
    seed: int = 0
    out_dir: str = "results"
    figures: bool = True
    effect_text: str = "F[12,15](DiseaseProgression < 0.25)"
    skeleton: str = ""
    slots: tuple[Slot, ...] = ()
    theta0: tuple[float, ...] = ()
    rl: RlConfig = field(default_factory=RlConfig)
    lambda_s: float = 1.0
    lambda_n: float = 1.0
    eps_d1: float = 0.05
    eps_d2: float = 0.05
    sne_iterations: int = 20
    sne_every: int = 1
    perturbation: float | None = None
    buffer_capacity: int = 256
    gp: GpConfig = field(default_factory=GpConfig)
    env_params: dict = field(default_factory=dict)

    def template(self) -> CauseTemplate:
        return CauseTemplate(self.skeleton, self.slots)

    def effect(self) -> Formula:
        return parse_formula(self.effect_text)

    def validate(self) -> None:
        if self.environment not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment {self.environment!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if self.sne_every < 1:
            raise ConfigError("sne_every must be >= 1")
        if self.sne_iterations < 1:
            raise ConfigError("sne_iterations must be >= 1")
        if self.buffer_capacity < 1:
            raise ConfigError("buffer_capacity must be >= 1")
        template = self.template()  # raises on slot/skeleton mismatches
        if len(self.theta0) != template.dimension:
            raise ConfigError(
                f"theta0 has {len(self.theta0)} entries for {template.dimension} slots"
            )
        cause = template.instantiate(self.theta0)
        effect = self.effect()
        # Cause and effect windows are absolute within an episode, so each
        # must fit the horizon independently.
        if max(horizon(cause), horizon(effect)) > self.rl.horizon:
            raise ConfigError("formula look-ahead exceeds the episode horizon")


_GENE_SKELETON = (
    "G[0,10]((G1 >= 0.5) & (G2 >= 0.5) & (G4 >= 0.5) & (G3 < 0.5))"
    " & E1{conn>0}((G1 >= 0.5) | (G2 >= 0.5) | (G4 >= 0.5))"
    " & F[${w1},${w1+3}](ModifyG1 >= 0.5)"
    " & F[${w2},${w2+3}](ModifyG2 >= 0.5)"
    " & F[${w3},${w3+3}](ModifyG4 >= 0.5)"
)

_GRID_SKELETON = "G[0,0](V < ${vth}) & !E1{P>0}(V >= ${vth})"


def default_config(environment: str = "gene") -> RunConfig:
    """Built-in defaults for one of the two environments."""
    if environment == "gene":
        return RunConfig(
            environment="gene",
            effect_text="F[12,15](DiseaseProgression < 0.25)",
            skeleton=_GENE_SKELETON,
            slots=(
                Slot("w1", "window_lo", 0.0, 12.0),
                Slot("w2", "window_lo", 0.0, 12.0),
                Slot("w3", "window_lo", 0.0, 12.0),
            ),
            theta0=(6.0, 6.0, 6.0),
            rl=RlConfig(horizon=16),
        )
    if environment == "grid":
        return RunConfig(
            environment="grid",
            effect_text="F[1,5](G >= 0.5)",
            skeleton=_GRID_SKELETON,
            slots=(Slot("vth", "threshold", 0.80, 1.00),),
            theta0=(0.90,),
            rl=RlConfig(horizon=20),
            # The forcing margin is 0.02, so the partition thresholds must
            # sit below it or every counterfactual lands in neither bucket.
            eps_d1=0.01,
            eps_d2=0.01,
        )
    raise ConfigError(f"unknown environment {environment!r}")


def _parse_slot(name: str, text: str) -> Slot:
    parts = text.split()
    if len(parts) != 3:
        raise ConfigError(f"slot {name}: expected '<kind> <lower> <upper>', got {text!r}")
    kind, lower, upper = parts
    return Slot(name, kind, float(lower), float(upper))


def load_config(path: str | Path) -> RunConfig:
    """Parse an INI file, overriding the environment's defaults."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read configuration file {path}")

    environment = parser.get("run", "environment", fallback="gene")
    cfg = default_config(environment)

    if parser.has_section("run"):
        run = parser["run"]
        cfg = replace(
            cfg,
            method=run.get("method", cfg.method),
            episodes=run.getint("episodes", cfg.episodes),
            seed=run.getint("seed", cfg.seed),
            out_dir=run.get("out", cfg.out_dir),
            figures=run.getboolean("figures", cfg.figures),
            effect_text=run.get("effect", cfg.effect_text),
        )
    if parser.has_section("rl"):
        rl = parser["rl"]
        cfg = replace(
            cfg,
            rl=RlConfig(
                alpha=rl.getfloat("alpha", cfg.rl.alpha),
                gamma=rl.getfloat("gamma", cfg.rl.gamma),
                beta=rl.getfloat("beta", cfg.rl.beta),
                epsilon_start=rl.getfloat("epsilon_start", cfg.rl.epsilon_start),
                epsilon_decay=rl.getfloat("epsilon_decay", cfg.rl.epsilon_decay),
                epsilon_floor=rl.getfloat("epsilon_floor", cfg.rl.epsilon_floor),
                episodes=cfg.episodes,
                horizon=rl.getint("horizon", cfg.rl.horizon),
                alpha_schedule=rl.get("alpha_schedule", cfg.rl.alpha_schedule),
            ),
        )
    if parser.has_section("template"):
        section = parser["template"]
        skeleton = section.get("skeleton", cfg.skeleton)
        slot_items = [
            (key[len("slot."):], value)
            for key, value in section.items()
            if key.startswith("slot.")
        ]
        slots = tuple(_parse_slot(name, value) for name, value in slot_items) or cfg.slots
        theta0 = cfg.theta0
        if section.get("theta0"):
            theta0 = tuple(float(x) for x in section.get("theta0").split())
        cfg = replace(cfg, skeleton=skeleton, slots=slots, theta0=theta0)
    if parser.has_section("causal"):
        causal = parser["causal"]
        cfg = replace(
            cfg,
            lambda_s=causal.getfloat("lambda_s", cfg.lambda_s),
            lambda_n=causal.getfloat("lambda_n", cfg.lambda_n),
            eps_d1=causal.getfloat("eps_d1", cfg.eps_d1),
            eps_d2=causal.getfloat("eps_d2", cfg.eps_d2),
            sne_iterations=causal.getint("iterations", cfg.sne_iterations),
            sne_every=causal.getint("refine_every", cfg.sne_every),
        )
    if parser.has_section("gp"):
        gp = parser["gp"]
        cfg = replace(
            cfg,
            gp=GpConfig(
                length_scale=gp.getfloat("length_scale", cfg.gp.length_scale),
                noise_variance=gp.getfloat("noise_variance", cfg.gp.noise_variance),
                ucb_c=gp.getfloat("ucb_c", cfg.gp.ucb_c),
            ),
        )
    if parser.has_section("counterexample"):
        ce = parser["counterexample"]
        perturbation = cfg.perturbation
        if ce.get("perturbation"):
            perturbation = ce.getfloat("perturbation")
        cfg = replace(
            cfg,
            perturbation=perturbation,
            buffer_capacity=ce.getint("buffer_capacity", cfg.buffer_capacity),
        )
    if parser.has_section("environment"):
        env_params = dict(cfg.env_params)
        for key, value in parser["environment"].items():
            try:
                env_params[key] = int(value)
            except ValueError:
                env_params[key] = float(value)
        cfg = replace(cfg, env_params=env_params)

    cfg = replace(cfg, rl=replace(cfg.rl, episodes=cfg.episodes))
    cfg.validate()
    return cfg
