"""Parameter sweeps over the (lambda, kappa) plane with a stable CSV contract.

A sweep is configured by a flat key=value text file, runs one cell per
(lambda, kappa) pair, and classifies each cell from the epidemic counts.
Replica seeds are derived from (master seed, cell index, replica index), so
any cell can be reproduced in isolation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from random import Random
from typing import Optional

from .cpef import DEFAULT_NODE_CAP, run_cpef
from .explore import run_exploration_trajectory
from .randutil import derive_seed
from .simcore import DEFAULT_EVENT_BUDGET, Params, run_trajectory

__all__ = [
    "SweepConfig",
    "CellResult",
    "CSV_COLUMNS",
    "GRAPH_MODELS",
    "classify_cell",
    "parse_grid",
    "parse_config",
    "emit_config",
    "run_sweep",
    "emit_csv",
]

GRAPH_MODELS = ("adaptive", "nonadaptive", "exploration")
ALL_MODELS = GRAPH_MODELS + ("cpef",)

CSV_COLUMNS = ("model", "beta", "n", "epsilon", "lambda", "kappa", "samples",
               "epidemics", "p_hat", "stderr", "classification",
               "mean_ever_infected", "budget_hits", "seed")

# evidence threshold: p_hat must clear this many standard errors of zero
EVIDENCE_Z = 2.0
MIN_SAMPLES_FOR_ABSENCE = 100


@dataclass(frozen=True)
class SweepConfig:
    model: str
    beta: float
    lam_values: tuple
    kappa_values: tuple
    samples: int
    seed: int
    n: Optional[int] = None
    epsilon: Optional[float] = None
    event_budget: int = DEFAULT_EVENT_BUDGET
    cpef_total_cap: int = 10**4
    cpef_meta_cap: int = 10**4
    cpef_node_cap: int = DEFAULT_NODE_CAP

    def __post_init__(self):
        if self.model not in ALL_MODELS:
            raise ValueError(f"model must be one of {ALL_MODELS}")
        if self.model in GRAPH_MODELS:
            if self.n is None or self.epsilon is None:
                raise ValueError("graph models need n and epsilon")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.lam_values or not self.kappa_values:
            raise ValueError("empty parameter grid")


@dataclass(frozen=True)
class CellResult:
    model: str
    beta: float
    n: Optional[int]
    epsilon: Optional[float]
    lam: float
    kappa: float
    samples: int
    epidemics: int
    p_hat: float
    stderr: float
    classification: str
    mean_ever_infected: float
    budget_hits: int
    seed: int


def classify_cell(epidemics: int, samples: int) -> str:
    """Three-way call per cell; 'undetermined' whenever neither side is clear.

    A handful of hits out of few samples is not positive evidence (the
    normal-approximation interval still covers zero), and zero hits only
    counts as absence with enough samples behind it.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p_hat = epidemics / samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / samples)
    if epidemics > 0 and p_hat - EVIDENCE_Z * stderr > 0.0:
        return "supercritical_evidence"
    if epidemics == 0 and samples >= MIN_SAMPLES_FOR_ABSENCE:
        return "subcritical_evidence"
    return "undetermined"


def parse_grid(text: str) -> tuple:
    """Grid syntax: 'a:b:step' (inclusive), 'x,y,z', or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range needs start:stop:step, got {text!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be > 0")
        if b < a:
            raise ValueError("grid stop below start")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(a + i * step for i in range(count))
    if "," in text:
        return tuple(float(p) for p in text.split(","))
    return (float(text),)


_INT_KEYS = {"n", "samples", "seed", "event_budget", "cpef_total_cap",
             "cpef_meta_cap", "cpef_node_cap"}
_FLOAT_KEYS = {"beta", "epsilon"}
_GRID_KEYS = {"lambda", "kappa"}
_STR_KEYS = {"model"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _GRID_KEYS | _STR_KEYS


def parse_config(text: str) -> SweepConfig:
    """Parse the flat key=value format; '#' and blank lines are skipped.

    Unknown keys, repeated keys, and malformed lines fail loudly with the
    offending key and line number in the message.
    """
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed line {lineno}: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ValueError(f"unknown key {key!r} on line {lineno}")
        if key in seen:
            raise ValueError(f"repeated key {key!r} on line {lineno}")
        try:
            if key in _INT_KEYS:
                parsed = int(value)
            elif key in _FLOAT_KEYS:
                parsed = float(value)
            elif key in _GRID_KEYS:
                parsed = parse_grid(value)
            else:
                parsed = value
        except ValueError as exc:
            raise ValueError(
                f"bad value for {key!r} on line {lineno}: {value!r}") from exc
        seen[key] = parsed

    for required in ("model", "beta", "lambda", "kappa", "samples", "seed"):
        if required not in seen:
            raise ValueError(f"missing required key {required!r}")

    kwargs = dict(
        model=seen["model"],
        beta=seen["beta"],
        lam_values=seen["lambda"],
        kappa_values=seen["kappa"],
        samples=seen["samples"],
        seed=seen["seed"],
    )
    for key in ("n", "epsilon", "event_budget", "cpef_total_cap",
                "cpef_meta_cap", "cpef_node_cap"):
        if key in seen:
            kwargs[key] = seen[key]
    return SweepConfig(**kwargs)


def _fmt(x: float) -> str:
    return "%.17g" % x


def emit_config(config: SweepConfig) -> str:
    """Canonical text form; parse(emit(parse(s))) == parse(s)."""
    lines = [f"model={config.model}", f"beta={_fmt(config.beta)}"]
    if config.n is not None:
        lines.append(f"n={config.n}")
    if config.epsilon is not None:
        lines.append(f"epsilon={_fmt(config.epsilon)}")
    lines.append("lambda=" + ",".join(_fmt(v) for v in config.lam_values))
    lines.append("kappa=" + ",".join(_fmt(v) for v in config.kappa_values))
    lines.append(f"samples={config.samples}")
    lines.append(f"seed={config.seed}")
    lines.append(f"event_budget={config.event_budget}")
    lines.append(f"cpef_total_cap={config.cpef_total_cap}")
    lines.append(f"cpef_meta_cap={config.cpef_meta_cap}")
    lines.append(f"cpef_node_cap={config.cpef_node_cap}")
    return "\n".join(lines) + "\n"


def _run_cell(config: SweepConfig, lam: float, kappa: float,
              cell_index: int) -> CellResult:
    epidemics = 0
    budget_hits = 0
    ever_total = 0.0
    if config.model in GRAPH_MODELS:
        params = Params(n=config.n, beta=config.beta, lam=lam, kappa=kappa,
                        epsilon=config.epsilon)
    for rep in range(config.samples):
        rng = Random(derive_seed(config.seed, cell_index, rep))
        if config.model == "cpef":
            out = run_cpef(lam, config.beta, kappa, rng,
                           total_infected_cap=config.cpef_total_cap,
                           max_hosts=config.cpef_meta_cap,
                           node_cap=config.cpef_node_cap,
                           max_events_per_host=config.event_budget)
            hit = out.termination == "budget_exceeded"
            epidemics += hit
            budget_hits += hit
            ever_total += out.total_ever_infected
        else:
            if config.model == "exploration":
                stats = run_exploration_trajectory(
                    params, rng=rng, max_events=config.event_budget)
            else:
                stats = run_trajectory(params, config.model, rng=rng,
                                       max_events=config.event_budget)
            epidemics += stats.termination == "epidemic"
            budget_hits += stats.termination == "budget_exceeded"
            ever_total += stats.ever_infected
    p_hat = epidemics / config.samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / config.samples)
    return CellResult(
        model=config.model,
        beta=config.beta,
        n=config.n if config.model in GRAPH_MODELS else None,
        epsilon=config.epsilon if config.model in GRAPH_MODELS else None,
        lam=lam,
        kappa=kappa,
        samples=config.samples,
        epidemics=epidemics,
        p_hat=p_hat,
        stderr=stderr,
        classification=classify_cell(epidemics, config.samples),
        mean_ever_infected=ever_total / config.samples,
        budget_hits=budget_hits,
        seed=config.seed,
    )


def run_sweep(config: SweepConfig, progress=None) -> list:
    """Run every (lambda, kappa) cell; lambda is the outer loop.

    progress, if given, is called as progress(done_cells, total_cells) after
    each cell.
    """
    results = []
    total = len(config.lam_values) * len(config.kappa_values)
    cell_index = 0
    for lam in config.lam_values:
        for kappa in config.kappa_values:
            results.append(_run_cell(config, lam, kappa, cell_index))
            cell_index += 1
            if progress is not None:
                progress(cell_index, total)
    return results


def emit_csv(results: list, config: SweepConfig, out) -> None:
    """Write the sweep CSV: '#' comment preamble, header, one row per cell.

    Floats use repr-faithful %.17g; n and epsilon are left empty on rows
    where they do not apply.  out is a path or a text file object.
    """
    close = False
    if isinstance(out, (str, bytes)):
        out = open(out, "w", encoding="utf-8", newline="\n")
        close = True
    try:
        out.write("# parameter sweep over (lambda, kappa)\n")
        for line in emit_config(config).splitlines():
            out.write(f"# {line}\n")
        if config.model == "cpef":
            out.write("# cpef: p_hat is the budget-survival proxy; "
                      "n and epsilon do not apply\n")
        out.write(",".join(CSV_COLUMNS) + "\n")
        for r in results:
            row = [
                r.model,
                _fmt(r.beta),
                "" if r.n is None else str(r.n),
                "" if r.epsilon is None else _fmt(r.epsilon),
                _fmt(r.lam),
                _fmt(r.kappa),
                str(r.samples),
                str(r.epidemics),
                _fmt(r.p_hat),
                _fmt(r.stderr),
                r.classification,
                _fmt(r.mean_ever_infected),
                str(r.budget_hits),
                str(r.seed),
            ]
            out.write(",".join(row) + "\n")
    finally:
        if close:
            out.close()


def sweep_csv_text(results: list, config: SweepConfig) -> str:
    buf = io.StringIO()
    emit_csv(results, config, buf)
    return buf.getvalue()
