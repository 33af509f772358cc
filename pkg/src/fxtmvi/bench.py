"""Experiment harness: example problems, reference oracle, sweeps, CSV logs."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .core import (
    DiscretizationParams,
    FlowParams,
    MviProblem,
    NoConvergenceError,
    NonFiniteError,
    RunLog,
    as_vector,
)
from .flow import ModifiedRhs, NominalRhs, prox_grad_map, solve
from .operators import (
    Dataset,
    elasticnet_logistic_operator,
    example1_operator,
    generate_dataset,
    sample_rng,
)
from .prox import ball_indicator, l1_penalty

__all__ = [
    "ExperimentConfig",
    "ExperimentPreset",
    "ExperimentResult",
    "build_example1",
    "build_example2",
    "emit_csv",
    "load_run_csv",
    "reference_solution",
    "run_experiment",
    "run_metadata",
    "sample_initial_points",
    "with_reference",
    "write_metadata",
]

X0_BOX_HALFWIDTH = 10.0  # initial conditions are drawn uniform on [-10, 10]^n

# Stock dataset for the regression example.  Seed 1 gives a solution with
# one active coordinate and two thresholded to exactly zero, so runs
# exercise both convergence modes.
DEFAULT_DATASET_SEED = 1

CSV_HEADER = "k,t,residual,error,lyapunov"


@dataclass(frozen=True)
class ExperimentPreset:
    """A ready-to-run problem with its stock parameters.

    ``paper_step_budget`` and ``paper_settle_bound`` are reported literals
    from the source experiments, kept as external budgets to test against;
    they are not derivable from the carried constants (see the bounds
    command, which prints both the derived and the reported numbers).
    """

    name: str
    problem: MviProblem
    flow: FlowParams
    disc: DiscretizationParams
    paper_step_budget: int | None = None
    paper_settle_bound: float | None = None
    paper_solution: np.ndarray | None = None
    dataset: Dataset | None = None


def build_example1() -> ExperimentPreset:
    """Planar ball-constrained problem with a strongly pseudomonotone operator.

    Constants: modulus 11 (pseudomonotonicity), Lipschitz 5, prox step 0.44,
    gains 20/20, exponents 0.8/1.2, time step 1e-4.  The stock stopping
    residual is sized so that termination certifies an error below 1e-6.
    """
    problem = MviProblem(
        operator=example1_operator,
        prox=ball_indicator([2.0, 2.0], 1.0),
        mu=11.0,
        lip=5.0,
        monotonicity="strong_pseudo",
    )
    flow = FlowParams(lam=0.44, kappa1=20.0, kappa2=20.0, alpha1=0.8, alpha2=1.2)
    c = analysis.contraction_factor(problem.mu, problem.lip, flow.lam)
    disc = DiscretizationParams(
        eta=1e-4,
        max_steps=1_402_000,
        stop_residual=(1.0 - c) * 1e-6,
    )
    return ExperimentPreset(
        name="example1",
        problem=problem,
        flow=flow,
        disc=disc,
        paper_step_budget=1_402_000,
        paper_solution=as_vector([2.707, 2.707]),
    )


def build_example2(seed: int = DEFAULT_DATASET_SEED) -> ExperimentPreset:
    """Elastic-net logistic regression on a generated dataset.

    Constants: l1 weight 2.5, ridge weight 0.25, modulus and Lipschitz both
    0.5, prox step 0.005, gains 20/200, exponents 0.97/1.03, time step 1e-4.
    The effective soft threshold inside the prox-gradient map is
    ``lam * 2.5 = 0.0125``.  The stock stopping residual certifies an error
    below 1e-5 at termination.
    """
    dataset = generate_dataset(seed, n=100, d=3)
    problem = MviProblem(
        operator=elasticnet_logistic_operator(dataset, beta2=0.25),
        prox=l1_penalty(2.5),
        mu=0.5,
        lip=0.5,
    )
    flow = FlowParams(lam=0.005, kappa1=20.0, kappa2=200.0, alpha1=0.97, alpha2=1.03)
    c = analysis.contraction_factor(problem.mu, problem.lip, flow.lam)
    disc = DiscretizationParams(
        eta=1e-4,
        max_steps=200_000,
        stop_residual=(1.0 - c) * 1e-5,
    )
    return ExperimentPreset(
        name="example2",
        problem=problem,
        flow=flow,
        disc=disc,
        paper_step_budget=80_600,
        paper_settle_bound=8.06,
        dataset=dataset,
    )


def reference_solution(
    problem: MviProblem,
    lam: float,
    tol: float = 1e-13,
    max_iter: int = 10**8,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve by iterating the prox-gradient map to a tiny fixed-point residual.

    With ``lam`` inside its certified window the map is a contraction, so
    this plain fixed-point iteration converges linearly from any start and
    is independent of the dynamics it later judges.  Raises
    ``NoConvergenceError`` if the cap is hit.
    """
    if x0 is None:
        if problem.reference_solution is None:
            raise ValueError("supply x0: cannot infer the problem dimension")
        x = np.zeros(problem.reference_solution.shape[0])
    else:
        x = np.array(as_vector(x0))
    for _ in range(max_iter):
        y = prox_grad_map(problem, lam, x)
        d = x - y
        if math.sqrt(float(d @ d)) < tol:
            y.flags.writeable = False
            return y
        x = y
    raise NoConvergenceError(
        f"fixed-point iteration did not reach residual {tol:g} "
        f"within {max_iter} iterations"
    )


def with_reference(problem: MviProblem, reference: np.ndarray) -> MviProblem:
    """Copy of ``problem`` carrying ``reference`` as its known solution."""
    return dataclasses.replace(problem, reference_solution=reference)


def sample_initial_points(seed: int, count: int, dim: int) -> list[np.ndarray]:
    """Deterministic initial conditions, uniform on the stock box."""
    rng = sample_rng(seed)
    return [
        rng.uniform(-X0_BOX_HALFWIDTH, X0_BOX_HALFWIDTH, dim) for _ in range(count)
    ]


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment batch.

    ``experiment`` selects a preset (``example1``/``example2``) or
    ``custom``, which requires ``problem``.  ``flow``/``disc`` override the
    preset defaults wholesale when given.  Runs start from ``x0_list`` if
    nonempty, otherwise from ``n_runs`` points sampled with ``seed``.

    ``sweep_axis`` in ``{"eta", "xi", "x0"}`` expands the batch: one run per
    sweep value (for ``x0`` the single value is the number of sampled
    starts).  An eta sweep holds the total model-time horizon and the
    record spacing in ``t`` fixed by rescaling ``max_steps`` and the record
    stride per run.

    ``nominal_kappa`` switches the dynamics to the constant-gain flow.
    """

    experiment: str = "example1"
    seed: int = 0
    n_runs: int = 1
    x0_list: tuple = ()
    flow: FlowParams | None = None
    disc: DiscretizationParams | None = None
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    output_dir: str | Path | None = None
    record_every: int = 100
    record_states: bool = False
    clamp_step: float | None = None
    nominal_kappa: float | None = None
    dataset_seed: int | None = None
    compute_reference: bool = True
    problem: MviProblem | None = None

    def __post_init__(self):
        if self.experiment not in ("example1", "example2", "custom"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.experiment == "custom" and self.problem is None:
            raise ValueError("custom experiments must supply a problem")
        if self.sweep_axis is not None:
            if self.sweep_axis not in ("eta", "xi", "x0"):
                raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ValueError("sweep requires at least one value")
        if not self.x0_list and self.n_runs < 1:
            raise ValueError("need x0_list or a positive n_runs")
        object.__setattr__(
            self, "x0_list", tuple(as_vector(x) for x in self.x0_list)
        )


@dataclass(frozen=True)
class ExperimentResult:
    """Batch outcome: labeled run logs, certificate, and per-run failures."""

    runs: tuple[tuple[str, RunLog], ...]
    certificate: analysis.ConvergenceCertificate | None
    failures: tuple[tuple[str, str], ...]
    problem: MviProblem
    flow: FlowParams
    disc: DiscretizationParams
    reference: np.ndarray | None

    def log(self, label: str) -> RunLog:
        for name, run in self.runs:
            if name == label:
                return run
        raise KeyError(label)


def _problem_dimension(
    problem: MviProblem,
    preset: ExperimentPreset | None,
    cfg: "ExperimentConfig | None" = None,
) -> int:
    if cfg is not None and cfg.x0_list:
        return cfg.x0_list[0].shape[0]
    if problem.reference_solution is not None:
        return problem.reference_solution.shape[0]
    if preset is not None:
        if preset.dataset is not None:
            return preset.dataset.dim
        if preset.name == "example1":
            return 2
    raise ValueError("cannot infer dimension; pass explicit x0_list")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute a configured batch; persist logs when an output dir is set.

    Individual solver failures do not abort the batch: the failing label
    and error are collected in ``failures`` and remaining runs proceed.
    """
    preset = None
    if cfg.experiment == "example1":
        preset = build_example1()
        problem = preset.problem
    elif cfg.experiment == "example2":
        preset = (
            build_example2(cfg.dataset_seed)
            if cfg.dataset_seed is not None
            else build_example2()
        )
        problem = preset.problem
    else:
        problem = cfg.problem

    flow = cfg.flow if cfg.flow is not None else (preset.flow if preset else None)
    disc = cfg.disc if cfg.disc is not None else (preset.disc if preset else None)
    if flow is None or disc is None:
        raise ValueError("custom experiments must supply flow and disc parameters")

    reference = problem.reference_solution
    if cfg.compute_reference and reference is None:
        dim = _problem_dimension(problem, preset, cfg)
        reference = reference_solution(problem, flow.lam, x0=np.zeros(dim))
    if reference is not None:
        problem = with_reference(problem, reference)

    cert = None
    if problem.mu is not None and problem.lip is not None:
        cert = analysis.certificate(problem, flow, disc)

    n_runs = cfg.n_runs
    sweep_axis = cfg.sweep_axis
    sweep_values = cfg.sweep_values
    if sweep_axis == "x0":
        n_runs = int(sweep_values[0])
        sweep_axis, sweep_values = None, ()

    if cfg.x0_list:
        x0s = list(cfg.x0_list)
    else:
        dim = _problem_dimension(problem, preset, cfg)
        x0s = sample_initial_points(cfg.seed, n_runs, dim)

    jobs: list[tuple[str, FlowParams, DiscretizationParams, int, np.ndarray]] = []
    if sweep_axis is None:
        for i, x0 in enumerate(x0s):
            jobs.append((f"x0_{i}", flow, disc, cfg.record_every, x0))
    elif sweep_axis == "eta":
        base_eta = disc.eta
        for value in sweep_values:
            scaled = dataclasses.replace(
                disc,
                eta=value,
                max_steps=math.ceil(disc.max_steps * base_eta / value),
            )
            stride = max(1, round(cfg.record_every * base_eta / value))
            jobs.append((f"eta_{value:g}", flow, scaled, stride, x0s[0]))
    elif sweep_axis == "xi":
        for value in sweep_values:
            a1, a2 = analysis.exponents_from_xi(value)
            jobs.append(
                (
                    f"xi_{value:g}",
                    dataclasses.replace(flow, alpha1=a1, alpha2=a2),
                    disc,
                    cfg.record_every,
                    x0s[0],
                )
            )

    runs: list[tuple[str, RunLog]] = []
    failures: list[tuple[str, str]] = []
    for label, job_flow, job_disc, stride, x0 in jobs:
        rhs = (
            NominalRhs(kappa=cfg.nominal_kappa, lam=job_flow.lam)
            if cfg.nominal_kappa is not None
            else ModifiedRhs(job_flow)
        )
        try:
            log = solve(
                problem,
                rhs,
                job_disc,
                x0,
                record_every=stride,
                record_states=cfg.record_states,
                clamp_step=cfg.clamp_step,
            )
        except (NonFiniteError, NoConvergenceError) as err:
            failures.append((label, f"{type(err).__name__}: {err}"))
            continue
        runs.append((label, log))

    result = ExperimentResult(
        runs=tuple(runs),
        certificate=cert,
        failures=tuple(failures),
        problem=problem,
        flow=flow,
        disc=disc,
        reference=reference,
    )
    if cfg.output_dir is not None:
        persist_result(result, cfg, Path(cfg.output_dir))
    return result


# ---------------------------------------------------------------------------
# persistence

def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def emit_csv(log: RunLog, path: str | Path) -> None:
    """Write the per-iterate table: ``k,t,residual,error,lyapunov``.

    17-significant-digit decimal floats, LF line endings, blank error and
    Lyapunov cells when the run had no reference solution.  Output is
    byte-stable across runs for identical logs.
    """
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for rec in log.records:
                err = "" if rec.error is None else _fmt(rec.error)
                lya = "" if rec.lyapunov is None else _fmt(rec.lyapunov)
                fh.write(
                    f"{rec.k},{_fmt(rec.t)},{_fmt(rec.residual)},{err},{lya}\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write run log to {path}: {exc}") from exc


def load_run_csv(path: str | Path) -> list[dict]:
    """Parse a file written by ``emit_csv`` back into row dictionaries."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            k, t, residual, error, lyapunov = line.rstrip("\n").split(",")
            rows.append(
                {
                    "k": int(k),
                    "t": float(t),
                    "residual": float(residual),
                    "error": float(error) if error else None,
                    "lyapunov": float(lyapunov) if lyapunov else None,
                }
            )
    return rows


def run_metadata(
    label: str,
    log: RunLog,
    flow: FlowParams,
    disc: DiscretizationParams,
    cert: analysis.ConvergenceCertificate | None,
    x0: np.ndarray | None = None,
    extra: dict | None = None,
) -> dict[str, str]:
    """Flat ``key=value`` view of everything that produced one run."""
    meta: dict[str, str] = {"run": label}
    if extra:
        meta.update({k: str(v) for k, v in extra.items()})
    rhs = log.rhs
    if isinstance(rhs, NominalRhs):
        meta["dynamics"] = "nominal"
        meta["kappa"] = _fmt(rhs.kappa)
        meta["lambda"] = _fmt(rhs.lam)
    else:
        meta["dynamics"] = "modified"
        meta["lambda"] = _fmt(flow.lam)
        meta["kappa1"] = _fmt(flow.kappa1)
        meta["kappa2"] = _fmt(flow.kappa2)
        meta["alpha1"] = _fmt(flow.alpha1)
        meta["alpha2"] = _fmt(flow.alpha2)
    meta["eta"] = _fmt(log.disc.eta)
    meta["max_steps"] = str(log.disc.max_steps)
    meta["stop_residual"] = _fmt(log.disc.stop_residual)
    meta["fix_threshold"] = _fmt(log.disc.fix_threshold)
    if x0 is not None:
        meta["x0"] = ",".join(_fmt(v) for v in x0)
    if cert is not None:
        meta["contraction"] = _fmt(cert.contraction)
        meta["alpha1_margin"] = _fmt(cert.alpha1_margin)
        meta["alpha1_window_low"] = _fmt(cert.alpha1_window[0])
        meta["alpha1_window_high"] = _fmt(cert.alpha1_window[1])
        meta["alpha1_certified"] = "true" if cert.alpha1_certified else "false"
        meta["settle_bound"] = (
            "uncertified" if cert.settle_bound is None else _fmt(cert.settle_bound)
        )
        meta["xi"] = "none" if cert.xi is None else _fmt(cert.xi)
        meta["step_budget"] = (
            "none" if cert.step_budget is None else str(cert.step_budget)
        )
        meta["estimated_constants"] = (
            "true" if cert.estimated_constants else "false"
        )
    meta["termination"] = log.termination
    meta["steps"] = str(log.steps)
    meta["final_residual"] = _fmt(log.final.residual)
    if log.final.error is not None:
        meta["final_error"] = _fmt(log.final.error)
    return meta


def write_metadata(meta: dict[str, str], path: str | Path) -> None:
    """Write ``key=value`` lines; deterministic for identical inputs."""
    try:
        with open(path, "w", newline="\n") as fh:
            for key, value in meta.items():
                fh.write(f"{key}={value}\n")
    except OSError as exc:
        raise OSError(f"cannot write metadata to {path}: {exc}") from exc


def persist_result(
    result: ExperimentResult, cfg: ExperimentConfig, out_dir: Path
) -> None:
    """Write one CSV + metadata pair per run and a batch summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, log in result.runs:
        emit_csv(log, out_dir / f"run_{label}.csv")
        meta = run_metadata(
            label,
            log,
            result.flow,
            result.disc,
            result.certificate,
            x0=log.records[0].state,
            extra={"experiment": cfg.experiment, "seed": cfg.seed},
        )
        write_metadata(meta, out_dir / f"run_{label}.meta")
    batch: dict[str, str] = {
        "experiment": cfg.experiment,
        "seed": str(cfg.seed),
        "runs": ",".join(label for label, _ in result.runs) or "none",
        "failures": ";".join(f"{l}:{m}" for l, m in result.failures) or "none",
    }
    write_metadata(batch, out_dir / "batch.meta")
