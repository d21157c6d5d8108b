"""Job runner.

A job is one command applied to one system file. The runner validates the
job, dispatches to a ``cmd_*`` handler and turns library exceptions into
exit codes: 0 on success, 1 for input and budget errors, 2 when a
mathematical invariant fails.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from amenable_pressure.config import DEFAULT_BUDGETS, Budgets, get_output_root
from amenable_pressure.exceptions import (
    BudgetExceededError,
    InputError,
    InvariantViolation,
)
from amenable_pressure.measures import (
    InvariantMeasure,
    entropy_rate,
    entropy_set_function,
    local_entropy,
)
from amenable_pressure.potentials import check_conditions, lyapunov
from amenable_pressure.pressure import (
    SearchMode,
    TermPath,
    pressure_sup_over_covers,
    topological_entropy,
)
from amenable_pressure.reports import (
    HeadlineRow,
    SummaryData,
    emit_convergence_table,
    generate_markdown_summary,
)
from amenable_pressure.storage import ArtifactStore
from amenable_pressure.subadditive import (
    Property,
    SetFunction,
    check_properties,
    ow_limit,
)
from amenable_pressure.symbolic import standard_partition
from amenable_pressure.system import SystemDescription, load_system
from amenable_pressure.varprin import (
    equilibrium_candidate,
    marginal_distance,
    maximize_over_bernoulli,
    maximize_over_markov,
    verify_step1,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2

COMMANDS = (
    "pressure",
    "entropy",
    "vp",
    "check-potential",
    "ow",
    "equilibrium",
)

# Sampling box for set-function property checks
PROPERTY_BOX = 4


@dataclass(frozen=True)
class JobSpec:
    """One validated job.

    Attributes:
        system: System-description file
        command: One of ``COMMANDS``
        n_max: Largest box side
        seed: Seed of every random choice
        mode: Assignment search mode
        out: Output root; ``get_output_root`` decides when omitted
        tolerance: Gap below which a local entropy counts as certified
        cover: Name of the cover to use; every cover when omitted
        restarts: Random restarts of the variational optimizers
        samples: Random samples per property or condition check
        budgets: Enumeration and search budgets
    """

    system: Path
    command: str
    n_max: int = 8
    seed: int = 0
    mode: SearchMode = SearchMode.EXACT
    out: Optional[Path] = None
    tolerance: float = 1e-6
    cover: Optional[str] = None
    restarts: int = 3
    samples: int = 500
    budgets: Budgets = DEFAULT_BUDGETS

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(
                f"unknown command {self.command!r}; expected one of "
                f"{', '.join(COMMANDS)}",
                field="command",
            )
        for name in ("n_max", "samples"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InputError("expected an integer", field=name)
            if value < 1:
                raise InputError("must be >= 1", field=name)
        for name in ("seed", "restarts"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InputError("expected an integer", field=name)
            if value < 0:
                raise InputError("must be >= 0", field=name)
        if not math.isfinite(self.tolerance) or self.tolerance <= 0:
            raise InputError("must be a positive number", field="tolerance")
        try:
            object.__setattr__(self, "mode", SearchMode(self.mode))
        except ValueError as e:
            raise InputError("expected exact or greedy", field="mode") from e
        object.__setattr__(self, "system", Path(self.system))

    @property
    def job_name(self) -> str:
        return f"{self.system.stem}-{self.command}"


@dataclass
class RunOutcome:
    """What a command handler leaves for the summary."""

    headlines: List[HeadlineRow] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    violation: Optional[str] = None

    def add(self, subject: str, quantity: str, value: Any) -> None:
        self.headlines.append(
            {"subject": subject, "quantity": quantity, "value": value}
        )


class JobRunner:
    """Runs one job and writes its artifacts."""

    commands: Dict[str, Callable[[SystemDescription], RunOutcome]]

    def __init__(self, job: JobSpec) -> None:
        self.job = job
        root = get_output_root(str(job.out) if job.out else None)
        self.store = ArtifactStore(root, job.job_name)
        self.artifacts: List[str] = []

        # Dictionary of available commands and their handlers
        self.commands = {
            "pressure": self.cmd_pressure,
            "entropy": self.cmd_entropy,
            "vp": self.cmd_vp,
            "check-potential": self.cmd_check_potential,
            "ow": self.cmd_ow,
            "equilibrium": self.cmd_equilibrium,
        }

    def run(self) -> int:
        """Run the job.

        Returns:
            int: Exit status
        """
        try:
            desc = load_system(self.job.system)
            self.store.setup()
            outcome = self.commands[self.job.command](desc)
            self._summary(outcome)
        except (InputError, BudgetExceededError) as e:
            logger.error("%s: %s", e.__class__.__name__, str(e))
            return EXIT_INPUT
        except InvariantViolation as e:
            logger.error("Invariant violated: %s", str(e))
            return EXIT_INVARIANT
        except Exception as e:
            logger.error("Job failed: %s", str(e), exc_info=True)
            return EXIT_INPUT
        if outcome.violation is not None:
            logger.error("Invariant violated: %s", outcome.violation)
            return EXIT_INVARIANT
        logger.info("Done: %s", self.store.job_dir)
        return EXIT_OK

    def _csv(self, name: str, report: Any) -> None:
        emit_convergence_table(report, self.store.get_output_path(name))
        self.artifacts.append(name)

    def _json(self, name: str, data: Any) -> None:
        self.store.write_json(name, data)
        self.artifacts.append(name)

    def _jsonl(self, name: str, records: Any) -> None:
        self.store.write_jsonl(name, records)
        self.artifacts.append(name)

    def _summary(self, outcome: RunOutcome) -> None:
        job = self.job
        settings: List[HeadlineRow] = [
            {"subject": "job", "quantity": key, "value": value}
            for key, value in (
                ("n_max", job.n_max),
                ("seed", job.seed),
                ("mode", job.mode.value),
                ("cover", job.cover or "all"),
            )
        ]
        data: SummaryData = {
            "command": job.command,
            "system": job.system.name,
            "settings": settings,
            "headlines": outcome.headlines,
            "artifacts": self.artifacts,
            "notes": outcome.notes,
        }
        generate_markdown_summary(
            data, self.store.get_output_path("SUMMARY.md")
        )

    def _covers(self, desc: SystemDescription) -> Dict[str, Any]:
        if self.job.cover is not None:
            return {self.job.cover: desc.cover(self.job.cover)}
        return dict(desc.covers)

    def _supported(
        self, desc: SystemDescription, outcome: RunOutcome
    ) -> Dict[str, InvariantMeasure]:
        """Measures of the file that live on the shift space."""
        window = standard_partition(desc.space).window
        probe = window
        for fp in desc.space.forbidden:
            probe = probe | fp.window
        kept: Dict[str, InvariantMeasure] = {}
        for name, mu in desc.measures.items():
            try:
                mu.check_support(
                    desc.space, probe, self.job.budgets.pattern_budget
                )
            except InputError as e:
                logger.warning("Skipping measure %s: %s", name, str(e))
                outcome.notes.append(
                    f"measure {name} skipped: not supported on the space"
                )
                continue
            kept[name] = mu
        return kept

    def cmd_pressure(self, desc: SystemDescription) -> RunOutcome:
        """Pressure of the potential relative to each cover."""
        job = self.job
        outcome = RunOutcome()
        sup = pressure_sup_over_covers(
            desc.space,
            desc.potential,
            self._covers(desc),
            job.n_max,
            job.mode,
            job.budgets,
        )
        result: Dict[str, Any] = {"covers": {}}
        for name, report in sup.reports.items():
            self._csv(f"pressure_{name}.csv", report)
            self._jsonl(f"terms_{name}.jsonl", report.term_records())
            result["covers"][name] = {
                "estimate": report.estimate,
                "certified": report.certified,
                "normalized": report.normalized,
            }
            outcome.add(name, "pressure", report.estimate)
            outcome.add(name, "certified", report.certified)
            if not report.certified:
                outcome.notes.append(
                    f"cover {name}: some terms are upper bounds only"
                )
        result["best_cover"] = sup.best_cover
        result["estimate"] = sup.estimate
        if len(sup.reports) > 1:
            outcome.add("all covers", "largest pressure", sup.estimate)
        self._json("pressure.json", result)
        return outcome

    def cmd_entropy(self, desc: SystemDescription) -> RunOutcome:
        """Topological entropy per cover and entropies of the measures."""
        job = self.job
        outcome = RunOutcome()
        covers = self._covers(desc)
        result: Dict[str, Any] = {"topological": {}, "measures": {}}
        for name, U in covers.items():
            report = topological_entropy(
                desc.space, U, job.n_max, job.mode, job.budgets
            )
            self._csv(f"topological_{name}.csv", report)
            result["topological"][name] = report.estimate
            outcome.add(name, "topological entropy", report.estimate)
        alpha = standard_partition(desc.space)
        for name, mu in self._supported(desc, outcome).items():
            rate = entropy_rate(mu, alpha, job.n_max, job.budgets)
            self._csv(f"entropy_{name}.csv", rate)
            local = {
                cover_name: local_entropy(
                    mu,
                    U,
                    job.n_max,
                    tolerance=job.tolerance,
                    budgets=job.budgets,
                )
                for cover_name, U in covers.items()
            }
            result["measures"][name] = {
                "estimate": rate.estimate,
                "closed_form": rate.closed_form,
                "covers": {
                    c: {
                        "lower": le.lower,
                        "upper": le.upper,
                        "certified": le.certified,
                        "lower_exact": le.lower_exact,
                    }
                    for c, le in local.items()
                },
            }
            outcome.add(name, "entropy rate", rate.estimate)
            for c, le in local.items():
                outcome.add(f"{name} / {c}", "local entropy", le.upper)
                if not le.certified:
                    outcome.notes.append(
                        f"{name} / {c}: gap {le.gap:.3g} exceeds the "
                        f"tolerance {job.tolerance:g}"
                    )
        self._json("entropy.json", result)
        return outcome

    def cmd_vp(self, desc: SystemDescription) -> RunOutcome:
        """Maximize entropy plus Lyapunov exponent and compare."""
        job = self.job
        outcome = RunOutcome()
        space = desc.space
        name, U = next(iter(self._covers(desc).items()))
        optimizer = (
            maximize_over_bernoulli
            if space.is_full_shift
            else maximize_over_markov
        )
        best = optimizer(
            space,
            desc.potential,
            U,
            n_entropy=job.n_max,
            restarts=job.restarts,
            seed=job.seed,
            mode=job.mode,
            budgets=job.budgets,
        )
        self._json("vp.json", dict(best.to_json(), cover=name))
        self._jsonl("restarts.jsonl", [r.to_record() for r in best.trace])
        outcome.add(name, "pressure", best.pressure_estimate)
        outcome.add(name, "best objective", best.best_value)
        outcome.add(name, "gap", best.gap)

        measures = dict(self._supported(desc, outcome))
        measures["optimum"] = best.best_measure
        step1 = verify_step1(
            space,
            desc.potential,
            U,
            measures,
            job.n_max,
            job.mode,
            job.budgets,
        )
        self._jsonl("step1.jsonl", [r.to_record() for r in step1.records])
        worst = min(r.margin for r in step1.records)
        outcome.add(name, "smallest margin", worst)
        if step1.pressure.path is TermPath.SEARCH:
            if step1.violations:
                outcome.notes.append(
                    "negative margins against a searched pressure term "
                    "are reported, not enforced"
                )
        else:
            try:
                step1.check()
            except InvariantViolation as e:
                outcome.violation = str(e)
        return outcome

    def cmd_check_potential(self, desc: SystemDescription) -> RunOutcome:
        """Sampled conditions, constants and Lyapunov exponents."""
        job = self.job
        outcome = RunOutcome()
        P = desc.potential
        records = check_conditions(
            P, desc.space, job.samples, job.seed, budgets=job.budgets
        )
        self._jsonl("conditions.jsonl", records)
        constants = P.constants()
        self._json(
            "constants.json",
            {
                "c3_bound": constants.c3_bound,
                "reference_bound": constants.reference_bound,
                "k_bound": constants.k_bound,
                "k1": constants.k1,
                "k2": constants.k2,
                "certified": constants.certified,
            },
        )
        for r in records:
            outcome.add(r["condition"], "verdict", r["verdict"])
        failed = [r["condition"] for r in records if r["verdict"] == "fail"]
        for name, mu in self._supported(desc, outcome).items():
            report = lyapunov(
                P, mu, job.n_max, desc.space, job.budgets, job.seed
            )
            self._csv(f"lyapunov_{name}.csv", report)
            outcome.add(name, "lyapunov exponent", report.estimate)
            if not report.exact:
                outcome.notes.append(
                    f"lyapunov {name}: Monte Carlo beyond the pattern "
                    "budget"
                )
        if failed:
            outcome.violation = f"conditions failed: {', '.join(failed)}"
        return outcome

    def cmd_ow(self, desc: SystemDescription) -> RunOutcome:
        """Normalized limits of sub-additive set functions along boxes."""
        job = self.job
        outcome = RunOutcome()
        d = desc.space.dimension
        alpha = standard_partition(desc.space)
        functions: Dict[str, SetFunction] = {
            "cardinality": SetFunction.cardinality()
        }
        for name, mu in self._supported(desc, outcome).items():
            functions[name] = entropy_set_function(mu, alpha, job.budgets)
        failed: List[str] = []
        records: List[Dict[str, Any]] = []
        for name, f in functions.items():
            checks = check_properties(
                f, d, job.samples, PROPERTY_BOX, job.seed
            )
            for check in checks:
                records.append(dict(check, function=name))
                if check["verdict"] == "fail":
                    failed.append(f"{name} {check['property']}")
            estimate = ow_limit(f, d, job.n_max)
            self._csv(f"ow_{name}.csv", estimate)
            outcome.add(name, "limit estimate", estimate.limit_estimate)
            outcome.add(name, "infimum", estimate.inf_estimate)
            if f.declares(Property.STRONGLY_SUBADDITIVE):
                outcome.add(name, "gap", estimate.gap)
        self._jsonl("properties.jsonl", records)
        if failed:
            outcome.violation = f"properties failed: {', '.join(failed)}"
        return outcome

    def cmd_equilibrium(self, desc: SystemDescription) -> RunOutcome:
        """Weighted maximizer construction at the largest box."""
        job = self.job
        outcome = RunOutcome()
        candidate = equilibrium_candidate(
            desc.space,
            desc.potential,
            standard_partition(desc.space),
            job.n_max,
            job.budgets,
        )
        distances = {
            name: marginal_distance(candidate, mu)
            for name, mu in self._supported(desc, outcome).items()
        }
        self._json(
            "equilibrium.json",
            {
                "n": candidate.n,
                "points": len(candidate.selected),
                "single_site": candidate.single_site,
                "pairs": candidate.pairs,
                "distances": distances,
            },
        )
        for symbol, mass in enumerate(candidate.single_site.tolist()):
            outcome.add("candidate", f"P(x0 = {symbol})", mass)
        for name, distance in distances.items():
            outcome.add(name, "marginal distance", distance)
        return outcome


def run(job: JobSpec) -> int:
    """Run a job and return its exit status."""
    return JobRunner(job).run()
