"""Command line surface: build level complexes, run checks, render reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 input error, 3 missing
artifacts.  Runs with the same configuration and seed produce byte
identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import cells, homology, systems
from .complexes import LambdaIndex, complex_to_json, skeleton_dot
from .errors import GuardExceeded, InputError
from .ground import (
    CoverFamily,
    GroundSpace,
    check_local_refinement,
    check_selection_completeness,
    family_to_json,
    load_family,
    load_space,
    singleton_neighborhoods,
    space_to_json,
)
from .presets import ALL_CHECKS, PRESETS, Preset
from .report import FORMAT_VERSION, Report, dump_json

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_MISSING_ARTIFACTS = 3


@dataclass
class RunConfig:
    space: str
    covers: str | None
    lambdas: str
    checks: list[str] | None
    out: Path
    seed: int
    max_dim: int
    mode: str
    nets: int | None = None
    homotopy_count: int | None = None

    def echo(self) -> dict:
        return {
            "space": self.space,
            "covers": self.covers,
            "lambdas": self.lambdas,
            "seed": self.seed,
            "max_dim": self.max_dim,
            "mode": self.mode,
        }


@dataclass
class RunContext:
    config: RunConfig
    preset: Preset | None
    space: GroundSpace
    family: CoverFamily
    system: systems.InverseSystem
    _gsystem: cells.GraphSystem | None = field(default=None, repr=False)

    @property
    def gsystem(self) -> cells.GraphSystem:
        if self._gsystem is None:
            self._gsystem = cells.build_graph_system(self.system)
        return self._gsystem

    @property
    def chain(self) -> list[LambdaIndex]:
        if self.preset is not None:
            return [LambdaIndex.of(ids) for ids in self.preset.chain]
        k = len(self.family.covers)
        return [LambdaIndex.of(range(i + 1)) for i in range(k)]

    def neighborhoods(self):
        if self.preset is not None:
            return self.preset.neighborhoods(self.space)
        return singleton_neighborhoods(self.space)


def _parse_lambdas(spec: str, n_covers: int, preset: Preset | None) -> list[LambdaIndex] | None:
    if spec == "all":
        return None  # build_system default: all nonempty subsets
    if spec == "chain":
        if preset is not None:
            return [LambdaIndex.of(ids) for ids in preset.chain]
        return [LambdaIndex.of(range(i + 1)) for i in range(n_covers)]
    try:
        return [LambdaIndex.of(int(i) for i in part.split(",")) for part in spec.split(";")]
    except ValueError as exc:
        raise InputError(f"cannot parse lambda selection {spec!r}") from exc


def _load_context(config: RunConfig) -> RunContext:
    preset = PRESETS.get(config.space)
    if preset is not None:
        space, family = preset.factory()
    else:
        space = load_space(Path(config.space))
        if config.covers is None:
            raise InputError("a space file needs a covers file")
        family = load_family(Path(config.covers), space)
    lambdas = _parse_lambdas(config.lambdas, len(family.covers), preset)
    system = systems.build_system(family, lambdas, config.max_dim)
    return RunContext(config, preset, space, family, system)


# ---------------------------------------------------------------------------
# checks


def _parse_mode(mode: str) -> tuple[str, int]:
    if mode == "exhaustive":
        return "exhaustive", 0
    if mode.startswith("sampled:"):
        try:
            return "sampled", int(mode.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"cannot parse mode {mode!r}") from exc
    raise InputError(f"unknown mode {mode!r}")


def _run_check(name: str, ctx: RunContext) -> tuple[Report, dict]:
    """Returns the report plus any extra artifacts to write."""
    extra: dict = {}
    if name == "local_refinement":
        report = check_local_refinement(ctx.family, ctx.neighborhoods())
    elif name == "selection_completeness":
        mode, n = _parse_mode(ctx.config.mode)
        report = check_selection_completeness(
            ctx.family, mode, sample_count=n, seed=ctx.config.seed
        )
    elif name == "flag_reconstruction":
        report = systems.check_flag_reconstruction(ctx.system)
    elif name == "skeleton_equality":
        report = systems.check_skeleton_equality(ctx.system)
    elif name == "functoriality":
        report = systems.check_functoriality(ctx.system)
    elif name == "simpliciality":
        report = systems.check_simpliciality(ctx.system)
    elif name == "section_identity":
        report = systems.check_section_identity(ctx.system)
    elif name == "fibers":
        report = systems.check_fibers(ctx.system)
    elif name == "fiber_homotopy":
        count = ctx.config.homotopy_count or (
            ctx.preset.homotopy_count if ctx.preset else 50
        )
        report = systems.check_homotopy(ctx.system, count, ctx.config.seed)
    elif name == "nerve_absorption":
        report = systems.check_nerve_absorption(ctx.system)
    elif name == "star_conditions":
        report = cells.check_star_conditions(ctx.gsystem, ctx.system)
    elif name == "equivalence_classes":
        result = cells.equivalence_classes(ctx.gsystem)
        report = cells.check_equivalence(ctx.gsystem)
        if result.quotient is not None:
            extra["quotient.json"] = {
                "format_version": FORMAT_VERSION,
                **result.quotient.to_json(),
                "bijection": [],
                "checks": {"equivalence_classes": report.passed},
            }
    elif name == "quotient_comparison":
        report = cells.compare_quotient_to_ground(ctx.gsystem, ctx.system)
        result = cells.equivalence_classes(ctx.gsystem)
        if result.quotient is not None:
            extra["quotient.json"] = {
                "format_version": FORMAT_VERSION,
                **result.quotient.to_json(),
                "bijection": _bijection_rows(ctx),
                "checks": {"quotient_comparison": report.passed},
            }
    elif name == "cauchy_sweep":
        count = ctx.config.nets or (ctx.preset.cauchy_nets if ctx.preset else 10000)
        report = cells.cauchy_sweep(ctx.gsystem, ctx.system, count, ctx.config.seed)
    elif name == "betti_stabilization":
        missing = [lam for lam in ctx.chain if lam not in ctx.system.levels]
        if missing:
            raise InputError(
                f"betti chain level {missing[0]} is not among the built levels"
            )
        table = homology.betti_stabilization(ctx.system, ctx.chain)
        passed = table.nerve_stabilized
        expected = None
        if ctx.preset is not None:
            last = [r for r in table.rows if r.complex_kind == "N"][-1].bettis.padded(3)
            expected = ctx.preset.expected_betti
            passed = (expected is None or tuple(last[:3]) == expected) and (
                table.nerve_stabilized or not ctx.preset.expect_stabilized
            )
        report = Report(
            "betti_stabilization",
            passed,
            details={"table": table.to_json(), "expected_nerve": expected},
        )
        extra["betti.csv"] = table.csv()
    else:
        raise InputError(f"unknown check name {name!r}")
    return report, extra


def _bijection_rows(ctx: RunContext) -> list[list[int]]:
    result = cells.equivalence_classes(ctx.gsystem)
    if result.quotient is None:
        return []
    top = ctx.gsystem.top
    rows = []
    for x in ctx.space.points:
        support = systems.canonical_map(ctx.system, top, x).carrier
        rows.append([x, result.quotient.class_of[support[0]]])
    return rows


# ---------------------------------------------------------------------------
# commands


def cmd_build(config: RunConfig) -> int:
    ctx = _load_context(config)
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "space.json").write_text(dump_json(space_to_json(ctx.space)))
    (out / "covers.json").write_text(dump_json(family_to_json(ctx.family)))
    for lam in ctx.system.lambdas:
        level = ctx.system.levels[lam]
        tag = "-".join(str(i) for i in lam.cover_ids)
        payload = {
            "format_version": FORMAT_VERSION,
            "lambda": list(lam.cover_ids),
            "flag_complex": complex_to_json(level.flag, lam),
            "nerve_complex": complex_to_json(level.nerve, lam),
        }
        (out / f"level_{tag}.json").write_text(dump_json(payload))
        (out / f"skeleton_{tag}.dot").write_text(skeleton_dot(level.flag, f"L{tag.replace('-', '_')}"))
    bonds = [
        {
            "source": list(mu.cover_ids),
            "target": list(lam.cover_ids),
            "vertex_map": list(systems.bonding_map(ctx.system, lam, mu).vertex_map),
        }
        for lam, mu in ctx.system.comparable_pairs()
        if lam != mu
    ]
    (out / "bonds.json").write_text(
        dump_json({"format_version": FORMAT_VERSION, "bonds": bonds})
    )
    print(f"wrote {len(ctx.system.lambdas)} level files to {out}")
    return EXIT_OK


def cmd_check(config: RunConfig) -> int:
    ctx = _load_context(config)
    names = config.checks
    if names is None:
        names = list(ctx.preset.checks) if ctx.preset else list(ALL_CHECKS)
    for name in names:
        if name not in ALL_CHECKS:
            raise InputError(f"unknown check name {name!r}")
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    extras: dict[str, object] = {}
    for name in names:
        try:
            report, extra = _run_check(name, ctx)
        except ValueError as exc:
            # thread checks need a maximum level among the selected ones
            raise InputError(f"check {name!r} cannot run on the selected levels: {exc}") from exc
        reports.append(report)
        extras.update(extra)
    payload = {
        "format_version": FORMAT_VERSION,
        "config": config.echo(),
        "checks": [r.to_json() for r in reports],
        "all_pass": all(r.passed for r in reports),
    }
    (out / "report.json").write_text(dump_json(payload))
    for fname, content in sorted(extras.items()):
        if isinstance(content, str):
            (out / fname).write_text(content)
        else:
            (out / fname).write_text(dump_json(content))
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check}")
    return EXIT_OK if payload["all_pass"] else EXIT_CHECK_FAILED


def cmd_report(config: RunConfig) -> int:
    out = config.out
    report_path = out / "report.json"
    if not report_path.exists():
        print(f"no report.json under {out}; run the check command first", file=sys.stderr)
        return EXIT_MISSING_ARTIFACTS
    data = json.loads(report_path.read_text())
    lines = ["check results", "-------------"]
    rows = [["check", "pass", "witness"]]
    for chk in data["checks"]:
        status = "pass" if chk["pass"] else "FAIL"
        lines.append(f"{chk['check']:<24} {status}")
        rows.append([chk["check"], status, json.dumps(chk.get("witness"))])
    betti_path = out / "betti.csv"
    if betti_path.exists():
        lines += ["", "betti table", "-----------", betti_path.read_text().rstrip()]
    quotient_path = out / "quotient.json"
    if quotient_path.exists():
        q = json.loads(quotient_path.read_text())
        lines += ["", "class/point bijection", "---------------------"]
        for point, cls in q.get("bijection", []):
            lines.append(f"point {point:>3}  ->  class {cls}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    (out / "report.txt").write_text(text)
    (out / "checks.csv").write_text("\n".join(",".join(r) for r in rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", required=True, help="preset name or space JSON file")
    p.add_argument("--covers", default=None, help="covers JSON file (unused for presets)")
    p.add_argument(
        "--lambdas",
        default="all",
        help="level selection: all | chain | '0;0,1;0,1,2'",
    )
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled modes")
    p.add_argument("--max-dim", type=int, default=8, help="simplex dimension guard")
    p.add_argument(
        "--mode",
        default="exhaustive",
        help="selection check mode: exhaustive | sampled:<n>",
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nervelim",
        description="build nerve/flag level complexes of cover families and "
        "verify their structural identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="write level complexes and skeleton files")
    _add_common(p_build)

    p_check = sub.add_parser("check", help="run checks and write a JSON report")
    _add_common(p_check)
    p_check.add_argument(
        "--checks",
        default=None,
        help="comma separated check names (default: the preset's list)",
    )
    p_check.add_argument("--nets", type=int, default=None, help="Cauchy sweep size")
    p_check.add_argument(
        "--homotopy-samples", type=int, default=None, help="sampled homotopy threads"
    )

    p_report = sub.add_parser("report", help="render tables from a prior check run")
    p_report.add_argument("--out", type=Path, required=True, help="directory of the check run")

    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            config = RunConfig("", None, "all", None, args.out, 0, 8, "exhaustive")
            return cmd_report(config)
        checks = None
        if args.command == "check" and args.checks is not None:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        config = RunConfig(
            space=args.space,
            covers=args.covers,
            lambdas=args.lambdas,
            checks=checks,
            out=args.out,
            seed=args.seed,
            max_dim=args.max_dim,
            mode=args.mode,
            nets=getattr(args, "nets", None),
            homotopy_count=getattr(args, "homotopy_samples", None),
        )
        if args.command == "build":
            return cmd_build(config)
        return cmd_check(config)
    except FileNotFoundError as exc:
        print(f"input file not found: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (InputError, GuardExceeded) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
