"""Command-line front end.

Exit codes: 0 all checks pass, 1 adjudicated failures, 2 usage or
configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tables, verifier
from .linalg import DEFAULT_TOL, DomainError
from .protocol import (
    CorrectionRuleset,
    FormulaSet,
    InputCoefficients,
    MEBasisConvention,
    all_outcomes,
    trace_protocol,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

CONVENTIONS = ("STD", "M2", "REF1_IMPLIED")
RULESETS = tuple(rs.value for rs in CorrectionRuleset)


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    dimension: int = 3
    convention: str = "M2"
    ruleset: str = "OURS_FORMULA"
    trials: int = 20
    seed: int = 42
    tolerance: float = DEFAULT_TOL
    format: str = "text"
    alpha: InputCoefficients | None = None
    output: str | None = None

    @property
    def ruleset_enum(self) -> CorrectionRuleset:
        return CorrectionRuleset(self.ruleset)

    def conv(self) -> MEBasisConvention:
        try:
            return verifier.convention_by_name(self.convention)
        except LookupError as exc:
            raise UsageError(str(exc)) from exc

    def inputs(self) -> list[InputCoefficients]:
        if self.alpha is not None:
            return [self.alpha]
        return verifier.sample_alphas(self.dimension, self.trials, self.seed)


def parse_complex(token: str) -> complex:
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (``j`` accepted for ``i``)."""
    token = token.strip().replace(" ", "")
    try:
        value = complex(token.replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex literal: {token!r}") from None
    if not np.isfinite(value):
        raise UsageError(f"not a finite value: {token!r}")
    return value


def parse_alpha(text: str, dim: int) -> InputCoefficients:
    values = [parse_complex(tok) for tok in text.split(",")]
    if len(values) != dim:
        raise UsageError(f"--alpha needs {dim} coefficients, got {len(values)}")
    try:
        return InputCoefficients(dim, np.array(values))
    except DomainError as exc:
        raise UsageError(f"--alpha: {exc}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dimension", type=int, default=3)
    p.add_argument("--convention", choices=CONVENTIONS, default="M2")
    p.add_argument("--ruleset", choices=RULESETS, default="OURS_FORMULA")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    p.add_argument("--alpha", default=None, help="comma-separated complex coefficients, e.g. 0.6,0.8i,0")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None, help="write the report (or table) to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qudit-teleport",
        description="Verify correction rules for two-qudit entanglement teleportation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("check-expansion", help="compare measured residuals with both expansions"))
    _add_common(sub.add_parser("sweep", help="simulate every outcome and report fidelities"))
    p = sub.add_parser("compare-tables", help="diff two correction tables")
    _add_common(p)
    p.add_argument("table_a", nargs="?", default=None)
    p.add_argument("table_b", nargs="?", default=None)
    _add_common(sub.add_parser("oracle", help="brute-force the correction for each outcome"))
    _add_common(sub.add_parser("export-table", help="write a ruleset in table format"))
    return parser


def make_config(args: argparse.Namespace) -> CliConfig:
    if args.dimension < 2:
        raise UsageError(f"--dimension must be >= 2, got {args.dimension}")
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    if not args.tolerance > 0:
        raise UsageError(f"--tolerance must be positive, got {args.tolerance}")
    if CorrectionRuleset(args.ruleset).is_table and args.dimension != 3:
        raise UsageError(f"{args.ruleset} is only defined for --dimension 3")
    cfg = CliConfig(
        dimension=args.dimension,
        convention=args.convention,
        ruleset=args.ruleset,
        trials=args.trials,
        seed=args.seed,
        tolerance=args.tolerance,
        format=args.format,
        output=args.output,
    )
    if args.alpha is not None:
        cfg.alpha = parse_alpha(args.alpha, args.dimension)
    return cfg


def _emit(cfg: CliConfig, text: str, out) -> None:
    if cfg.output:
        try:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOError(f"cannot write {cfg.output}: {exc}") from exc
    else:
        out.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_check_expansion(cfg: CliConfig, out) -> int:
    conv = cfg.conv()
    checks = {
        f: [verifier.check_expansion(conv, f, c, cfg.tolerance) for c in cfg.inputs()]
        for f in FormulaSet
    }
    merged = {
        f: {pair: all(ch.per_pair[pair] for ch in runs) for pair in runs[0].per_pair}
        for f, runs in checks.items()
    }
    chosen = cfg.ruleset_enum.formula
    ok = all(merged[chosen].values())
    if cfg.format == "json":
        payload = {
            "dimension": cfg.dimension,
            "convention": cfg.convention,
            "formula": chosen.value,
            "tolerance": cfg.tolerance,
            "pairs": [
                {"m": m, "n": n, **{f.value: merged[f][(m, n)] for f in FormulaSet}}
                for (m, n) in sorted(merged[chosen])
            ],
            "match": ok,
        }
        _emit(cfg, _dump(payload), out)
    else:
        lines = [f"convention {cfg.convention}, N={cfg.dimension}", " m n  OURS   BAAN"]
        for m, n in sorted(merged[chosen]):
            marks = ["match " if merged[f][(m, n)] else "DIFFER" for f in (FormulaSet.OURS, FormulaSet.BAAN)]
            lines.append(f" {m} {n}  {marks[0]} {marks[1]}")
        lines.append(f"{chosen.value}: {'all pairs match' if ok else 'mismatch'}")
        _emit(cfg, "\n".join(lines) + "\n", out)
    return EXIT_OK if ok else EXIT_FAIL


def format_report_text(report: verifier.VerificationReport) -> str:
    lines = [
        f"convention {report.convention}, ruleset {report.ruleset}, N={report.dim}, "
        f"trials={report.trials}, seed={report.seed}, tol={report.tolerance:g}",
        " l m n  probability  min_fid      max_fid      result",
    ]
    for o, s in sorted(report.per_outcome.items()):
        lines.append(
            f" {o.l} {o.m} {o.n}  {s.probability:.10f} {s.min_fidelity:.10f} "
            f"{s.max_fidelity:.10f} {'PASS' if s.passed else 'FAIL'}"
        )
    lines.append(f"pass {report.pass_count} / fail {report.fail_count}")
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg: CliConfig, out) -> int:
    alphas = [cfg.alpha] if cfg.alpha is not None else None
    report = verifier.sweep(
        cfg.conv(), cfg.ruleset_enum, cfg.dimension, cfg.trials, cfg.tolerance, cfg.seed, alphas
    )
    text = _dump(report.to_dict()) if cfg.format == "json" else format_report_text(report)
    _emit(cfg, text, out)
    return EXIT_OK if report.fail_count == 0 else EXIT_FAIL


def _load_table(path: str) -> tables.CorrectionTable:
    try:
        return tables.read_table(path)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    except tables.TableParseError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_compare_tables(cfg: CliConfig, path_a: str | None, path_b: str | None, out) -> int:
    if (path_a is None) != (path_b is None):
        raise UsageError("compare-tables takes either two table paths or none")
    if path_a is None:
        a = tables.builtin_table(CorrectionRuleset.OURS_TABLE)
        b = tables.builtin_table(CorrectionRuleset.BAAN_TABLE)
    else:
        a, b = _load_table(path_a), _load_table(path_b)
        if a.dim != b.dim:
            raise UsageError(f"tables have different dimensions ({a.dim} vs {b.dim})")
    diffs = verifier.compare_rulesets(a.dim, a, b)
    if cfg.format == "json":
        payload = {
            "dimension": a.dim,
            "a": a.name,
            "b": b.name,
            "differences": [
                {"l": o.l, "m": o.m, "n": o.n,
                 "a": tables.render_row(a.rows[o], a.dim), "b": tables.render_row(b.rows[o], b.dim)}
                for o in diffs
            ],
            "count": len(diffs),
        }
        _emit(cfg, _dump(payload), out)
    else:
        lines = [f"{a.name} vs {b.name} (N={a.dim})"]
        for o in diffs:
            lines.append(f" {o.l} {o.m} {o.n}  {a.name}: {tables.render_row(a.rows[o], a.dim)}")
            lines.append(f"        {b.name}: {tables.render_row(b.rows[o], b.dim)}")
        lines.append(f"{len(diffs)} of {a.dim**3} outcomes differ")
        _emit(cfg, "\n".join(lines) + "\n", out)
    return EXIT_OK if not diffs else EXIT_FAIL


def cmd_oracle(cfg: CliConfig, out) -> int:
    conv, rs, dim = cfg.conv(), cfg.ruleset_enum, cfg.dimension
    c = cfg.alpha if cfg.alpha is not None else verifier.sample_alphas(dim, 1, cfg.seed)[0]
    rows = []
    for o in all_outcomes(dim):
        collapsed = trace_protocol(c, conv, rs, o).collapsed_45
        res = verifier.oracle_correction(collapsed, c, dim, cfg.tolerance, o)
        expected = verifier.ruleset_indices(rs, dim, o)
        match = res.unique and expected is not None and res.maximizers == [expected]
        rows.append((o, res, expected, match))
    all_ok = all(r[3] for r in rows)
    if cfg.format == "json":
        payload = {
            "dimension": dim,
            "convention": cfg.convention,
            "ruleset": cfg.ruleset,
            "outcomes": [
                {"l": o.l, "m": o.m, "n": o.n,
                 "maximizers": [list(p) for p in res.maximizers],
                 "unique": res.unique,
                 "ruleset_choice": list(exp) if exp is not None else None,
                 "match": match}
                for o, res, exp, match in rows
            ],
            "match_count": sum(r[3] for r in rows),
        }
        _emit(cfg, _dump(payload), out)
    else:
        lines = [f"convention {cfg.convention}, ruleset {cfg.ruleset}, N={dim}", " l m n  maximizers (j,n)        ruleset  verdict"]
        for o, res, exp, match in rows:
            found = " ".join(f"({j},{n})" for j, n in res.maximizers) or "none"
            verdict = "MATCH" if match else ("NON-UNIQUE" if len(res.maximizers) > 1 else "MISMATCH")
            choice = f"({exp[0]},{exp[1]})" if exp is not None else "-"
            lines.append(f" {o.l} {o.m} {o.n}  {found:<24} {choice:<8} {verdict}")
        lines.append(f"{sum(r[3] for r in rows)} of {dim**3} outcomes match")
        _emit(cfg, "\n".join(lines) + "\n", out)
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_export_table(cfg: CliConfig, out) -> int:
    rs = cfg.ruleset_enum
    table = tables.builtin_table(rs) if rs.is_table else tables.table_from_ruleset(rs, cfg.dimension)
    _emit(cfg, tables.format_table(table), out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        if args.command == "check-expansion":
            return cmd_check_expansion(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        if args.command == "compare-tables":
            return cmd_compare_tables(cfg, args.table_a, args.table_b, out)
        if args.command == "oracle":
            return cmd_oracle(cfg, out)
        return cmd_export_table(cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
