"""Batch front end: build backends from a JSON config and run suites.

The run configuration is a single JSON document; flags only select the
config path, the output directory, and verbosity.  One report is written
per (suite, backend) pair plus a summary; the summary is free of timing
so identical configs and seeds produce byte-identical summaries.  The
exit status is 0 exactly when every hypothesis-gated assertion passed;
exploratory records never fail a run.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from pathlib import Path

from .basis import KIND_S1XS2, KIND_S1XS3, KIND_SPHERE
from .errors import BackendBuildError, ConfigError, ConformalLabError
from .geometry import SPHERE_DIMENSIONS, catalog_build
from .spectrum import lambda1_L
from .verify import SUITES


class RunConfig:
    """Validated run configuration."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
        self.seed = raw.get("seed", 0)
        if not isinstance(self.seed, int):
            raise ConfigError("seed: must be an integer")
        suites = raw.get("suites")
        if not suites or not isinstance(suites, list):
            raise ConfigError("suites: a non-empty list is required")
        unknown = [s for s in suites if s not in SUITES]
        if unknown:
            raise ConfigError(f"suites: unknown suite names {unknown}; "
                              f"known: {sorted(SUITES)}")
        self.suites = list(suites)
        catalog = raw.get("catalog")
        if not catalog or not isinstance(catalog, list):
            raise ConfigError("catalog: a non-empty list of backend records "
                              "is required")
        for i, rec in enumerate(catalog):
            if not isinstance(rec, dict) or "kind" not in rec:
                raise ConfigError(f"catalog[{i}]: needs a 'kind' field")
        self.catalog = catalog
        self.level = raw.get("level", 2)
        if not isinstance(self.level, int) or self.level < 0:
            raise ConfigError("level: must be a nonnegative integer")
        self.trials = raw.get("trials", 10)
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials: must be a positive integer")
        self.tolerances = raw.get("tolerances", {})
        if not isinstance(self.tolerances, dict):
            raise ConfigError("tolerances: must map suite name to number")
        for k in self.tolerances:
            if k not in SUITES:
                raise ConfigError(f"tolerances: unknown suite {k!r}")
        self.out_dir = raw.get("out_dir")
        extra = set(raw) - {"seed", "suites", "catalog", "level", "trials",
                            "tolerances", "out_dir"}
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")

    @staticmethod
    def from_path(path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from exc
        return RunConfig(raw)

    def suite_options(self, suite: str) -> dict:
        opts = {"level": self.level, "seed": self.seed, "trials": self.trials}
        if suite in self.tolerances:
            opts["tolerance"] = self.tolerances[suite]
        return opts


def _build_backends(config: RunConfig):
    backends = []
    for i, rec in enumerate(config.catalog):
        try:
            m = catalog_build(rec["kind"], rec.get("n"),
                              rec.get("params"), rec.get("basis"))
        except (ConformalLabError, TypeError, ValueError, KeyError) as exc:
            raise BackendBuildError(
                f"catalog[{i}] ({rec.get('kind')}): {exc}") from exc
        backends.append(m)
    return backends


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-." else "_" for ch in text)


def run(config: RunConfig, out_dir=None, verbose: bool = False) -> int:
    """Execute all compatible (suite, backend) jobs and write reports."""
    out = Path(out_dir or config.out_dir or "reports")
    backends = _build_backends(config)
    jobs = [(suite, m) for suite in config.suites for m in backends]
    for suite in config.suites:
        if not any(_is_compatible(suite, m) for m in backends):
            raise ConfigError(
                f"suites: {suite!r} is not compatible with any backend in "
                f"the catalog (dimension gates)")
    out.mkdir(parents=True, exist_ok=True)

    max_workers = int(os.environ.get("CONFORMAL_LAB_THREADS", "4") or 1)
    max_workers = max(1, max_workers)

    def job(args):
        suite, m = args
        return SUITES[suite](m, config.suite_options(suite))

    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as ex:
        for (suite, m), report in zip(jobs, ex.map(job, jobs)):
            if report is not None:
                results[(suite, m.descriptor())] = report

    # serialize report writing in a fixed aggregation order
    summary_rows = []
    all_pass = True
    for key in sorted(results):
        suite, backend = key
        report = results[key]
        fname = out / f"{suite}__{_slug(backend)}.json"
        with open(fname, "w") as fh:
            fh.write(report.to_json())
        ok = report.passed
        all_pass = all_pass and ok
        summary_rows.append({
            "suite": suite,
            "backend": backend,
            "pass": ok,
            "checks": [c.to_dict() for c in report.checks],
        })
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {suite} on {backend}")
    summary = {
        "seed": config.seed,
        "all_passed": all_pass,
        "results": summary_rows,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    if verbose:
        print(f"summary: {'PASS' if all_pass else 'FAIL'} "
              f"({len(summary_rows)} reports in {out})")
    return 0 if all_pass else 1


def _is_compatible(suite: str, m) -> bool:
    if suite in ("4d-identity", "total-q"):
        return m.n == 4
    if suite in ("weak-identity", "signs", "green-compare"):
        return m.n != 4
    if suite == "mass":
        return (not m.is_product) and m.n in (5, 6, 7)
    return True


CATALOG_ROWS = (
    [(KIND_SPHERE, n) for n in SPHERE_DIMENSIONS]
    + [(KIND_S1XS2, 3), (KIND_S1XS3, 4)]
)


def list_catalog() -> str:
    """Text table of supported backends with their derived constants."""
    lines = [f"{'kind':<16}{'n':>3}  {'params':<22}{'R':>10}{'Q':>12}"
             f"{'lambda1(L)':>14}"]
    for kind, n in CATALOG_ROWS:
        basis = {"degree_max": 4}
        if kind != KIND_SPHERE:
            basis["fourier_max"] = 2
        m = catalog_build(kind, n, {}, basis)
        params = f"radius=1" if kind == KIND_SPHERE \
            else "length=2pi, radius=1"
        lines.append(f"{kind:<16}{n:>3}  {params:<22}"
                     f"{m.scalar_curvature:>10.6g}{m.q_value:>12.6g}"
                     f"{lambda1_L(m):>14.6g}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conformal-lab",
        description="verification suites for conformally covariant "
                    "operators on the manifold catalog")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run suites from a JSON config")
    runp.add_argument("--config", required=True, help="path to the JSON config")
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--verbose", action="store_true")
    sub.add_parser("catalog", help="print the supported backends")
    args = parser.parse_args(argv)
    if args.command == "catalog":
        print(list_catalog())
        return 0
    try:
        config = RunConfig.from_path(args.config)
        return run(config, args.out, args.verbose)
    except ConfigError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except BackendBuildError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
