"""Command-line front end.

    cmjtrees simulate --rates constant:1 --count 100 --seed 7 --out run/
    cmjtrees certify  --rates pathological --cert iii --imax 40 --out run/
    cmjtrees couple   --f affine:1 --n 4 --reps 100000 --seed 11 --out run/
    cmjtrees probe    --rates powerpa:2 --count 10000 --horizons 1,2,5,10 --reps 1000 --seed 3
    cmjtrees report   --rates iterlog:1,1 --seed 5 --out bundle/

Exit codes: 0 success, 2 configuration error, 3 range error, 4 internal
inconsistency.  ``CMJTREES_WORKERS`` overrides ``--workers``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import cmj, io
from .certificates import (
    PowerTailBound,
    certificate_vs_simulation,
    check_condition_i,
    check_condition_ii,
    counterexample_certificate,
    default_grid,
    iterated_log_window,
    window_min_n,
)
from .errors import ConfigError, DomainError, RateRangeError
from .harness import resolve_workers
from .patree import WeightFunction, coupling_test
from .purebirth import Count, Horizon
from .rates import RateSequence
from .rng import PURPOSE_CMJ, seed_from, stream

EXIT_OK, EXIT_CONFIG, EXIT_RANGE, EXIT_INTERNAL = 0, 2, 3, 4

COMMANDS = ("simulate", "certify", "couple", "probe", "report")
STOCHASTIC = ("simulate", "couple", "probe", "report")


@dataclass
class RunConfig:
    command: str
    rates: dict | None = None
    count: int | None = None
    horizon: float | None = None
    seed: int | None = None
    reps: int = 1000
    out: str = "."
    workers: int = 1
    cert: str = "i"
    eps: float = 1.0
    grid: list[int] = field(default_factory=list)
    imax: int = 40
    majorant: dict | None = None
    tail_bound: list[float] | None = None
    weight: str | None = None
    n: int = 4
    horizons: list[float] = field(default_factory=lambda: [1.0, 2.0, 5.0, 10.0])
    cap: int = cmj.DEFAULT_POPULATION_CAP

    def validate(self):
        def bad(fld, msg):
            raise ConfigError(f"field '{fld}': {msg}")

        if self.command not in COMMANDS:
            bad("command", f"must be one of {COMMANDS}")
        if self.command in STOCHASTIC and self.seed is None:
            bad("seed", "required for stochastic commands")
        if self.seed is not None:
            try:
                self.seed = seed_from(self.seed)
            except (TypeError, ValueError) as exc:
                bad("seed", str(exc))
        if self.command in ("simulate", "certify", "probe", "report") and self.rates is None:
            bad("rates", "a rate-sequence descriptor is required")
        if self.command == "simulate" and (self.count is None) == (self.horizon is None):
            bad("count/horizon", "give exactly one stop rule")
        if self.command == "probe" and self.count is None:
            bad("count", "probe needs --count N")
        if self.count is not None and self.count < 1:
            bad("count", "must be >= 1")
        if self.horizon is not None and not self.horizon >= 0:
            bad("horizon", "must be >= 0")
        if self.reps < 1:
            bad("reps", "must be >= 1")
        if self.cert not in ("i", "ii", "iii"):
            bad("cert", "must be one of i, ii, iii")
        if self.eps <= 0:
            bad("eps", "must be positive")
        if self.command == "couple" and self.weight is None:
            bad("f", "couple needs a weight function, e.g. affine:1")
        if self.cap < 1:
            bad("cap", "must be >= 1")
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        try:
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            bad("out", f"not writable: {exc}")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


def _rate_descriptor(text: str) -> dict:
    text = text.strip()
    if text.startswith("@"):
        path = Path(text[1:])
        try:
            desc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read rate descriptor {path}: {exc}") from None
        RateSequence.from_descriptor(desc, base_dir=path.parent)
        return desc
    if text.startswith("{"):
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON rate descriptor: {exc}") from None
        RateSequence.from_descriptor(desc)
        return desc
    return RateSequence.parse(text).to_descriptor()


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    return [int(round(x)) for x in _float_list(text)]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmjtrees", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="JSON run configuration (fields as in RunConfig)")
    sub = p.add_subparsers(dest="command")

    def common(sp, stochastic=True):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--workers", type=int, default=1)
        if stochastic:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--reps", type=int, default=1000)

    s = sub.add_parser("simulate", help="simulate one CMJ genealogy")
    s.add_argument("--rates", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--count", type=int)
    g.add_argument("--horizon", type=float)
    s.add_argument("--cap", type=int, default=cmj.DEFAULT_POPULATION_CAP)
    common(s)

    c = sub.add_parser("certify", help="evaluate a certificate")
    c.add_argument("--rates", required=True)
    c.add_argument("--cert", choices=("i", "ii", "iii"), default="i")
    c.add_argument("--eps", type=float, default=1.0)
    c.add_argument("--grid", type=_int_list, default=[])
    c.add_argument("--imax", type=int, default=40)
    c.add_argument("--majorant")
    c.add_argument("--tail-bound", type=_float_list, help="c,p for lambda_i >= c i^p")
    common(c, stochastic=False)

    cp = sub.add_parser("couple", help="CMJ skeleton vs attachment law chi-square test")
    cp.add_argument("--f", dest="weight", required=True)
    cp.add_argument("--n", type=int, default=4)
    common(cp)

    pr = sub.add_parser("probe", help="estimate P{tau_N <= T}")
    pr.add_argument("--rates", required=True)
    pr.add_argument("--count", type=int, required=True)
    pr.add_argument("--horizons", type=_float_list, default=[1.0, 2.0, 5.0, 10.0])
    common(pr)

    rp = sub.add_parser("report", help="combined bundle of plot-ready data")
    rp.add_argument("--rates", required=True)
    rp.add_argument("--count", type=int, default=1000)
    rp.add_argument("--horizons", type=_float_list, default=[1.0, 2.0, 5.0, 10.0])
    rp.add_argument("--eps", type=float, default=1.0)
    rp.add_argument("--grid", type=_int_list, default=[])
    rp.add_argument("--imax", type=int, default=40)
    common(rp)
    return p


def config_from_args(argv) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            d = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must contain a JSON object")
        if isinstance(d.get("rates"), str):
            d["rates"] = _rate_descriptor(d["rates"])
        if isinstance(d.get("majorant"), str):
            d["majorant"] = _rate_descriptor(d["majorant"])
        return RunConfig.from_dict(d)
    if args.command is None:
        parser.error("a command is required")
    d = {k: v for k, v in vars(args).items() if k != "config" and v is not None}
    for key in ("rates", "majorant"):
        if key in d:
            d[key] = _rate_descriptor(d[key])
    return RunConfig.from_dict(d)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _grid(cfg: RunConfig) -> list[int]:
    return cfg.grid or default_grid()


def _certify(cfg: RunConfig, seq: RateSequence, out: Path, prefix: str = ""):
    if cfg.cert == "i":
        tb = PowerTailBound(*cfg.tail_bound[:2]) if cfg.tail_bound else None
        report = check_condition_i(seq, _grid(cfg), tb)
    elif cfg.cert == "ii":
        maj = RateSequence.from_descriptor(cfg.majorant) if cfg.majorant else None
        report = check_condition_ii(seq, cfg.eps, _grid(cfg), majorant=maj)
    else:
        if seq.kind != "pathological":
            raise ConfigError("field 'cert': certificate iii applies to the pathological sequence only")
        report = counterexample_certificate(cfg.imax)
    io.write_json(out / f"{prefix}certificate.json", report.to_dict())
    io.evidence_csv(out / f"{prefix}evidence.csv", report)
    if report.rows:
        io.counterexample_csv(out / f"{prefix}counterexample_rows.csv", report)
    return report


def run(cfg: RunConfig) -> int:
    cfg.validate()
    out = Path(cfg.out)
    workers = resolve_workers(cfg.workers)
    seq = RateSequence.from_descriptor(cfg.rates) if cfg.rates else None

    if cfg.command == "simulate":
        stop = Count(cfg.count) if cfg.count is not None else Horizon(cfg.horizon)
        g = cmj.simulate(seq, stop, stream(cfg.seed, 0, PURPOSE_CMJ), cap=cfg.cap)
        io.genealogy_csv(out / "genealogy.csv", g)
        io.trajectory_csv(out / "trajectory.csv", cmj.tau_trajectory(g))
        io.write_json(out / "simulation.json", {
            "rates": cfg.rates, "seed": cfg.seed,
            "stop": {"count": cfg.count} if cfg.count is not None else {"horizon": cfg.horizon},
            "size": len(g), "status": g.status, "underflows": g.underflows,
            "explosion_suspected": g.explosion_suspected,
        })
    elif cfg.command == "certify":
        _certify(cfg, seq, out)
    elif cfg.command == "couple":
        report = coupling_test(WeightFunction.parse(cfg.weight), cfg.n, cfg.reps, cfg.seed, workers)
        io.write_json(out / "coupling.json", report.to_dict())
    elif cfg.command == "probe":
        probe = cmj.explosion_probe(seq, cfg.count, cfg.horizons, cfg.reps, cfg.seed, workers)
        io.probe_csv(out / "probe.csv", probe)
    elif cfg.command == "report":
        _report(cfg, seq, out, workers)
    return EXIT_OK


def _report(cfg: RunConfig, seq: RateSequence, out: Path, workers: int):
    lines = [f"# Run report: {seq.kind}", "", f"rates: `{json.dumps(cfg.rates, sort_keys=True)}`",
             f"seed: {cfg.seed}", ""]
    g = cmj.simulate(seq, Count(cfg.count), stream(cfg.seed, 0, PURPOSE_CMJ))
    io.trajectory_csv(out / "trajectory.csv", cmj.tau_trajectory(g))
    lines += ["## Birth-time trajectory", "",
              f"`trajectory.csv`: n, tau_n for {len(g)} individuals; final tau = {float(g.birth_time[-1])!r}", ""]

    reports = {}
    if seq.kind == "pathological":
        cfg.cert = "iii"
        reports["iii"] = _certify(cfg, seq, out, "iii_")
    else:
        for cert in ("i", "ii"):
            cfg.cert = cert
            reports[cert] = _certify(cfg, seq, out, f"{cert}_")
    lines += ["## Certificates", ""]
    for name, rep in reports.items():
        lines.append(f"- condition {name}: **{rep.verdict}** (`{name}_certificate.json`, `{name}_evidence.csv`)")
    lines.append("")

    if seq.kind == "iterlog":
        c, k = seq.params["c"], seq.params["k"]
        lo = max(window_min_n(k), 10 ** 2)
        if lo < 10 ** 7:
            grid = sorted({int(lo), *[n for n in default_grid(2, 7, 2) if n >= lo]})
            table = iterated_log_window(c, k, grid)
            io.window_csv(out / "window.csv", table)
            lines += ["## Window sums", "", "`window.csv`: n, exact, asymptotic, ratio", "", f"_{table.note}_", ""]

    probe = cmj.explosion_probe(seq, cfg.count, cfg.horizons, cfg.reps, cfg.seed, workers)
    io.probe_csv(out / "probe.csv", probe)
    if seq.kind == "pathological":
        main = reports["iii"]
    elif reports["i"].certified:
        main = reports["i"]
    else:
        main = reports["ii"]
    summary = certificate_vs_simulation(seq, main, probe)
    io.write_json(out / "consistency.json", summary)
    lines += ["## Simulation cross-check", "", "`probe.csv`: horizon, probability, se",
              f"consistency: {summary['message']}", ""]
    for flag in summary["flags"]:
        lines.append(f"- {flag}")
    (out / "report.md").write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RateRangeError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except AssertionError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
