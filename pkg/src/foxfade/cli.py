"""foxfade command line: curves, sweeps and samples to CSV, plus self-verification.

Exit codes: 0 success, 1 numerical failure (diagnostic on stderr), 2 usage error.
Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines whose
keys are the long flag names (rhat = 1.5, tol-rel = 1e-7); flags given on the
command line win over the file. Without --out the CSV goes to
$FOXFADE_OUTPUT_DIR/<command>.csv when that variable is set, else to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, akmu, mc, perf, verify
from .akmu import ChannelParams
from .errors import FoxFadeError, InvalidParameterError, NearSingularError, NumericalFailure
from .foxh import FoxHSpec

ENV_OUT = "FOXFADE_OUTPUT_DIR"

COLUMNS = {
    "pdf": "r, pdf_exact, pdf_series_n<N>, pdf_asymptotic, pdf_oracle",
    "cdf": "r, cdf_exact, cdf_oracle",
    "outage": ("avg_snr_db, outage_exact, outage_asymptotic, outage_printed_asymptotic"
               " [, outage_mc]"),
    "ber": "avg_snr_db, ber_exact, ber_oracle",
    "sample": "r",
    "sweep": ("Pt_dbm, avg_snr_db, outage_exact, outage_asymptotic, ber_exact, ber_oracle,"
              " error"),
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class LinkBudget:
    freq_hz: float = 275e9
    distance_m: float = 50.0
    gains_dbi: tuple[float, float] = (40.0, 40.0)
    absorption_db_per_m: float = 0.0
    noise_floor_dbm: float = -80.0


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs, resolved from config file and flags."""

    command: str
    channel: ChannelParams | None = None
    grid: np.ndarray | None = field(default=None, compare=False)
    out: str | None = None
    seed: int = 1
    tol_rel: float = 1e-6
    tol_im: float = 1e-8
    modulation: str = "bpsk"
    threshold_db: float = 0.0
    link: LinkBudget = LinkBudget()
    options: dict = field(default_factory=dict)

    @property
    def tolerances(self) -> dict:
        return {"tol_rel": self.tol_rel, "tol_im": self.tol_im}

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Build from parsed arguments; invalid channel parameters raise InvalidParameterError."""
        ns = dict(vars(args))
        channel = None
        if "alpha" in ns:
            channel = ChannelParams(*(ns.pop(k) for k in
                                      ("alpha", "eta", "kappa", "mu", "p", "q", "rhat")))
        grid = ns.pop("grid", None)
        if grid is None:
            grid = ns.pop("pt_grid", None)
        link = LinkBudget(ns.pop("freq", 275e9), ns.pop("distance", 50.0),
                          (ns.pop("gain_tx", 40.0), ns.pop("gain_rx", 40.0)),
                          ns.pop("absorption", 0.0), ns.pop("noise_floor", -80.0))
        known = {k: ns.pop(k) for k in ("out", "seed", "tol_rel", "tol_im", "modulation",
                                        "threshold_db") if k in ns}
        command = ns.pop("command")
        ns.pop("config", None)
        return cls(command, channel, grid, link=link, options=ns, **known)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` -> ``count`` evenly spaced points, count >= 2."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError("grid count must be >= 2")
    return np.linspace(a, b, n)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    v = float(v)
    return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else repr(v))


# parser ----------------------------------------------------------------------------------
def _common(p: argparse.ArgumentParser, channel: bool = True,
            out_help: str = f"CSV path (default ${ENV_OUT}/<command>.csv, else stdout)") -> None:
    p.add_argument("--config", metavar="FILE", help="key = value file; flags win")
    p.add_argument("--out", metavar="PATH", help=out_help)
    if channel:
        g = p.add_argument_group("channel")
        for name, default in (("alpha", 2.0), ("eta", 1.0), ("kappa", 1.0), ("mu", 2.0),
                              ("p", 3.0), ("q", 1.0), ("rhat", 1.0)):
            g.add_argument(f"--{name}", type=float, default=default,
                           help=f"(default {default:g})")
        g.add_argument("--tol-rel", type=float, default=1e-6, help="H-function relative tolerance")
        g.add_argument("--tol-im", type=float, default=1e-8, help="imaginary-residual tolerance")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="foxfade", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"foxfade {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    subs = {}

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text,
                           epilog=f"CSV columns: {COLUMNS[name]}" if name in COLUMNS else None,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        subs[name] = p
        return p

    p = add("pdf", "envelope density curves")
    _common(p)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0.05:3:60"), help="r grid")
    p.add_argument("--series-terms", type=int, default=20)
    p.add_argument("--no-oracle", action="store_true", help="skip the quadrature oracle column")

    p = add("cdf", "envelope distribution curves")
    _common(p)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0.05:3:30"), help="r grid")
    p.add_argument("--no-oracle", action="store_true")

    p = add("outage", "outage probability versus average SNR")
    _common(p)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0:40:41"),
                   help="average SNR grid in dB")
    p.add_argument("--threshold-db", type=float, default=0.0)
    p.add_argument("--mc-samples", type=int, default=0,
                   help="add a Monte-Carlo column from this many samples")
    p.add_argument("--seed", type=int, default=1)

    p = add("ber", "average bit error rate versus average SNR")
    _common(p)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0:30:16"),
                   help="average SNR grid in dB")
    p.add_argument("--modulation", choices=sorted(perf.PRESETS), default="bpsk")

    p = add("sample", "Monte-Carlo envelope samples")
    _common(p)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)

    p = add("sweep", "link-budget sweep over transmit power")
    _common(p)
    p.add_argument("--pt-grid", type=parse_grid, default=parse_grid("-40:0:41"),
                   help="transmit power grid in dBm")
    p.add_argument("--freq", type=float, default=275e9, help="carrier frequency in Hz")
    p.add_argument("--distance", type=float, default=50.0, help="link length in m")
    p.add_argument("--gain-tx", type=float, default=40.0, help="dBi")
    p.add_argument("--gain-rx", type=float, default=40.0, help="dBi")
    p.add_argument("--absorption", type=float, default=0.0, help="dB per m")
    p.add_argument("--noise-floor", type=float, default=-80.0, help="dBm")
    p.add_argument("--threshold-db", type=float, default=0.0)
    p.add_argument("--modulation", choices=sorted(perf.PRESETS), default="bpsk")
    p.add_argument("--no-oracle", action="store_true")

    p = add("verify", "run the acceptance criteria")
    _common(p, channel=False,
            out_help=f"directory for failing H-function specs (default ${ENV_OUT}, else .)")
    p.add_argument("--fast", action="store_true",
                   help=f"only criteria {', '.join(map(str, verify.FAST))}")
    p.add_argument("--only", metavar="N[,N...]", help="comma-separated criterion numbers")
    p.add_argument("--json", metavar="PATH", help="write a machine-readable summary")
    return parser, subs


# config file -----------------------------------------------------------------------------
def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


def apply_config(p: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in p._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in values.items():
        act = actions.get(key)
        if act is None:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} needs a boolean")
            defaults[key] = raw.lower() in ("true", "1", "yes")
            continue
        try:
            val = act.type(raw) if act.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if act.choices is not None and val not in act.choices:
            raise UsageError(f"config key {key!r}: {val!r} not in {sorted(act.choices)}")
        defaults[key] = val
    p.set_defaults(**defaults)


def _config_path(argv: list[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


# output ----------------------------------------------------------------------------------
def _open_out(cfg: RunConfig):
    path = cfg.out
    if path is None and os.environ.get(ENV_OUT):
        path = os.path.join(os.environ[ENV_OUT], f"{cfg.command}.csv")
    if path is None:
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="ascii"), True


def write_csv(cfg: RunConfig, header: list[str], rows) -> None:
    fh, close = _open_out(cfg)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


# commands --------------------------------------------------------------------------------
def cmd_pdf(cfg: RunConfig) -> int:
    P, rs, n = cfg.channel, cfg.grid, cfg.options["series_terms"]
    if np.any(rs <= 0):
        raise InvalidParameterError("pdf grid must be positive")
    try:
        series = akmu.pdf_series(P, rs, n)
    except NearSingularError as exc:
        print(f"foxfade: series column left empty: {exc}", file=sys.stderr)
        series = np.full(rs.shape, np.nan)
    asym = akmu.pdf_asymptotic(P, rs)
    oracle = (np.full(rs.shape, np.nan) if cfg.options["no_oracle"]
              else akmu.pdf_conv_oracle(P, rs))
    rows = [(r, akmu.pdf_exact(P, float(r), **cfg.tolerances), s, a, o)
            for r, s, a, o in zip(rs, series, asym, oracle)]
    write_csv(cfg, ["r", "pdf_exact", f"pdf_series_n{n}", "pdf_asymptotic", "pdf_oracle"], rows)
    return 0


def cmd_cdf(cfg: RunConfig) -> int:
    P, rs = cfg.channel, cfg.grid
    if np.any(rs < 0):
        raise InvalidParameterError("cdf grid must be nonnegative")
    oracle = (np.full(rs.shape, np.nan) if cfg.options["no_oracle"]
              else akmu.cdf_oracle(P, rs))
    rows = [(r, akmu.cdf_exact(P, float(r), **cfg.tolerances), o) for r, o in zip(rs, oracle)]
    write_csv(cfg, ["r", "cdf_exact", "cdf_oracle"], rows)
    return 0


def cmd_outage(cfg: RunConfig) -> int:
    P = cfg.channel
    gth = perf.db_to_linear(cfg.threshold_db)
    header = ["avg_snr_db", "outage_exact", "outage_asymptotic", "outage_printed_asymptotic"]
    batch = None
    if cfg.options["mc_samples"] > 0:
        batch = mc.sample_envelope(P, cfg.options["mc_samples"], cfg.seed)
        header.append("outage_mc")
    rows = []
    for db in cfg.grid:
        link = perf.LinkParams(perf.db_to_linear(db), gth)
        printed, asym = perf.outage_asymptotic(P, link)
        row = [db, perf.outage(P, link, **cfg.tolerances), asym.value(link.avg_snr), printed]
        if batch is not None:
            row.append(mc.outage_fraction(batch, link.avg_snr, gth))
        rows.append(row)
    write_csv(cfg, header, rows)
    return 0


def cmd_ber(cfg: RunConfig) -> int:
    P, mod = cfg.channel, perf.PRESETS[cfg.modulation]
    rows = []
    for db in cfg.grid:
        g = perf.db_to_linear(db)
        rows.append((db, perf.avg_ber(P, mod, g, **cfg.tolerances), perf.ber_oracle(P, mod, g)))
    write_csv(cfg, ["avg_snr_db", "ber_exact", "ber_oracle"], rows)
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    batch = mc.sample_envelope(cfg.channel, cfg.options["n"], cfg.seed,
                               workers=cfg.options["workers"])
    write_csv(cfg, ["r"], ((v,) for v in batch.samples))
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    P, mod, lb = cfg.channel, perf.PRESETS[cfg.modulation], cfg.link
    gth = perf.db_to_linear(cfg.threshold_db)
    rows = []
    for pt in cfg.grid:
        g = perf.link_budget(pt, lb.freq_hz, lb.distance_m, lb.gains_dbi,
                             lb.absorption_db_per_m, lb.noise_floor_dbm)
        row = [pt, perf.linear_to_db(g), None, None, None, None, ""]
        try:
            link = perf.LinkParams(g, gth)
            row[3] = perf.outage_asymptotic(P, link)[1].value(g)
            row[2] = perf.outage(P, link, **cfg.tolerances)
            row[4] = perf.avg_ber(P, mod, g, **cfg.tolerances)
            row[5] = math.nan if cfg.options["no_oracle"] else perf.ber_oracle(P, mod, g)
        except FoxFadeError as exc:
            row[6] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    write_csv(cfg, ["Pt_dbm", "avg_snr_db", "outage_exact", "outage_asymptotic", "ber_exact",
                    "ber_oracle", "error"], rows)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    only, fast, json_path = (cfg.options[k] for k in ("only", "fast", "json"))
    if only:
        try:
            numbers = [int(x) for x in only.split(",") if x.strip()]
        except ValueError:
            raise UsageError("--only takes comma-separated integers") from None
        bad = [k for k in numbers if k not in verify.CRITERIA]
        if bad:
            raise UsageError(f"unknown criteria {bad}")
    else:
        numbers = list(verify.FAST) if fast else sorted(verify.CRITERIA)
    results = verify.run_all(numbers, progress=lambda r: print(r.line(), flush=True))
    npass = sum(r.passed for r in results)
    print(f"{npass}/{len(results)} criteria passed")
    out_dir = Path(cfg.out or os.environ.get(ENV_OUT) or ".")
    for r in results:
        for k, text in enumerate(r.failing_specs):
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / f"verify_c{r.number}_{k}.foxh.json"
            path.write_text(text, encoding="utf-8")
            print(f"failing spec written to {path}", file=sys.stderr)
    if json_path:
        Path(json_path).write_text(json.dumps(
            {"passed": verify.summary_ok(results), "criteria": [r.to_dict() for r in results]},
            indent=2), encoding="utf-8")
    return 0 if verify.summary_ok(results) else 1


COMMANDS = {"pdf": cmd_pdf, "cdf": cmd_cdf, "outage": cmd_outage, "ber": cmd_ber,
            "sample": cmd_sample, "sweep": cmd_sweep, "verify": cmd_verify}


def _glue_negative_grids(argv: list[str]) -> list[str]:
    # argparse reads "-40:0:41" as an option; "--pt-grid=-40:0:41" is unambiguous
    out = []
    for a in argv:
        if out and out[-1] in ("--grid", "--pt-grid") and a.startswith("-") and ":" in a:
            out[-1] = f"{out[-1]}={a}"
        else:
            out.append(a)
    return out


def run(argv=None) -> int:
    argv = _glue_negative_grids(list(sys.argv[1:] if argv is None else argv))
    parser, subs = build_parser()
    cmd = next((a for a in argv if a in subs), None)
    try:
        cfg = _config_path(argv)
        if cfg is not None and cmd is not None:
            apply_config(subs[cmd], read_config(cfg))
        args = parser.parse_args(argv)
    except UsageError as exc:
        (subs[cmd] if cmd else parser).print_usage(sys.stderr)
        print(f"foxfade: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:      # argparse usage errors and --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](RunConfig.from_args(args))
    except (UsageError, InvalidParameterError) as exc:
        subs[args.command].print_usage(sys.stderr)
        print(f"foxfade: error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"foxfade: numerical failure: {exc}", file=sys.stderr)
        diag = dict(exc.diagnostics)
        spec = diag.pop("spec", None)
        print(json.dumps(diag, default=str), file=sys.stderr)
        if spec is not None:
            print(FoxHSpec.from_dict(spec).to_text(), file=sys.stderr)
        return 1
    except FoxFadeError as exc:
        print(f"foxfade: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
