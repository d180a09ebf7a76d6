"""Command-line entry point: region boundaries, equality maps, simulations, checks.

Exit codes: 0 success, 1 property failure, 2 usage error, 3 resource guard.
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

import numpy as np

from . import discrete_mac as dm
from . import fock, gram_decoder, lemmas, rates, typicality
from .errors import ResourceError, TruncationError

EXIT_OK, EXIT_PROPERTY, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
DEFAULT_MAP_ETAS = (0.5, 0.8)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Numbers with 12 significant digits; booleans as 0/1."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _round(obj):
    """Same rounding as ``fmt`` but keeping JSON types."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    params: rates.ChannelParams | None = None
    grid: tuple[float, float, int] = (0.0, 20.0, 50)
    etas: tuple[float, ...] = DEFAULT_MAP_ETAS
    sim: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str | None = None
    fmt: str = "csv"

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        if ns.seed < 0 or ns.seed >= 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if ns.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = cls(ns.command, seed=ns.seed, threads=ns.threads, out=ns.out, fmt=ns.format)
        try:
            if ns.command in ("region", "simulate"):
                cfg.params = rates.ChannelParams(ns.eta, ns.nsa, ns.nsb)
            if ns.command == "map":
                if ns.steps < 1 or ns.max < ns.min or ns.min < 0:
                    raise UsageError("grid needs 0 <= --min <= --max and --steps >= 1")
                cfg.grid = (ns.min, ns.max, ns.steps)
                cfg.etas = tuple(ns.eta_values)
                for eta in cfg.etas:
                    rates.ChannelParams(eta, 0.0, 0.0)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if ns.command == "simulate":
            ns_list = _int_list(ns.n)
            if any(n < 1 for n in ns_list) or ns.codebooks < 1 or (ns.trials is not None and ns.trials < 1):
                raise UsageError("--n, --codebooks and --trials must be positive")
            if any(r < 0 for r in ns.rates):
                raise UsageError("--rates must be nonnegative")
            if ns.mode == "discrete" and not ns.mac:
                raise UsageError("--mode discrete needs --mac FILE (or 'xor')")
            cfg.sim = {"mode": ns.mode, "rates": tuple(ns.rates), "n": ns_list, "codebooks": ns.codebooks,
                       "trials": ns.trials, "mac": ns.mac, "exact": ns.exact}
        if ns.command == "verify":
            if ns.samples is not None and ns.samples < 1:
                raise UsageError("--samples must be >= 1")
            cfg.sim = {"suite": ns.suite, "samples": ns.samples}
        return cfg


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")


def _channel(p: argparse.ArgumentParser):
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--nsa", type=float, default=1.0)
    p.add_argument("--nsb", type=float, default=1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bosonic-mac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.commands = sub.choices

    p = sub.add_parser("region", help="vertices of all rate regions for one channel")
    _channel(p)
    _common(p)

    p = sub.add_parser("map", help="where the min-entropy hull equals the capacity region")
    p.add_argument("--eta", dest="eta_values", type=float, nargs="+", default=list(DEFAULT_MAP_ETAS))
    p.add_argument("--min", type=float, default=0.0)
    p.add_argument("--max", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=50, help="grid points per axis")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo error of the sequential decoder")
    p.add_argument("--mode", choices=("bosonic", "discrete"), default="bosonic")
    _channel(p)
    p.add_argument("--mac", default=None, help="pure-state MAC JSON file, or 'xor'")
    p.add_argument("--rates", type=float, nargs=2, default=[0.0, 0.0], metavar=("R1", "R2"))
    p.add_argument("--n", default="4", help="comma-separated block lengths")
    p.add_argument("--codebooks", type=int, default=20)
    p.add_argument("--trials", type=int, default=None,
                   help="message pairs per codebook (default: all pairs exactly in discrete mode, 100 in bosonic)")
    p.add_argument("--exact", action="store_true", help="bosonic: average exact errors instead of sampled outcomes")
    _common(p)

    p = sub.add_parser("verify", help="randomized property and oracle checks")
    p.add_argument("--suite", choices=("lemmas", "typicality", "oracles", "all"), default="all")
    p.add_argument("--samples", type=int, default=None)
    _common(p)
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise UsageError("config must be a JSON object")
        overrides.pop("command", None)
        known = vars(ns)
        alias = {"eta": "eta_values"} if ns.command == "map" else {}
        for key, value in overrides.items():
            dest = alias.get(key, key.replace("-", "_"))
            if dest not in known or dest == "config":
                raise UsageError(f"unknown config key {key!r} for command {ns.command}")
        # explicit command-line flags win over the file
        parser.commands[ns.command].set_defaults(**{alias.get(k, k.replace("-", "_")): v for k, v in overrides.items()})
        ns = parser.parse_args(argv)
        if ns.command == "map" and not isinstance(ns.eta_values, list):
            ns.eta_values = [ns.eta_values]
    return ns


# -- commands ---------------------------------------------------------------------


def region_rows(p: rates.ChannelParams) -> list[tuple]:
    m1, m2 = rates.seq_regions(p)
    regions = [
        ("yen_shapiro", rates.region_geometry(rates.yen_shapiro_region(p))),
        ("min_entropy_1", rates.region_geometry(m1)),
        ("min_entropy_2", rates.region_geometry(m2)),
        ("hull", rates.hull_region(m1, m2)),
        ("heterodyne_baseline", rates.region_geometry(rates.baseline_region(p, "heterodyne"))),
        ("homodyne_baseline", rates.region_geometry(rates.baseline_region(p, "homodyne"))),
    ]
    return [(name, i, v[0], v[1]) for name, poly in regions for i, v in enumerate(poly.vertices)]


def region_command(cfg: RunConfig) -> tuple[dict[str | None, str], int]:
    rows = region_rows(cfg.params)
    if cfg.fmt == "csv":
        return {cfg.out: to_csv(("region", "vertex_index", "r1_bits", "r2_bits"), rows)}, EXIT_OK
    regions: dict[str, list] = {}
    for name, _, r1, r2 in rows:
        regions.setdefault(name, []).append([r1, r2])
    body = {"params": cfg.params.as_dict(), "equality": rates.equality_conditions(cfg.params), "regions": regions}
    return {cfg.out: to_json(body)}, EXIT_OK


def map_rows(eta: float, lo: float, hi: float, steps: int) -> list[tuple]:
    axis = np.linspace(lo, hi, steps)
    grid = [(float(a), float(b)) for a in axis for b in axis]
    return [(a, b, int(eq)) for a, b, eq in rates.equality_map(eta, grid)]


def _per_eta_path(out: str, eta: float) -> str:
    if "{eta}" in out:
        return out.replace("{eta}", fmt(eta))
    root, ext = os.path.splitext(out)
    return f"{root}_eta{fmt(eta)}{ext}"


def map_command(cfg: RunConfig) -> tuple[dict[str | None, str], int]:
    lo, hi, steps = cfg.grid
    tables = {eta: map_rows(eta, lo, hi, steps) for eta in cfg.etas}
    if cfg.out is not None:
        outputs = {}
        for eta, rows in tables.items():
            path = _per_eta_path(cfg.out, eta)
            if cfg.fmt == "csv":
                outputs[path] = to_csv(("nsa", "nsb", "equal"), rows)
            else:
                outputs[path] = to_json({"eta": eta, "rows": [list(r) for r in rows]})
        return outputs, EXIT_OK
    if cfg.fmt == "csv":
        rows = [(eta,) + r for eta, tab in tables.items() for r in tab]
        return {None: to_csv(("eta", "nsa", "nsb", "equal"), rows)}, EXIT_OK
    return {None: to_json([{"eta": eta, "rows": [list(r) for r in tab]} for eta, tab in tables.items()])}, EXIT_OK


def load_mac(spec: str) -> dm.PureStateMAC:
    if spec == "xor":
        return dm.xor_mac()
    try:
        with open(spec, encoding="utf-8") as fh:
            return dm.PureStateMAC.from_json(fh.read())
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load MAC from {spec}: {exc}") from exc


def simulate_command(cfg: RunConfig) -> tuple[dict[str | None, str], int]:
    s = cfg.sim
    reports, estimates = [], []
    if s["mode"] == "bosonic":
        trials = s["trials"] or 100
        for n in s["n"]:
            est = gram_decoder.monte_carlo_error(
                cfg.params, s["rates"], n, s["codebooks"], trials, cfg.seed,
                sample_outcomes=not s["exact"], workers=cfg.threads,
            )
            estimates.append(est)
            reports.append(gram_decoder.simulation_report(cfg.params.as_dict(), s["rates"], n, est))
    else:
        mac = load_mac(s["mac"])
        dists = dm.InputDists.uniform(mac)
        info = {"mac": s["mac"], "dx": mac.dx, "dy": mac.dy, "d": mac.d}
        for n in s["n"]:
            est = dm.simulate_sequential(mac, dists, s["rates"], n, s["codebooks"], cfg.seed,
                                         trials_per=s["trials"], workers=cfg.threads)
            estimates.append(est)
            reports.append(gram_decoder.simulation_report(info, s["rates"], n, est))
    for rep, est in zip(reports, estimates):
        L, M = est.sizes
        rep["L"], rep["M"] = L, M
        rep["realized_rates"] = [math.log2(L) / rep["n"], math.log2(M) / rep["n"]]
    trend = "N/A" if len(estimates) < 2 else ("PASS" if dm.decreasing_at_confidence(estimates) else "FAIL")
    violations = sum(e.sen_bound_violations for e in estimates)
    code = EXIT_PROPERTY if violations else EXIT_OK
    if cfg.fmt == "json":
        return {cfg.out: to_json({"mode": s["mode"], "seed": cfg.seed, "results": reports, "trend": trend})}, code
    rows = [(r["n"], r["L"], r["M"], r["K"], r["error_mean"], r["error_stderr"], r["sen_bound_violations"], trend)
            for r in reports]
    header = ("n", "L", "M", "K", "error_mean", "error_stderr", "sen_bound_violations", "trend")
    return {cfg.out: to_csv(header, rows)}, code


# -- verification suites ----------------------------------------------------------


def suite_lemmas(samples: int, seed: int) -> list[dict]:
    return [
        {"check": r.lemma, "passed": r.passed, "samples": r.samples, "violations": r.violations,
         "worst_margin": r.worst_margin, "failures": r.failures}
        for r in lemmas.run_all(samples, seed)
    ]


TYPICALITY_CASES = (
    ("qubit", (0.7, 0.3)),
    ("qubit_skewed", (0.9, 0.1)),
    ("qutrit", (0.5, 0.3, 0.2)),
    ("qutrit_degenerate", (0.4, 0.3, 0.3)),
)


def _rotated(spectrum, rng) -> np.ndarray:
    u = lemmas.haar_unitary(len(spectrum), rng)
    return (u * np.asarray(spectrum)) @ u.conj().T


def suite_typicality(seed: int, ns=(2, 4, 6, 8), deltas=(0.05, 0.1, 0.2, 0.3)) -> list[dict]:
    """Rank bound and eigenvalue sandwich on every instance; dense checks when small."""
    rng = np.random.default_rng(seed)
    out = []
    for name, spec in TYPICALITY_CASES:
        rho = _rotated(spec, rng)
        d = len(spec)
        other = _rotated(rng.dirichlet(np.ones(d)), rng)
        for n in ns:
            for delta in deltas:
                projs = [("unconditional", typicality.typical_projector(rho, n, delta))]
                xn = rng.integers(2, size=n)
                projs.append(("conditional", typicality.cond_typical_projector([rho, other], [0.5, 0.5], xn, delta)))
                for kind, P in projs:
                    ok = P.rank_ok() and P.sandwich_ok()
                    dense = None
                    if P.dim <= 256:
                        dense = P.dense_checks()
                        ok = ok and dense["idempotent"] and dense["lower_ok"] and dense["upper_ok"]
                        ok = ok and abs(dense["trace"] - P.rank) < 1e-8 and abs(dense["mass"] - P.mass) < 1e-9
                    out.append({"check": f"typical_{kind}", "case": name, "n": n, "delta": delta,
                                "rank": P.rank, "rank_bound": P.rank_bound, "mass": P.mass, "passed": bool(ok)})
    return out


def random_oracle_instance(rng: np.random.Generator, max_n: int = 2, max_k: int = 4, radius: float = 2.0):
    n = int(rng.integers(1, max_n + 1))
    K = int(rng.integers(1, max_k + 1))
    r = radius * np.sqrt(rng.random((K, n)))
    return r * np.exp(2j * np.pi * rng.random((K, n)))


def suite_oracles(samples: int, seed: int) -> list[dict]:
    """Gram decoder against the truncated Fock receiver, plus closed forms."""
    policy = fock.TruncationPolicy(60, 1e-10)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        g = random_oracle_instance(rng)
        a = gram_decoder.success_probabilities(gram_decoder.gram_from_amplitudes(g))
        b = fock.chain_success_probabilities(g, policy)
        worst = max(worst, float(np.max(np.abs(a - b))))
    out = [{"check": "gram_vs_fock", "instances": samples, "max_abs_diff": worst, "passed": worst <= 1e-6}]

    two = np.array([[0.0], [1.0]])
    target = (1 - math.exp(-1)) ** 2
    pg = float(gram_decoder.success_probabilities(gram_decoder.gram_from_amplitudes(two))[1])
    pf = float(fock.chain_success_probabilities(two, policy)[1])
    out.append({"check": "two_pair_closed_form", "gram": pg, "fock": pf, "expected": target,
                "passed": abs(pg - target) <= 1e-12 and abs(pf - target) <= 1e-5})

    wide = fock.TruncationPolicy(200, 1e-12)
    thermal_err = max(abs(fock.von_neumann_entropy(fock.thermal_state(N, wide)) - rates.g_function(N))
                      for N in (0.1, 0.5, 1.0, 2.0, 5.0))
    out.append({"check": "thermal_entropy_g", "max_abs_diff": thermal_err, "passed": thermal_err <= 1e-4})

    tau = fock.thermal_state(1.0, policy)
    hm = [fock.min_entropy(fock.displaced(tau, a, policy)) for a in (0.0, 0.5, 1.0 + 1.0j, 2.0)]
    dev = max(abs(h - 1.0) for h in hm)
    out.append({"check": "displaced_thermal_min_entropy", "max_abs_diff": dev, "passed": dev <= 1e-5})
    return out


def verify_command(cfg: RunConfig) -> tuple[dict[str | None, str], int]:
    suite, samples = cfg.sim["suite"], cfg.sim["samples"]
    results = []
    if suite in ("lemmas", "all"):
        results += suite_lemmas(samples or 10_000, cfg.seed)
    if suite in ("typicality", "all"):
        results += suite_typicality(cfg.seed)
    if suite in ("oracles", "all"):
        results += suite_oracles(samples or 100, cfg.seed)
    passed = all(r["passed"] for r in results)
    code = EXIT_OK if passed else EXIT_PROPERTY
    if cfg.fmt == "json":
        return {cfg.out: to_json({"suite": suite, "seed": cfg.seed, "passed": passed, "results": results})}, code
    rows = []
    for r in results:
        detail = {k: v for k, v in r.items() if k not in ("check", "passed", "failures")}
        rows.append((r["check"], r["passed"], json.dumps(_round(detail), sort_keys=True)))
    return {cfg.out: to_csv(("check", "passed", "detail"), rows)}, code


COMMANDS = {"region": region_command, "map": map_command, "simulate": simulate_command, "verify": verify_command}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = RunConfig.from_namespace(parse_args(argv))
        outputs, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ResourceError, TruncationError) as exc:
        print(f"resource limit: {exc}", file=stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    for path, text in outputs.items():
        if path is None:
            stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
