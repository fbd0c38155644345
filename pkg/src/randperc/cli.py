"""Command-line front end.

Subcommands
-----------
dist-stats     statistics (mean, std, mean abs. difference, E[min], C, penalty)
pdl            PDL and induced SCP density tables plus mean-SCP summary
percolate      spanning probabilities, sweeps, thresholds, shape comparisons
qswap-penalty  post-swap bond SCP and RCEP vs RQEP on a double-bond honeycomb

Outputs are UTF-8 CSV/JSON written with ``repr`` floats, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from randperc import distributions as dmod
from randperc.config import ExperimentConfig
from randperc.distributions import ConfigError

GRID_POINTS = 512
P_RANGE = (0.0, 10.0)
X_RANGE = (0.001, 0.999)
FIG1_CHAIN_N = 200
# tolerances for comparing model mean SCPs with the reference values
REFERENCE_TOL = {"maxwellian": 0.02, "weak-element-chain": 0.02, "concatenated-link": 0.005}


# output helpers


def _num(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"ragged row in {path.name}")
            w.writerow([_num(v) for v in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


# dist-stats


def table1_rows():
    """Reference rows: a distribution plus the closed forms it should match."""
    s3, spi = math.sqrt(3.0), math.sqrt(math.pi)
    rows = []
    mu, sig = 0.5, 0.1
    rows.append(("uniform", dmod.Uniform.from_mean_std(mu, sig),
                 {"expected_min": mu - sig / s3, "shape_constant": 1 / s3, "penalty": sig / s3}))
    mu, sig = 0.5, 0.05
    rows.append(("gaussian", dmod.TruncatedGaussian(mu, sig),
                 {"expected_min": mu - sig / spi, "shape_constant": 1 / spi, "penalty": sig / spi}))
    mu = 0.3
    rows.append(("bernoulli", dmod.Bernoulli(mu),
                 {"expected_min": mu * mu, "shape_constant": None, "penalty": mu * (1 - mu)}))
    mu, sig = 0.5, 0.2
    rows.append(("symmetric-bimodal", dmod.SymmetricBimodal(mu, sig),
                 {"expected_min": mu - sig / 2, "shape_constant": 0.5, "penalty": sig / 2}))
    a, b = 2.0, 5.0
    ratio = math.exp(dmod.special.betaln(2 * a, 2 * b) - 2 * dmod.special.betaln(a, b))
    c_beta = 2 * math.sqrt(a + b + 1) * ratio / math.sqrt(a * b)
    rows.append(("beta(2,5)", dmod.Beta(a, b),
                 {"expected_min": dmod.beta_expected_min(a, b), "shape_constant": c_beta,
                  "penalty": 2 * ratio / (a + b)}))
    rows.append(("haar", dmod.Haar(),
                 {"expected_min": 1 / 7, "shape_constant": math.sqrt(15) / 7, "penalty": 3 / 28}))
    return rows


def _stats_row(name, dist, closed=None):
    st = dmod.stats(dist)
    row = {"name": name, "distribution": dist.describe(), **st.as_dict()}
    if isinstance(dist, dmod.TruncatedGaussian) and dist.tail_mass() >= dmod.GAUSSIAN_TAIL_LIMIT:
        closed = None  # closed forms assume negligible truncation
    if closed is not None:
        row["closed_form"] = closed
        errs = [abs(row[k] - v) for k, v in closed.items() if v is not None]
        row["max_abs_error"] = max(errs)
    return row


def cmd_dist_stats(cfg: ExperimentConfig, out: Path | None) -> dict:
    rows = []
    if cfg.reproduce_table1:
        rows += [_stats_row(n, d, c) for n, d, c in table1_rows()]
    for spec in cfg.distributions:
        dist = dmod.from_config(spec)
        rows.append(_stats_row(dist.kind, dist))
    if not rows:
        raise ConfigError("no distributions configured (use --reproduce-table1 or a config)")
    cols = ["mean", "std", "mean_abs_diff", "expected_min", "shape_constant", "penalty"]
    print(f"{'name':<20}" + "".join(f"{c:>15}" for c in cols))
    for r in rows:
        cells = "".join(f"{'---':>15}" if r[c] is None else f"{r[c]:>15.6f}" for c in cols)
        print(f"{r['name']:<20}{cells}")
    result = {"rows": rows, "config_hash": cfg.config_hash()}
    if out is not None:
        write_csv(out / "dist_stats.csv", ["name", "distribution", *cols],
                  [[r["name"], r["distribution"], *(r[c] for c in cols)] for r in rows])
        write_json(out / "dist_stats.json", result)
    return result


# pdl


def fig1_models(seed: int):
    from randperc import pdl as pmod

    return [
        ("maxwellian", pmod.MaxwellianPdl(pmod.MATCHED_MEAN_DB)),
        ("weak-element-chain", pmod.weak_element_chain(pmod.MATCHED_MEAN_DB, FIG1_CHAIN_N, seed=seed)),
        ("concatenated-link", pmod.ConcatenatedLink(pmod.LIN_JIANG_ELEMENTS_DB)),
    ]


def _model_summary(name, model, samples, seed, P=None):
    from randperc import pdl as pmod

    if model.has_density:
        mu, err = pmod.mean_scp(model)
    else:
        x = pmod.scp_from_pdl(P)
        mu, err = float(x.mean()), float(x.std(ddof=1) / math.sqrt(P.size))
    summary = {"name": name, "config": model.to_config(), "parameterization": model.describe(),
               "mean_scp": mu, "mean_scp_error": err,
               "method": "quadrature" if model.has_density else "monte-carlo",
               "density_method": "analytic" if model.has_density else "histogram-estimate"}
    if model.has_density:
        summary["mean_pdl_db"] = model.mean_db
        summary["scale_a_db"] = model.a
    else:
        summary["mean_pdl_db"] = float(P.mean())
        summary["mean_pdl_stderr_db"] = float(P.std(ddof=1) / math.sqrt(P.size))
    summary["weak_pdl_approx"] = pmod.weak_pdl_mean_approx(summary["mean_pdl_db"])
    ref = pmod.REFERENCE_MEAN_SCP.get(model.kind)
    if ref is not None:
        tol = REFERENCE_TOL[model.kind]
        summary.update(reference_mean_scp=ref, discrepancy=mu - ref, tolerance=tol,
                       within_tolerance=abs(mu - ref) <= tol)
        if abs(mu - ref) > tol:
            summary["note"] = (f"mean SCP {mu:.4f} differs from the reference {ref} by {mu - ref:+.4f} "
                               f"under the parameterization {model.describe()}")
    return summary


def _bin_edges(lo, hi, n):
    h = (hi - lo) / (n - 1)
    return np.linspace(lo - h / 2, hi + h / 2, n + 1)


def cmd_pdl(cfg: ExperimentConfig, out: Path | None) -> dict:
    from randperc import pdl as pmod

    models = fig1_models(cfg.seed) if cfg.reproduce_fig1 else []
    for spec in cfg.pdl_models:
        m = pmod.from_config(spec)
        models.append((spec.get("name", m.kind), m))
    if not models:
        raise ConfigError("no PDL models configured (use --reproduce-fig1 or a config)")
    P_grid = np.linspace(*P_RANGE, GRID_POINTS)
    x_grid = np.linspace(*X_RANGE, GRID_POINTS)
    x_cdf = np.append(x_grid, 1.0)
    summaries = []
    for name, model in models:
        if model.has_density:
            summ = _model_summary(name, model, cfg.samples, cfg.seed)
            fP, fX = model.pdf(P_grid), pmod.induced_scp_density(model, x_grid)
            Pc, xc = P_grid, x_grid
            Fx = pmod.PdlInduced(model).cdf(x_cdf)
        else:
            # one sample array feeds every estimate for this model
            P = pmod.sample_pdl(model, cfg.samples, cfg.seed)
            summ = _model_summary(name, model, cfg.samples, cfg.seed, P)
            X = pmod.scp_from_pdl(P)
            Pc, fP = pmod.histogram_density(P, _bin_edges(*P_RANGE, GRID_POINTS))
            xc, fX = pmod.histogram_density(X, _bin_edges(*X_RANGE, GRID_POINTS))
            Fx = np.searchsorted(np.sort(X), x_cdf, side="right") / X.size
        summ["scp_density_trapezoid_mass"] = float(np.trapezoid(fX, xc))
        summaries.append(summ)
        print(f"{name:<20} mean SCP {summ['mean_scp']:.5f} +- {summ['mean_scp_error']:.1e}  "
              f"({summ['parameterization']})")
        if "note" in summ:
            print(f"  note: {summ['note']}")
        if out is not None:
            write_csv(out / f"pdl_density_{name}.csv", ["P", "f_P"], zip(Pc, fP))
            write_csv(out / f"scp_density_{name}.csv", ["x", "f_X"], zip(xc, fX))
            write_csv(out / f"scp_cdf_{name}.csv", ["x", "F_X"], zip(x_cdf, Fx))
    result = {"models": summaries, "seed": cfg.seed, "samples": cfg.samples, "config_hash": cfg.config_hash()}
    if out is not None:
        write_json(out / "pdl_summary.json", result)
    return result


# percolate


def _lattice(cfg: ExperimentConfig):
    from randperc.lattice import build_lattice

    spec = cfg.lattice
    return build_lattice(spec.get("kind", "square"), int(spec.get("L", 64)),
                         double_bonds=bool(spec.get("double_bonds", False)),
                         boundary_mode=spec.get("boundary_mode", "open"))


def _source(spec):
    from randperc import pdl as pmod

    if spec is None:
        raise ConfigError("percolate needs a source: {'fixed_p': p} or a distribution config")
    if "fixed_p" in spec:
        return float(spec["fixed_p"])
    if spec.get("kind") in ("maxwellian", "concatenated-link", "weak-element-chain"):
        return pmod.from_config(spec)
    return dmod.from_config(spec)


COMPARE_FAMILIES = [{"kind": "bernoulli"}, {"kind": "uniform", "half_width": 0.1},
                    {"kind": "beta", "concentration": 10.0}]


def cmd_percolate(cfg: ExperimentConfig, out: Path | None) -> dict:
    from randperc import percolation as perc

    lat = _lattice(cfg)
    h = cfg.config_hash()
    result = {"config_hash": h, "lattice": lat.descriptor(), "mode": cfg.mode}
    curve_rows = []
    if cfg.threshold:
        fam = perc.make_family(cfg.family)
        spec = cfg.lattice
        th = perc.threshold_estimate(spec.get("kind", "square"), int(spec.get("L", 64)), fam, cfg.mode, cfg.trials,
                                     cfg.seed, double_bonds=bool(spec.get("double_bonds", False)),
                                     workers=cfg.workers)
        result["threshold"] = th.as_dict()
        curve_rows += [("threshold", p["x"], p["y"], p["yerr"]) for p in result["threshold"]["points"]]
        print(f"threshold mu_c = {th.mu_c:.5f}  ci = [{th.ci[0]:.5f}, {th.ci[1]:.5f}]")
    elif cfg.compare_shapes or cfg.grid is not None:
        fams = COMPARE_FAMILIES if cfg.compare_shapes else [cfg.family or {"kind": "fixed"}]
        if cfg.grid is not None:
            xs = np.linspace(cfg.grid["start"], cfg.grid["stop"], int(cfg.grid["num"]))
        else:
            xs = [float(cfg.source["fixed_p"]) if cfg.source and "fixed_p" in cfg.source else 0.55]
        records = []
        for fspec in fams:
            fam = perc.make_family(fspec)
            for x in xs:
                est = perc.spanning_probability(lat, fam(float(x)), cfg.mode, cfg.trials, cfg.seed,
                                                workers=cfg.workers, disorder=cfg.disorder)
                records.append({**est.to_record(h), "x": float(x), "family": fspec["kind"]})
                curve_rows.append((fspec["kind"], float(x), est.spanning_probability, est.stderr))
        result["records"] = records
        if cfg.compare_shapes:
            z = {}
            for i, r1 in enumerate(records):
                for r2 in records[i + 1:]:
                    if r1["x"] == r2["x"]:
                        se = math.hypot(r1["stderr"], r2["stderr"])
                        key = f"{r1['family']}~{r2['family']}@{r1['x']:g}"
                        z[key] = abs(r1["estimate"] - r2["estimate"]) / se if se > 0 else 0.0
            result["pairwise_z"] = z
            result["agree_within_4_sigma"] = all(v <= 4.0 for v in z.values())
        for r in records:
            print(f"{r['family']:<10} x={r['x']:.4f}  P_span={r['estimate']:.4f} +- {r['stderr']:.4f}")
    else:
        src = _source(cfg.source)
        est = perc.spanning_probability(lat, src, cfg.mode, cfg.trials, cfg.seed, workers=cfg.workers,
                                        disorder=cfg.disorder)
        result["records"] = [est.to_record(h)]
        print(f"P_span = {est.spanning_probability:.5f} +- {est.stderr:.5f} ({est.distribution}, {cfg.mode})")
        if cfg.mode == "rqep" and not isinstance(src, float):
            mean, se, pairs = perc.post_swap_bond_mean(lat, src, min(max(cfg.trials, 2), 200), cfg.seed)
            result["post_swap_bond_mean"] = {"mean": mean, "stderr": se, "pairs": pairs}
            print(f"post-swap bond mean SCP = {mean:.5f} +- {se:.5f} over {pairs} bonds")
    if out is not None:
        write_json(out / "percolate.json", result)
        if curve_rows:
            write_csv(out / "percolate_curve.csv", ["series", "x", "y", "yerr"], curve_rows)
    return result


def cmd_qswap_penalty(cfg: ExperimentConfig, out: Path | None) -> dict:
    from randperc import percolation as perc
    from randperc.lattice import build_lattice

    L = int(cfg.lattice.get("L", 16))
    lat = build_lattice("honeycomb", L, double_bonds=True, boundary_mode=cfg.lattice.get("boundary_mode", "open"))
    dists = [dmod.from_config(d) for d in cfg.distributions] or [dmod.Haar()]
    reports = []
    for dist in dists:
        rep = perc.rqep_penalty_experiment(lat, dist, cfg.trials, cfg.seed)
        reports.append(rep.as_dict())
        print(f"{rep.distribution:<28} post-swap mean {rep.post_swap_mean:.5f} +- {rep.post_swap_stderr:.5f}"
              f"  E[min] {rep.expected_min:.5f}  RCEP {rep.rcep.spanning_probability:.3f}"
              f"  RQEP {rep.rqep.spanning_probability:.3f}")
    result = {"reports": reports, "config_hash": cfg.config_hash()}
    if out is not None:
        write_json(out / "qswap_penalty.json", result)
    return result


COMMANDS = {"dist-stats": cmd_dist_stats, "pdl": cmd_pdl, "percolate": cmd_percolate,
            "qswap-penalty": cmd_qswap_penalty}


def _grid(text):
    try:
        start, stop, num = text.split(":")
        return {"start": float(start), "stop": float(stop), "num": int(num)}
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be START:STOP:NUM") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randperc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--samples", type=int, help="Monte Carlo samples for PDL sampler models")
        p.add_argument("--workers", type=int)
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--mode", choices=["rcep", "rqep"])
        p.add_argument("--disorder", choices=["annealed", "quenched"])
        p.add_argument("--lattice", choices=["square", "triangular", "honeycomb"])
        p.add_argument("--size", type=int, help="lattice side L")
        p.add_argument("--double-bonds", action="store_true", default=None)
        p.add_argument("--p", type=float, help="fixed SCP (percolate)")
        p.add_argument("--grid", type=_grid, help="sweep START:STOP:NUM (percolate)")
        p.add_argument("--threshold", action="store_true", default=None)
        p.add_argument("--compare-shapes", action="store_true", default=None)
        p.add_argument("--reproduce-table1", action="store_true", default=None)
        p.add_argument("--reproduce-fig1", action="store_true", default=None)
    return parser


def resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = ExperimentConfig.from_json(text)
    else:
        cfg = ExperimentConfig()
        if args.command == "qswap-penalty":
            cfg.lattice = {"kind": "honeycomb", "L": 16, "double_bonds": True}
    cfg.experiment = args.command
    for flag in ("seed", "trials", "samples", "workers", "mode", "disorder", "grid", "threshold",
                 "compare_shapes", "reproduce_table1", "reproduce_fig1"):
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg, flag, v)
    if args.lattice is not None:
        cfg.lattice = {**cfg.lattice, "kind": args.lattice}
    if args.size is not None:
        cfg.lattice = {**cfg.lattice, "L": args.size}
    if args.double_bonds:
        cfg.lattice = {**cfg.lattice, "double_bonds": True}
    if args.p is not None:
        cfg.source = {"fixed_p": args.p}
    if args.out is not None:
        cfg.out = str(args.out)
    cfg = ExperimentConfig.from_dict(cfg.to_dict())
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out) if cfg.out else None
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            # the output directory is left out so reruns elsewhere stay byte-identical
            saved = {k: v for k, v in cfg.to_dict().items() if k != "out"}
            write_json(out / "config.json", saved)
        COMMANDS[args.command](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: could not write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
