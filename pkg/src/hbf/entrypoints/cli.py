"""
Command-line entry point.

Results go to stdout as `name=value` lines (or CSV with --csv / --out);
errors go to stderr as `error: <kind>: <message>` with exit code 2 for
usage errors, 3 for I/O errors and 4 for data or format errors.

"""

import sys
from typing import Optional, Sequence

import click

from src.hbf import config
from src.hbf.adapters import results
from src.hbf.domain import bounds, commands, model
from src.hbf.domain.exceptions import HbfError
from src.hbf.domain.seeds import derive_seed
from src.hbf.service_layer import experiments, messagebus, unit_of_work

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return results.format_cell(value)


def _echo_pairs(pairs):
    for name, value in pairs:
        click.echo(f"{name}={_fmt(value)}")


def _echo_outcome(outcome: model.DecodeOutcome):
    if isinstance(outcome, model.Hit):
        click.echo(f"label={outcome.label.decode('utf-8', errors='backslashreplace')}")
    else:
        click.echo("BOTTOM")
        if not outcome.top_k:
            return
    _echo_pairs([("s1", outcome.best_score), ("s2", outcome.runner_up)])
    for rank, (label, score) in enumerate(outcome.top_k, start=1):
        click.echo(f"{rank}\t{label.decode('utf-8', errors='backslashreplace')}\t{score!r}")


def _handle(cmd):
    [result] = messagebus.handle(cmd, unit_of_work.FileUnitOfWork())
    return result


@click.group()
def cli():
    """Holographic index: build, query and measure superposed key/value memories."""


# -----
# INDEX
# -----
@cli.command()
@click.option("--input", "input_path", required=True, help="key<TAB>value records")
@click.option("--dim", type=int, default=config.get_default_dim, show_default="4096")
@click.option("--rho", type=float, default=model.DEFAULT_GAIN)
@click.option("--seed", type=int, default=config.get_master_seed)
@click.option("--normalize", is_flag=True, help="store gain rho / sqrt(n)")
@click.option("--labels", "labels_path", help="label universe, one per line")
@click.option("--out", required=True)
def build(input_path, dim, rho, seed, normalize, labels_path, out):
    """Build an index from a records file."""
    records = results.read_records(input_path)
    labels = results.read_labels(labels_path) if labels_path else ()
    index = _handle(
        commands.BuildIndex(
            out,
            records,
            dim,
            rho,
            key_seed=derive_seed(seed, "key-codebook"),
            value_seed=derive_seed(seed, "value-codebook"),
            normalize=normalize,
            labels=labels,
        )
    )
    _echo_pairs(
        [
            ("path", out),
            ("d", index.memory.dim),
            ("n", index.memory.item_count),
            ("labels", len(index.labels)),
        ]
    )


@cli.command()
@click.option("--index", "index_path", required=True)
@click.option("--key", required=True)
@click.option("--value", required=True)
def insert(index_path, key, value):
    """Superpose one more record into an index."""
    cmd = commands.InsertRecord(index_path, key.encode("utf-8"), value.encode("utf-8"))
    count = _handle(cmd)
    _echo_pairs([("n", count)])


@cli.command()
@click.option("--index", "index_path", required=True)
@click.option("--key", required=True)
@click.option("--tau", type=float)
@click.option("--delta", type=float)
@click.option("--top-k", type=int)
@click.option("--eps", type=float, default=config.get_default_eps)
@click.option("--seed", type=int, default=config.get_master_seed)
def query(index_path, key, tau, delta, top_k, eps, seed):
    """Decode one key; prints the label and scores, or BOTTOM."""
    outcome = _handle(
        commands.QueryIndex(index_path, key.encode("utf-8"), tau, delta, top_k, eps, seed)
    )
    _echo_outcome(outcome)


@cli.command()
@click.option("--index", "index_path", required=True)
@click.option("--eps", type=float, default=config.get_default_eps)
@click.option("--seed", type=int, default=config.get_master_seed)
@click.option("--probes", type=int, default=1000)
@click.option("--top-k", type=int, default=model.DEFAULT_TOP_K)
def calibrate(index_path, eps, seed, probes, top_k):
    """Fit tau and delta for an index and store them beside it."""
    decoder = _handle(commands.CalibrateIndex(index_path, eps, seed, probes, top_k))
    _echo_pairs([("tau", decoder.tau), ("delta", decoder.delta), ("top_k", decoder.top_k)])


@cli.command()
@click.option("--index", "index_paths", required=True, multiple=True)
@click.option("--key", required=True)
@click.option("--eps", type=float, default=config.get_default_eps)
@click.option("--seed", type=int, default=config.get_master_seed)
def amplify(index_paths, key, eps, seed):
    """Decode one key in several independent indexes and vote."""
    cmd = commands.AmplifiedQuery(list(index_paths), key.encode("utf-8"), eps, seed)
    outcome = _handle(cmd)
    _echo_outcome(outcome)


# -----------
# EXPERIMENTS
# -----------
def experiment_options(f):
    options = [
        click.option("--config", "config_path", help="TOML experiment manifest"),
        click.option("--dim", type=int),
        click.option("--n", type=int),
        click.option("--label-count", type=int),
        click.option("--rho", type=float),
        click.option("--seed", type=int),
        click.option("--eps", type=float),
        click.option("--trials", type=int),
        click.option("--noise", multiple=True, help="kind:level, e.g. key-hamming:500"),
        click.option("--tau", type=float),
        click.option("--delta", type=float),
        click.option("--top-k", type=int),
        click.option("--probes", type=int),
        click.option("--timings", is_flag=True, default=None),
        click.option("--out"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _experiment_config(params) -> experiments.ExperimentConfig:
    manifest = config.load_manifest(params["config_path"]) if params["config_path"] else {}
    section = manifest.get("experiment", {})
    overrides = dict(
        dim=params["dim"],
        n=params["n"],
        label_count=params["label_count"],
        rho=params["rho"],
        master_seed=params["seed"],
        eps=params["eps"],
        trials=params["trials"],
        noise=list(params["noise"]) or None,
        probe_count=params["probes"],
        top_k=params["top_k"],
        timings=params["timings"],
        out=params["out"],
    )
    if params["tau"] is not None:
        overrides["decoder"] = model.DecoderConfig(
            params["tau"], params["delta"] or 0.0, params["top_k"] or model.DEFAULT_TOP_K
        )
    for name, default in (
        ("dim", config.get_default_dim),
        ("master_seed", config.get_master_seed),
        ("eps", config.get_default_eps),
    ):
        manifest_name = "seed" if name == "master_seed" else name
        if overrides[name] is None and manifest_name not in section and name not in section:
            overrides[name] = default()
    return experiments.ExperimentConfig.from_mapping(manifest, **overrides)


def _run_experiment(kind, cfg, **options):
    result = _handle(commands.RunExperiment(kind, cfg, cfg.out, options))
    if not cfg.out:
        click.echo(results.render_csv(result.columns, result.rows), nl=False)
    else:
        _echo_pairs(result.summary.items())
    return result


@cli.group()
def experiment():
    """Monte Carlo experiments; CSV rows go to --out or stdout."""


@experiment.command("fp")
@experiment_options
def experiment_fp(**params):
    """Non-member trigger rate against the false-positive bound."""
    _run_experiment("fp", _experiment_config(params))


@experiment.command("fn")
@experiment_options
def experiment_fn(**params):
    """Member accuracy under key and memory noise."""
    _run_experiment("fn", _experiment_config(params))


@experiment.command("capacity")
@experiment_options
@click.option("--grid", type=int, multiple=True, help="item counts, ascending")
def experiment_capacity(grid, **params):
    cfg = _experiment_config(params)
    manifest_grid = []
    if params["config_path"]:
        manifest = config.load_manifest(params["config_path"])
        manifest_grid = manifest.get("capacity", {}).get("grid", [])
    _run_experiment("capacity", cfg, grid=list(grid) or manifest_grid or [cfg.n])


@experiment.command("amplify")
@experiment_options
@click.option("--r", "r", type=int)
def experiment_amplify(r, **params):
    cfg = _experiment_config(params)
    if r is None and params["config_path"]:
        r = config.load_manifest(params["config_path"]).get("amplify", {}).get("r")
    _run_experiment("amplify", cfg, r=r or 3)


@experiment.command("baseline")
@experiment_options
@click.option("--p", "p", type=float)
@click.option("--ell", "ells", type=int, multiple=True)
@click.option("--T", "hop_time", type=float)
def experiment_baseline(p, ells, hop_time, **params):
    """One-shot index accuracy beside the pointer-chasing model."""
    cfg = _experiment_config(params)
    section = {}
    if params["config_path"]:
        section = config.load_manifest(params["config_path"]).get("baseline", {})
    _run_experiment(
        "baseline",
        cfg,
        p=p if p is not None else section.get("p", 0.9),
        ells=list(ells) or section.get("ell", [10]),
        T=hop_time if hop_time is not None else section.get("T", 1.0),
    )


# ------
# BOUNDS
# ------
def _emit(pairs, as_csv: bool):
    pairs = list(pairs)
    if as_csv:
        row = dict(pairs)
        click.echo(results.render_csv([name for name, _ in pairs], [row]), nl=False)
    else:
        _echo_pairs(pairs)


csv_option = click.option("--csv", "as_csv", is_flag=True, help="print a CSV row instead")


@cli.group("bounds")
def bounds_group():
    """Evaluate the analytic bounds and thresholds."""


@bounds_group.command("fp")
@click.option("--n", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--tau", type=float)
@click.option("--eps", type=float)
@csv_option
def bounds_fp(n, d, tau, eps, as_csv):
    """False-positive bound at --tau, or the tau reaching --eps."""
    if (tau is None) == (eps is None):
        raise click.UsageError("give exactly one of --tau and --eps")
    if tau is None:
        tau = bounds.fp_threshold(n, d, eps)
    _emit([("n", n), ("d", d), ("tau", tau), ("bound", bounds.fp_bound(n, d, tau))], as_csv)


@bounds_group.command("fp-threshold")
@click.option("--n", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--eps", type=float, required=True)
@csv_option
def bounds_fp_threshold(n, d, eps, as_csv):
    tau = bounds.fp_threshold(n, d, eps)
    _emit([("n", n), ("d", d), ("eps", eps), ("tau", tau)], as_csv)


@bounds_group.command("signal")
@click.option("--d", type=int, required=True)
@click.option("--H", "hamming", type=float, default=0.0)
@click.option("--pe", "p_e", type=float, default=0.0)
@csv_option
def bounds_signal(d, hamming, p_e, as_csv):
    mu = bounds.signal_mean(d, hamming, p_e)
    _emit([("d", d), ("H", hamming), ("pe", p_e), ("mu", mu)], as_csv)


@bounds_group.command("fn")
@click.option("--d", type=int, required=True)
@click.option("--H", "hamming", type=float, default=0.0)
@click.option("--pe", "p_e", type=float, default=0.0)
@click.option("--n", type=int, required=True)
@click.option("--t", type=float, help="score split; defaults to mu/2")
@csv_option
def bounds_fn(d, hamming, p_e, n, t, as_csv):
    mu = bounds.signal_mean(d, hamming, p_e)
    bound = bounds.fn_bound(d, hamming, p_e, n, t)
    tolerance = bounds.noise_tolerance_region(d, max(n, 1), hamming, p_e)
    _emit(
        [
            ("d", d),
            ("H", hamming),
            ("pe", p_e),
            ("n", n),
            ("mu", mu),
            ("t", mu / 2 if t is None else t),
            ("bound", bound),
            ("tolerant", tolerance.tolerant),
        ],
        as_csv,
    )


@bounds_group.command("margin")
@click.option("--rho", type=float, required=True)
@click.option("--d", type=int, required=True)
@click.option("--c", type=float, required=True)
@click.option("--m", type=int, required=True)
@csv_option
def bounds_margin(rho, d, c, m, as_csv):
    settings = bounds.margin_failure_bound(rho, d, c, m)
    _emit(
        [("bound", settings.failure_bound), ("tau", settings.tau), ("delta", settings.delta)],
        as_csv,
    )


@bounds_group.command("evt")
@click.option("--sigma", type=float, default=1.0)
@click.option("--m", type=int, required=True)
@click.option("--eps", type=float)
@click.option("--order", type=click.Choice([bounds.EVT_FIRST, bounds.EVT_GUMBEL]))
@csv_option
def bounds_evt(sigma, m, eps, order, as_csv):
    """Exact threshold at --eps and/or an asymptotic expansion."""
    if eps is None and order is None:
        raise click.UsageError("give --eps, --order or both")
    pairs = [("sigma", sigma), ("m", m)]
    if eps is not None:
        pairs.append(("exact", bounds.evt_threshold_exact(sigma, m, eps)))
    if order is not None:
        pairs.append((order, bounds.evt_threshold_approx(sigma, m, order)))
    _emit(pairs, as_csv)


@bounds_group.command("invnorm")
@click.option("--p", "p", type=float, required=True)
@csv_option
def bounds_invnorm(p, as_csv):
    _emit([("p", p), ("quantile", bounds.inv_norm_cdf(p))], as_csv)


# ------------
# ENTRY POINTS
# ------------
def _error(exc: BaseException):
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI on `argv` and return the process exit code."""
    try:
        args = list(argv) if argv is not None else None
        code = cli.main(args=args, prog_name="hbf", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_DATA
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except OSError as e:
        _error(e)
        return EXIT_IO
    except HbfError as e:
        _error(e)
        return EXIT_DATA
    return code if isinstance(code, int) else EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
