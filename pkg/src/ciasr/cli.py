"""Command-line interface: sampling, density tabulation, fitting, metric
scoring and the patch-wise image pipeline."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .estimator import MobmConfig, fit as fit_samples
from .metrics import (
    HistogramSpec,
    MetricReport,
    fit_lognormal,
    fit_weibull,
    kl_div,
    ks_score,
    lognormal_cdf,
    reports_to_csv,
    weibull_cdf,
)
from .model import CiasrModel, ModelParams
from .pipeline import fit_patches, load_raster, render_maps, segment_patches, write_pgm, write_ppm
from .sampling import CiasrGenConfig, load_samples, sample_ciasr, save_samples


@click.group()
def main() -> None:
    """Heavy-tailed amplitude model: sampling, fitting, metrics, imaging."""


_param_options = [
    click.option("--alpha", type=float, required=True, help="tail exponent in (0, 2]"),
    click.option("--gamma", type=float, required=True, help="scale, > 0"),
    click.option("--delta", type=float, default=0.0, show_default=True, help="location, >= 0"),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@main.command()
@_add_options(_param_options)
@click.option("--n", type=int, required=True, help="number of variates")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="output path (flat little-endian f64; JSON sidecar alongside)")
def sample(alpha, gamma, delta, n, seed, out):
    """Draw amplitude variates and write them with a provenance sidecar."""
    cfg = CiasrGenConfig(alpha=alpha, gamma=gamma, delta=delta, n=n, seed=seed)
    values = sample_ciasr(cfg)
    save_samples(out, values, {
        "alpha": alpha, "gamma": gamma, "delta": delta, "n": n, "seed": seed,
    })
    click.echo(f"wrote {n} samples to {out}")


@main.command()
@_add_options(_param_options)
@click.option("--xmin", type=float, default=0.0, show_default=True)
@click.option("--xmax", type=float, required=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (default: stdout)")
def pdf(alpha, gamma, delta, xmin, xmax, points, out):
    """Tabulate the model density as CSV rows (x, density)."""
    if not (xmax > xmin >= 0):
        raise click.BadParameter("need 0 <= xmin < xmax")
    if points < 2:
        raise click.BadParameter("points must be >= 2")
    model = CiasrModel(ModelParams(alpha=alpha, gamma=gamma, delta=delta))
    x = np.linspace(xmin, xmax, points)
    d = model.pdf(x)
    lines = ["x,density"] + [f"{float(xi)!r},{float(di)!r}" for xi, di in zip(x, d)]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {points} rows to {out}")


@main.command("fit")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="flat-f64 sample file")
@click.option("--a1", type=float, default=0.01, show_default=True)
@click.option("--a2", type=float, default=0.02, show_default=True)
@click.option("--a3", type=float, default=0.01, show_default=True)
@click.option("--step-fraction", type=float, default=0.01, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="JSON destination (default: stdout)")
def fit_cmd(in_path, a1, a2, a3, step_fraction, out):
    """Moment-fit (alpha, gamma, delta) to a sample file; emit a JSON report."""
    samples, _ = load_samples(in_path)
    config = MobmConfig(a1=a1, a2=a2, a3=a3, step_fraction=step_fraction)
    report = fit_samples(samples, config)
    text = report.to_json() + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote fit report to {out}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="flat-f64 sample file")
@click.option("--model", "model_kind", required=True,
              type=click.Choice(["fitreport", "weibull", "lognormal"]),
              help="candidate model: a precomputed fit report or a baseline fitted here")
@click.option("--fit-report", type=click.Path(exists=True, dir_okay=False), default=None,
              help="fit-report JSON (required with --model fitreport)")
@click.option("--scene-id", default="scene", show_default=True)
@click.option("--bins", type=int, default=512, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (default: stdout)")
def metrics(in_path, model_kind, fit_report, scene_id, bins, out):
    """Score a model on a sample file with KL divergence and the KS statistic."""
    samples, _ = load_samples(in_path)
    if model_kind == "fitreport":
        if fit_report is None:
            raise click.BadParameter("--model fitreport requires --fit-report")
        payload = json.loads(Path(fit_report).read_text())
        params = ModelParams(
            alpha=payload["alpha"], gamma=payload["gamma"], delta=payload["delta"]
        )
        model = CiasrModel(params)
        cdf_fn = model.cdf_interpolator(1.01 * float(np.max(samples)))
        name = "ciasr"
    elif model_kind == "weibull":
        shape, scale = fit_weibull(samples)

        def cdf_fn(x):
            return weibull_cdf(x, shape, scale)

        name = "weibull"
    else:
        mu, sigma = fit_lognormal(samples)

        def cdf_fn(x):
            return lognormal_cdf(x, mu, sigma)

        name = "lognormal"
    report = MetricReport(
        model_name=name,
        kl_div=kl_div(samples, cdf_fn, HistogramSpec(bin_count=bins)),
        ks_score=ks_score(samples, cdf_fn),
    )
    text = reports_to_csv([(scene_id, report)])
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote metrics to {out}")


@main.command()
@click.option("--image", type=click.Path(exists=True, dir_okay=False), required=True,
              help="input raster (.pgm, or flat-f64 with JSON sidecar)")
@click.option("--patch", type=int, default=500, show_default=True, help="patch side in pixels")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--step-fraction", type=float, default=0.01, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="output directory for ParamMap JSON and rendered maps")
def segment(image, patch, workers, step_fraction, out_dir):
    """Patch-fit a raster and write the parameter map plus rendered images."""
    raster = load_raster(image)
    grid = segment_patches(raster, patch)
    config = MobmConfig(step_fraction=step_fraction)
    param_map = fit_patches(grid, config, workers=workers)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "param_map.json").write_text(param_map.to_json() + "\n")
    for channel in ("alpha", "gamma", "delta"):
        result = render_maps(param_map, f"heatmap-{channel}")
        write_pgm(out / f"heatmap_{channel}.pgm", result.pixels)
    rgb = render_maps(param_map, "pseudo-rgb")
    write_ppm(out / "pseudo_rgb.ppm", rgb.pixels)
    (out / "render_meta.json").write_text(json.dumps(rgb.metadata, indent=2, sort_keys=True) + "\n")
    n_failed = int(param_map.failed.sum())
    click.echo(
        f"fitted {param_map.grid_rows}x{param_map.grid_cols} patches "
        f"({n_failed} failed) -> {out}"
    )


if __name__ == "__main__":
    main()
