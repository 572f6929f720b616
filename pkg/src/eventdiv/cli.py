"""Command-line interface: simulate, estimate, evaluate, of2div."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import events as ev
from .evaluate import divergence_error, of_to_divergence, parse_flow_csv
from .plots import plot_divergence_timeline, plot_evaluation_report
from .simulator import SimConfig, generate_landing_events
from .solver import SolverParams, estimate_stream_divergence

LOG = logging.getLogger(__name__)


def _parse_resize(_ctx, _param, value):
    if value is None:
        return None
    try:
        w, _, h = value.partition("x")
        return ev.SensorGeometry(int(w), int(h))
    except ValueError as exc:
        raise click.BadParameter(f"expected WIDTHxHEIGHT, got {value!r}") from exc


def _positive(name):
    def check(_ctx, _param, value):
        if value is not None and value <= 0:
            raise click.BadParameter(f"{name} must be positive")
        return value

    return check


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool):
    """Event-based divergence estimation for ventral landing."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


def write_estimates_csv(samples, params: SolverParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# tau={params.tau} gamma={params.gamma} epsilon={params.epsilon}\n")
        fh.write("# t_s,divergence,contrast,bound_gap,iterations,runtime_s\n")
        for s in samples:
            fh.write(
                f"{s.t:.6f},{s.divergence:.9f},{s.contrast:.9f},"
                f"{s.bound_gap:.9f},{s.iterations},{s.runtime:.6f}\n"
            )


def read_estimates_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read an estimate CSV back as ((n, 2) t/divergence, (n,) runtimes)."""
    pairs = []
    runtimes = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            pairs.append((float(parts[0]), float(parts[1])))
            if len(parts) >= 6:
                runtimes.append(float(parts[5]))
    return (
        np.asarray(pairs, dtype=np.float64).reshape(-1, 2),
        np.asarray(runtimes, dtype=np.float64),
    )


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Event file (.csv or .bin).")
@click.option("--output", "output_path", type=click.Path(path_type=Path), required=True,
              help="Output divergence CSV.")
@click.option("--tau", default=0.5, show_default=True, callback=_positive("tau"),
              help="Event batch duration [s].")
@click.option("--gamma", default=0.025, show_default=True, callback=_positive("gamma"),
              help="Convergence threshold on the contrast bound gap.")
@click.option("--epsilon", default=1e-6, show_default=True,
              help="Guard shrinking the velocity domain away from the singularity.")
@click.option("--resize", callback=_parse_resize, default=None, metavar="WxH",
              help="Rescale event coordinates onto a WxH grid.")
@click.option("--sample", type=float, default=None,
              help="Random subsampling keep-fraction in (0, 1].")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the subsampling RNG.")
@click.option("--hot-pixels", "hot_k", type=float, default=None, metavar="K",
              help="Remove hot pixels above median + K*MAD of per-pixel counts.")
@click.option("--max-iterations", default=1_000_000, show_default=True)
@click.option("--plot", "plot_path", type=click.Path(path_type=Path), default=None,
              help="Also render the divergence timeline to this image file.")
def estimate(input_path, output_path, tau, gamma, epsilon, resize, sample, seed,
             hot_k, max_iterations, plot_path):
    """Estimate per-batch divergence from an event file."""
    try:
        stream = ev.load_event_file(input_path)
        if hot_k is not None:
            stream = ev.remove_hot_pixels(stream, hot_k)
        if resize is not None:
            stream = ev.rescale_events(stream, resize)
        if sample is not None:
            stream = ev.subsample_events(stream, sample, seed)
        params = SolverParams(
            gamma=gamma, tau=tau, epsilon=epsilon, max_iterations=max_iterations
        )
        batches = ev.batch_stream(stream, tau)
        samples = estimate_stream_divergence(batches, params)
        write_estimates_csv(samples, params, output_path)
        if plot_path is not None:
            plot_divergence_timeline(samples, None, plot_path)
    except (ev.EventFormatError, ev.EventValidationError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {len(samples)} divergence samples to {output_path}")


@main.command()
@click.option("--output", "output_path", type=click.Path(path_type=Path), required=True,
              help="Event file to write (.csv or .bin).")
@click.option("--gt", "gt_path", type=click.Path(path_type=Path), default=None,
              help="Ground-truth divergence CSV to write.")
@click.option("--nu", default=-0.3, show_default=True,
              help="Constant vertical velocity (<= 0).")
@click.option("--z0", default=1.0, show_default=True, callback=_positive("z0"),
              help="Initial surface depth.")
@click.option("--duration", default=2.0, show_default=True,
              callback=_positive("duration"), help="Run duration [s].")
@click.option("--width", default=160, show_default=True)
@click.option("--height", default=90, show_default=True)
@click.option("--focal-length", default=100.0, show_default=True)
@click.option("--n-points", default=500, show_default=True)
@click.option("--spacing", default=1.0, show_default=True,
              help="Radial displacement per event [px].")
@click.option("--noise-px", default=0.0, show_default=True,
              help="Gaussian pixel jitter stddev.")
@click.option("--clutter", default=0.0, show_default=True,
              help="Uniform clutter fraction of the stream.")
@click.option("--seed", type=int, default=0, show_default=True)
def simulate(output_path, gt_path, nu, z0, duration, width, height, focal_length,
             n_points, spacing, noise_px, clutter, seed):
    """Generate a synthetic ventral-landing event stream with ground truth."""
    if nu > 0:
        raise click.BadParameter("nu must be <= 0 (descent)", param_hint="--nu")
    try:
        config = SimConfig(
            z0=z0, nu=nu, focal_length=focal_length,
            geometry=ev.SensorGeometry(width, height), duration=duration,
            n_points=n_points, event_spacing_px=spacing, noise_px=noise_px,
            noise_event_fraction=clutter, seed=seed,
        )
        stream, ground_truth = generate_landing_events(config)
        if output_path.suffix.lower() == ".bin":
            ev.write_event_bin(stream, output_path)
        else:
            ev.write_event_csv(stream, output_path)
        if gt_path is not None:
            ev.write_ground_truth_csv(ground_truth.samples, gt_path)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {stream.n} events to {output_path}")


@main.command()
@click.option("--estimates", "est_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Estimate CSV from the estimate command.")
@click.option("--ground-truth", "gt_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Ground-truth divergence CSV.")
@click.option("--output", "output_path", type=click.Path(path_type=Path), default=None,
              help="Write per-batch errors as CSV.")
@click.option("--plot", "plot_path", type=click.Path(path_type=Path), default=None,
              help="Render the evaluation figure to this image file.")
def evaluate(est_path, gt_path, output_path, plot_path):
    """Compare estimated divergence against closest-in-time ground truth."""
    try:
        estimates, runtimes = read_estimates_csv(est_path)
        ground_truth = ev.read_divergence_csv(gt_path)
        report = divergence_error(estimates, ground_truth, runtimes)
    except (ev.EventFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"batches evaluated:    {len(report.per_batch_errors)}")
    click.echo(f"mean abs error:       {report.mean_abs_error_pct:.3f} %")
    click.echo(f"mean runtime / batch: {report.mean_runtime_s:.4f} s")
    if output_path is not None:
        with open(output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# t_s,abs_error_pct\n")
            for t, e in report.per_batch_errors:
                fh.write(f"{t:.6f},{e:.6f}\n")
    if plot_path is not None:
        plot_evaluation_report(report, estimates, ground_truth, plot_path)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Flow CSV with '# foe=<fx>,<fy> tau=<t>' header.")
def of2div(input_path):
    """Convert a sparse optic flow field to a divergence value."""
    try:
        field = parse_flow_csv(input_path)
        div = of_to_divergence(field)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"{div:.9f}")


if __name__ == "__main__":
    sys.exit(main())
