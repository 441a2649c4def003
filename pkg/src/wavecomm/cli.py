"""Command-line front door.

Exit codes: 0 success, 1 stage failure, 2 input/configuration error.
``detect`` runs the whole pipeline; ``decompose``/``graph``/``cluster``
run it stage by stage over a shared run directory so every intermediate
artifact can be audited.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .artifacts import RunDirectory
from .errors import WavecommError, WavecommInputError
from .pipeline import RunConfig, detect, resolve_max_k, spectrum_report

INPUT_EXIT = 2
STAGE_EXIT = 1


def _die(exc: Exception) -> None:
    stage = getattr(exc, "stage", None)
    prefix = f"[{stage}] " if stage else ""
    hint = getattr(exc, "hint", None)
    click.echo(f"error: {prefix}{exc}", err=True)
    if hint:
        click.echo(f"hint: {hint}", err=True)
    sys.exit(INPUT_EXIT if isinstance(exc, WavecommInputError) else STAGE_EXIT)


def _parse_size(value: str) -> tuple[int, int]:
    try:
        h, w = value.lower().split("x")
        return (int(h), int(w))
    except ValueError:
        raise click.BadParameter(f"size must look like 256x256, got {value!r}")


@click.group()
def cli():
    """Detect communities of similar images via wavelets and spectral methods."""


basis_opt = click.option("--basis", default="db3", show_default=True, help="Daubechies basis (db1..db5).")
levels_opt = click.option("--levels", default=3, show_default=True, type=int)
metric_opt = click.option(
    "--metric",
    default="correlation",
    show_default=True,
    type=click.Choice(["correlation", "cosine", "euclidean"]),
)
keep_top_opt = click.option(
    "--keep-top",
    default=0.2,
    show_default=True,
    type=float,
    help="Fraction of coefficients kept by importance.",
)
tau_w_opt = click.option(
    "--tau-w", default=None, type=float, help="Absolute importance threshold (overrides --keep-top)."
)
max_k_opt = click.option("--max-k", default=None, type=int, help="Largest candidate cluster count.")
tau_c_opt = click.option("--tau-c", default=None, type=float, help="Near-zero eigenvalue threshold.")
count_mode_opt = click.option(
    "--count-mode",
    default="eigengap",
    show_default=True,
    type=click.Choice(["eigengap", "near_zero"]),
)
n_c_opt = click.option("--n-c", default=None, type=int, help="Override the estimated cluster count.")
seed_opt = click.option("--seed", default=7, show_default=True, type=int)
size_opt = click.option("--size", default="256x256", show_default=True, help="Common image size HxW.")
out_opt = click.option("--out", required=True, type=click.Path(), help="Run directory.")
color_opt = click.option(
    "--color",
    "color_mode",
    default="luma",
    show_default=True,
    type=click.Choice(["luma", "channels"]),
    help="Collapse color to luma, or keep per-channel coefficients.",
)


@cli.command("detect")
@click.argument("data", type=click.Path(exists=True))
@out_opt
@basis_opt
@levels_opt
@metric_opt
@keep_top_opt
@tau_w_opt
@max_k_opt
@tau_c_opt
@count_mode_opt
@n_c_opt
@seed_opt
@size_opt
@click.option("--save-coeffs/--no-save-coeffs", default=True, show_default=True)
@color_opt
def cmd_detect(data, out, basis, levels, metric, keep_top, tau_w, max_k, tau_c, count_mode, n_c, seed, size, save_coeffs, color_mode):
    """Run the full pipeline on DATA (directory or manifest CSV)."""
    try:
        config = RunConfig(
            dataset=str(data),
            out=str(out),
            basis=basis,
            levels=levels,
            metric=metric,
            color_mode=color_mode,
            keep_top=None if tau_w is not None else keep_top,
            tau_w=tau_w,
            max_k=max_k,
            tau_c=tau_c,
            count_mode=count_mode,
            n_c=n_c,
            seed=seed,
            target_size=_parse_size(size),
            save_coefficients=save_coeffs,
        )
        outcome = detect(config)
    except WavecommError as exc:
        _die(exc)
    s = outcome.summary
    click.echo(f"images: {s['n_images']} (load errors: {len(s['load_errors'])})")
    click.echo(f"features: kept {s['n_features_kept']} of {s['n_features_total']}")
    click.echo(
        f"communities: {s['n_c']}"
        + (" (override)" if s["n_c_overridden"] else f" (eigengap {s['n_c_by_eigengap']}, near-zero {s['n_c_by_near_zero']})")
    )
    click.echo(f"cluster sizes: {s['cluster_sizes']}")
    click.echo(f"run directory: {outcome.run.path}")


@cli.command("decompose")
@click.argument("data", type=click.Path(exists=True))
@out_opt
@basis_opt
@levels_opt
@size_opt
@color_opt
def cmd_decompose(data, out, basis, levels, size, color_mode):
    """Stage 1: load images and write wavelet decompositions."""
    from .dataset import load_dataset, write_manifest_csv
    from .features import assemble_channel_matrix, assemble_coefficient_matrix
    from .pipeline import decompose_images

    try:
        run = RunDirectory(out).ensure()
        records, report, manifest = load_dataset(
            data, _parse_size(size), with_manifest=True, color_mode=color_mode
        )
        write_manifest_csv(run.manifest_csv, manifest.entries)
        run.save_json(run.checksums_json, manifest.checksums)
        decomps = decompose_images(records, basis, levels)
        ids = [r.id for r in records]
        if color_mode == "channels":
            assemble_channel_matrix(decomps, ids)  # validates
            flat = [d for per_image in decomps for d in per_image]
            run.save_decomps(flat, basis, channels=len(decomps[0]))
        else:
            assemble_coefficient_matrix(decomps, ids)  # validates
            run.save_decomps(decomps, basis)
    except WavecommError as exc:
        exc.stage = "decompose"
        _die(exc)
    click.echo(f"decomposed {len(records)} images -> {run.decomps_wcm}")


@cli.command("graph")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
@metric_opt
@keep_top_opt
@tau_w_opt
def cmd_graph(run_path, metric, keep_top, tau_w):
    """Stage 2: feature selection, distances, affinity."""
    from .affinity import affinity_from_distances, pairwise_distances
    from .dataset import read_manifest_csv
    from .features import (
        assemble_channel_matrix,
        assemble_coefficient_matrix,
        laplacian_score,
        select_features,
    )

    try:
        run = RunDirectory(run_path)
        decomps, _basis, channels = run.load_decomps()
        entries = read_manifest_csv(run.require(run.manifest_csv, "manifest"))
        ids = [e.id for e in entries]
        if channels > 1:
            grouped = [decomps[i : i + channels] for i in range(0, len(decomps), channels)]
            C_full = assemble_channel_matrix(grouped, ids)
        else:
            C_full = assemble_coefficient_matrix(decomps, ids)
        scores = laplacian_score(C_full)
        if tau_w is not None:
            C = select_features(C_full, scores, threshold=tau_w)
        else:
            C = select_features(C_full, scores, keep_top=keep_top)
        run.save_feature_scores(scores, set(C.feature_ids))
        run.save_coefficients(C)
        D = pairwise_distances(C, metric)
        run.save_distance(D)
        W = affinity_from_distances(D)
        run.save_affinity(W)
    except WavecommError as exc:
        exc.stage = "graph"
        _die(exc)
    click.echo(f"kept {C.n_features}/{C_full.n_features} features; sigma={W.sigma:.6g}")


@cli.command("cluster")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
@max_k_opt
@tau_c_opt
@count_mode_opt
@n_c_opt
@seed_opt
def cmd_cluster(run_path, max_k, tau_c, count_mode, n_c, seed):
    """Stage 3: eigengap estimate and spectral clustering."""
    from .affinity import graph_laplacian
    from .dataset import read_manifest_csv
    from .spectral import eigendecompose, estimate_num_clusters, spectral_cluster

    try:
        run = RunDirectory(run_path)
        W = run.load_affinity()
        entries = read_manifest_csv(run.require(run.manifest_csv, "manifest"))
        ids = [e.id for e in entries]
        max_k_eff = resolve_max_k(W.n, max_k)
        spectrum = eigendecompose(graph_laplacian(W, "symmetric"), min(W.n, max_k_eff + 1))
        estimate = estimate_num_clusters(spectrum.eigenvalues, max_k_eff, tau_c=tau_c, mode=count_mode)
        chosen = n_c if n_c is not None else estimate.n_c
        result = spectral_cluster(
            W, chosen, seed=seed, image_ids=ids,
            eigenvalues=spectrum.eigenvalues, eigengap_profile=estimate.gaps,
        )
        run.save_communities(result)
    except WavecommError as exc:
        exc.stage = "cluster"
        _die(exc)
    click.echo(f"n_c={result.n_c} sizes={result.cluster_sizes()}")


@cli.command("spectrum")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", default=None, type=click.Path(exists=True),
              help="Labeled manifest CSV; defaults to the run's own manifest.")
@click.option("--positive-class", default=None)
@click.option("--band", default=None, type=float)
@click.option("--quantile", default=0.05, show_default=True, type=float)
def cmd_spectrum(run_path, labels_path, positive_class, band, quantile):
    """Severity-axis report from a completed run plus two-class labels."""
    from .dataset import load_label_map
    from .spectrum import find_borderline

    try:
        run = RunDirectory(run_path)
        source = labels_path or run.require(run.manifest_csv, "manifest")
        label_map = load_label_map(source)
        if not label_map:
            raise WavecommInputError(f"no labels found in {source}")
        placements, meta = spectrum_report(run, label_map, positive_class, band, quantile)
    except WavecommError as exc:
        exc.stage = "spectrum"
        _die(exc)
    isolated = sorted(p.image_id for p in placements if "isolated" in p.flags)
    click.echo(f"placed {len(placements)} images; positive class: {meta['positive_class']}")
    if meta["excluded_unlabeled"]:
        click.echo(f"warning: {len(meta['excluded_unlabeled'])} unlabeled image(s) excluded", err=True)
    if meta["unknown_label_ids"]:
        click.echo(f"warning: {len(meta['unknown_label_ids'])} label(s) matched no image", err=True)
    click.echo(f"isolated: {isolated if isolated else 'none'}")
    for cls, ids in find_borderline(placements).items():
        click.echo(f"borderline[{cls}]: {ids if ids else 'none'}")
    click.echo(f"wrote {run.spectrum_json}")


@cli.command("report")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
def cmd_report(run_path):
    """Emit heatmap and eigenvalue assets for a completed run."""
    from .report import write_report

    try:
        blocks = write_report(RunDirectory(run_path))
    except WavecommError as exc:
        exc.stage = "report"
        _die(exc)
    click.echo(f"blocks: {blocks['n_c']} boundaries={blocks['boundaries']}")


@cli.command("serve")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--token", default=None, help="Static bearer token required on every request.")
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True),
              help="Built review UI directory; auto-detected from a repo checkout.")
def cmd_serve(run_path, host, port, token, ui_dir):
    """Serve the labeling API (and review UI, if built) over a run."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(run_path, token=token, ui_dir=ui_dir)
    except WavecommError as exc:
        exc.stage = "serve"
        _die(exc)
    uvicorn.run(app, host=host, port=port, log_level="info")


@cli.command("synth")
@click.option("--out", required=True, type=click.Path())
@click.option("--templates", default=3, show_default=True, type=int)
@click.option("--per-template", default=15, show_default=True, type=int)
@click.option("--size", default="64x64", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
def cmd_synth(out, templates, per_template, size, seed):
    """Generate a planted-truth synthetic dataset (PNG + labeled manifest)."""
    from .synth import write_planted_dataset

    try:
        path = write_planted_dataset(out, templates, per_template, _parse_size(size), seed)
    except WavecommError as exc:
        _die(exc)
    click.echo(f"wrote {templates * per_template} images under {path}")


def main():
    cli(standalone_mode=True)


if __name__ == "__main__":
    main()
