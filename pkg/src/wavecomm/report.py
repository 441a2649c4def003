"""Static report assets: eigenvalue table, raw and reordered heatmaps."""

from __future__ import annotations

import csv

import numpy as np
from PIL import Image

from .artifacts import RunDirectory, matrix_to_csv
from .spectral import reorder_similarity


def matrix_to_png(path, values: np.ndarray) -> None:
    """Grayscale heatmap, one pixel per cell, 0 -> black, max -> white."""
    v = np.asarray(values, dtype=np.float64)
    peak = v.max()
    scaled = (v / peak * 255.0) if peak > 0 else np.zeros_like(v)
    Image.fromarray(np.clip(np.rint(scaled), 0, 255).astype(np.uint8), mode="L").save(path)


def write_report(run: RunDirectory) -> dict:
    """Emit report assets for a completed run; returns block metadata."""
    W = run.load_affinity()
    result = run.load_communities()
    out = run.report_dir
    out.mkdir(exist_ok=True)

    with open(out / "eigenvalues.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue", "gap"])
        gaps = list(result.eigengap_profile) + [""]
        for i, value in enumerate(result.eigenvalues):
            gap = gaps[i] if i < len(result.eigengap_profile) else ""
            writer.writerow([i, f"{value:.17g}", f"{gap:.17g}" if gap != "" else ""])

    matrix_to_csv(out / "heatmap.csv", W.values)
    matrix_to_png(out / "heatmap.png", W.values)

    reordered, boundaries = reorder_similarity(W, result)
    matrix_to_csv(out / "heatmap_reordered.csv", reordered)
    matrix_to_png(out / "heatmap_reordered.png", reordered)

    blocks = {
        "n_c": result.n_c,
        "boundaries": boundaries,
        "cluster_sizes": result.cluster_sizes(),
        "permutation": [int(i) for i in result.permutation],
    }
    run.save_json(out / "blocks.json", blocks)

    sizes = ", ".join(str(s) for s in blocks["cluster_sizes"])
    eigen_rows = "\n".join(
        f"<tr><td>{i}</td><td>{v:.6g}</td></tr>" for i, v in enumerate(result.eigenvalues)
    )
    html = f"""<!doctype html>
<html lang="en"><head><meta charset="utf-8"><title>run report</title>
<style>body{{font-family:system-ui,sans-serif;margin:2rem}}img{{image-rendering:pixelated;width:320px;border:1px solid #ccc}}
table{{border-collapse:collapse}}td,th{{border:1px solid #ccc;padding:2px 8px}}</style></head>
<body>
<h1>Community detection report</h1>
<p>{result.n_c} communities over {len(result.image_ids)} images; sizes: {sizes}.</p>
<h2>Similarity matrix</h2>
<p><img src="heatmap.png" alt="similarity matrix"> <img src="heatmap_reordered.png" alt="reordered similarity matrix"></p>
<p>Left: ingest order. Right: rows and columns grouped by community; each diagonal block is one community.</p>
<h2>Laplacian eigenvalues</h2>
<table><tr><th>index</th><th>eigenvalue</th></tr>
{eigen_rows}
</table>
</body></html>
"""
    (out / "index.html").write_text(html, encoding="utf-8")
    return blocks
