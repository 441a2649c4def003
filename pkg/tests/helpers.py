"""Shared independent oracles for the test suite."""

import numpy as np


def brute_force_laplacian_scores(X, k, bandwidth=None):
    """Double-loop evaluation of the Laplacian score.

    Same graph definition as the implementation (union kNN over euclidean
    distances, heat kernel, median bandwidth) built entry by entry.
    """
    n, m = X.shape
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            dist[i, j] = np.sqrt(np.sum((X[i] - X[j]) ** 2))
    knn = {}
    knn_dists = []
    for i in range(n):
        others = sorted((dist[i, j], j) for j in range(n) if j != i)
        knn[i] = [j for _, j in others[:k]]
        knn_dists.extend(d for d, _ in others[:k])
    t = bandwidth if bandwidth is not None else float(np.median(knn_dists))
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if j in knn[i] or i in knn[j]:
                W[i, j] = np.exp(-dist[i, j] ** 2 / (2 * t * t)) if t > 0 else float(dist[i, j] == 0)
    deg = W.sum(axis=1)
    raws = np.zeros(m)
    for r in range(m):
        f = X[:, r]
        fc = f - np.dot(f, deg) / deg.sum()
        denom = np.dot(deg, fc**2)
        if denom <= 0:
            raws[r] = np.inf
            continue
        num = 0.0
        for i in range(n):
            for j in range(n):
                num += (fc[i] - fc[j]) ** 2 * W[i, j]
        raws[r] = (num / 2.0) / denom
    return raws


def scalar_distance(u, v, metric):
    if metric == "euclidean":
        return float(np.sqrt(np.sum((u - v) ** 2)))
    if metric == "cosine":
        return 1.0 - float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    uc = u - u.mean()
    vc = v - v.mean()
    return 1.0 - float(np.dot(uc, vc) / (np.linalg.norm(uc) * np.linalg.norm(vc)))


def clustering_purity(labels, truth):
    """Fraction of samples whose cluster's majority planted label is theirs."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    total = 0
    for c in np.unique(labels):
        _, counts = np.unique(truth[labels == c], return_counts=True)
        total += counts.max()
    return total / len(labels)


def count_components(adjacency):
    """Flood-fill connected-component count."""
    n = adjacency.shape[0]
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        while stack:
            u = stack.pop()
            if seen[u]:
                continue
            seen[u] = True
            stack.extend(v for v in range(n) if adjacency[u, v] and not seen[v])
    return count
