import itertools
from collections import deque

from iomt_cluster.network import Network, NetworkConfig


def all_shortest_paths(adj, s, t):
    """Every shortest s-t path, by BFS layering then exhaustive DFS over
    layered edges. Independent of any dependency-accumulation scheme."""
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if t not in dist:
        return []
    paths = []

    def walk(path):
        u = path[-1]
        if u == t:
            paths.append(list(path))
            return
        for v in adj[u]:
            if dist.get(v) == dist[u] + 1 and len(path) <= dist[t]:
                path.append(v)
                walk(path)
                path.pop()

    walk([s])
    return paths


def enumerated_centrality(adj, alive=None):
    """Fraction of shortest paths through each node, summed over unordered
    pairs and divided by (n-1)(n-2)/2."""
    nodes = sorted(adj) if alive is None else sorted(alive)
    n = len(nodes)
    out = {v: 0.0 for v in adj}
    if n < 3:
        return out
    for s, t in itertools.combinations(nodes, 2):
        paths = all_shortest_paths(adj, s, t)
        if not paths:
            continue
        for v in nodes:
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p[1:-1])
            out[v] += through / len(paths)
    scale = (n - 1) * (n - 2) / 2
    return {v: c / scale for v, c in out.items()}


def line_network(xs, radius=None, **kwargs):
    cfg = NetworkConfig(node_count=len(xs), cluster_count=1, forwarding_radius=radius)
    return Network.from_positions([(x, 0.0) for x in xs], cfg, **kwargs)
