"""Sampled Fermi-coordinate metrics on uniform tensor-product grids."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BoundaryStencilError, ConfigurationError, DomainError
from .metrics import FermiMetric, full_metric
from .tensors import check_metric

UNIFORM_RTOL = 1e-12


def _uniform_step(nodes, name):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ConfigurationError(f"{name} needs at least two nodes")
    d = np.diff(nodes)
    if np.any(d <= 0):
        raise ConfigurationError(f"{name} must be strictly increasing")
    h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
    if np.any(np.abs(d - h) > UNIFORM_RTOL * max(abs(h), np.abs(nodes).max())):
        raise ConfigurationError(f"{name} spacing is not uniform")
    return float(h)


@dataclass(frozen=True)
class FermiGrid:
    """Tangential metric ``g_ab`` sampled on ``r_nodes x y_nodes[0] x ... x y_nodes[n-1]``.

    ``g_components`` has shape ``(Nr, Ny_1, ..., Ny_n, n, n)``.  ``metric``
    optionally records the analytic source; when it has closed forms the
    curvature routines may use them instead of stencils.
    """

    r_nodes: np.ndarray
    y_nodes: tuple
    g_components: np.ndarray
    metric: FermiMetric | None = field(default=None, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r_nodes, dtype=float)
        ys = tuple(np.asarray(y, dtype=float) for y in self.y_nodes)
        g = np.asarray(self.g_components, dtype=float)
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "y_nodes", ys)
        object.__setattr__(self, "g_components", g)
        n = len(ys)
        if n < 1:
            raise ConfigurationError("need at least one tangential direction")
        shape = (r.size,) + tuple(y.size for y in ys) + (n, n)
        if g.shape != shape:
            raise ConfigurationError(f"g_components shape {g.shape} != {shape}")
        if np.any(r < 0):
            raise DomainError("r_nodes must be nonnegative")
        steps = [_uniform_step(r, "r_nodes")]
        steps += [_uniform_step(y, f"y_nodes[{i}]") for i, y in enumerate(ys)]
        object.__setattr__(self, "_h", np.array(steps))
        if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=1e-13, atol=0.0):
            raise ConfigurationError("g_components not symmetric")
        check_metric(g)

    # -- construction ---------------------------------------------------
    @classmethod
    def sample(cls, metric: FermiMetric, r_nodes, y_nodes) -> "FermiGrid":
        """Sample ``metric`` on the tensor grid; ``y_nodes`` is one array per axis
        or a single array shared by all axes."""
        n = metric.n
        y_nodes = _normalize_y(y_nodes, n)
        r_nodes = np.asarray(r_nodes, dtype=float)
        mesh = np.meshgrid(r_nodes, *y_nodes, indexing="ij")
        X = np.stack([m.ravel() for m in mesh], axis=1)
        gt = metric.tangential(X[:, 0], X[:, 1:])
        shape = (r_nodes.size,) + tuple(y.size for y in y_nodes) + (n, n)
        return cls(r_nodes, tuple(y_nodes), gt.reshape(shape), metric)

    @classmethod
    def patch(cls, metric: FermiMetric, center, h, half_width: int) -> "FermiGrid":
        """Cube of ``2 half_width + 1`` nodes per axis around ``center = (r, y...)``.

        ``h`` is a scalar or one spacing per axis.
        """
        center = np.asarray(center, dtype=float)
        N = metric.n + 1
        if center.shape != (N,):
            raise ConfigurationError(f"center must have {N} coordinates")
        h = np.broadcast_to(np.asarray(h, dtype=float), (N,))
        k = np.arange(-half_width, half_width + 1)
        axes = [center[i] + h[i] * k for i in range(N)]
        return cls.sample(metric, axes[0], axes[1:])

    # -- geometry of the grid ---------------------------------------------
    @property
    def n(self) -> int:
        return len(self.y_nodes)

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def spacing(self):
        """Step per axis ``(h_r, h_y1, ..., h_yn)``."""
        return self._h.copy()

    @property
    def shape(self):
        return self.g_components.shape[: self.dim]

    @property
    def closed_form(self) -> bool:
        return self.metric is not None and self.metric.has_closed_form

    def center_node(self):
        return tuple(s // 2 for s in self.shape)

    def coords(self, node):
        node = tuple(node)
        return np.array([self.r_nodes[node[0]]] + [y[i] for y, i in zip(self.y_nodes, node[1:])])

    def block_coords(self, node, radius: int):
        self._check_node(node, radius)
        axes = [self.r_nodes] + list(self.y_nodes)
        sl = [ax[i - radius:i + radius + 1] for ax, i in zip(axes, node)]
        mesh = np.meshgrid(*sl, indexing="ij")
        return np.stack(mesh, axis=-1)

    def _check_node(self, node, radius: int):
        node = tuple(int(i) for i in node)
        if len(node) != self.dim:
            raise ConfigurationError(f"node must have {self.dim} indices")
        for i, s in zip(node, self.shape):
            if i - radius < 0 or i + radius >= s:
                raise BoundaryStencilError(
                    f"node {node} needs {radius} layers but grid shape is {self.shape}"
                )

    def full_block(self, node, radius: int):
        """Full metric ``(2 radius + 1)^N x N x N`` around ``node``."""
        self._check_node(node, radius)
        sl = tuple(slice(i - radius, i + radius + 1) for i in node)
        return full_metric(self.g_components[sl])

    def nodes(self):
        return itertools.product(*(range(s) for s in self.shape))


def _normalize_y(y_nodes, n):
    if isinstance(y_nodes, np.ndarray) and y_nodes.ndim == 1:
        return [y_nodes.astype(float)] * n
    y_nodes = list(y_nodes)
    if len(y_nodes) and np.ndim(y_nodes[0]) == 0:
        return [np.asarray(y_nodes, dtype=float)] * n
    if len(y_nodes) != n:
        raise ConfigurationError(f"expected {n} y-node arrays, got {len(y_nodes)}")
    return [np.asarray(y, dtype=float) for y in y_nodes]


# ---------------------------------------------------------------------------
# columnar text format

_MAGIC = "# alhlab fermi-grid v1"


def component_labels(n: int):
    return [f"g{a + 1}{b + 1}" for a in range(n) for b in range(a, n)]


def export_grid(grid: FermiGrid, path) -> None:
    """Write one row per node: ``y1 .. yn r g11 g12 .. gnn`` (upper triangle)."""
    n = grid.n
    iu = np.triu_indices(n)
    header = [f"y{i + 1}" for i in range(n)] + ["r"] + component_labels(n)
    lines = [_MAGIC, f"# n={n}", " ".join(header)]
    ordering = list(range(1, n + 1)) + [0]
    for idx in itertools.product(*(range(grid.shape[ax]) for ax in ordering)):
        node = (idx[-1],) + idx[:-1]
        x = grid.coords(node)
        vals = list(x[1:]) + [x[0]] + list(grid.g_components[node][iu])
        lines.append(" ".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def import_grid(path) -> FermiGrid:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != _MAGIC:
        raise ConfigurationError(f"{path}: not a fermi-grid file")
    n = int(text[1].split("=")[1])
    header = text[2].split()
    expected = [f"y{i + 1}" for i in range(n)] + ["r"] + component_labels(n)
    if header != expected:
        raise ConfigurationError(f"{path}: unexpected header {header}")
    data = np.array([[float(v) for v in line.split()] for line in text[3:] if line.strip()])
    ys = [np.unique(data[:, i]) for i in range(n)]
    r = np.unique(data[:, n])
    g = np.zeros((r.size,) + tuple(y.size for y in ys) + (n, n))
    iu = np.triu_indices(n)
    for row in data:
        node = (int(np.searchsorted(r, row[n])),) + tuple(
            int(np.searchsorted(y, row[i])) for i, y in enumerate(ys)
        )
        block = np.zeros((n, n))
        block[iu] = row[n + 1:]
        block = block + np.triu(block, 1).T
        g[node] = block
    return FermiGrid(r, tuple(ys), g)
