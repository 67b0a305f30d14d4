"""Graph network over crystal features: embeddings, K message-passing
layers with residual node/edge/global streams, mean readout, MLP head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..featurize import GraphFeatures
from . import autograd as ag
from .autograd import Tensor

ACTIVATIONS = {"softplus": ag.softplus, "tanh": ag.tanh, "relu": ag.relu}


@dataclass(frozen=True)
class MegnetConfig:
    n_node_features: int
    n_global_features: int
    output: int
    n_edge_features: int = 1
    layers: int = 3  # K
    node_embed: int = 32
    edge_embed: int = 32
    global_embed: int = 32
    mlp_hidden: int = 64
    head_hidden: tuple = (64,)
    activation: str = "softplus"
    dueling: bool = False

    def __post_init__(self):
        if self.layers < 1:
            raise ShapeError("need at least one message-passing layer")
        widths = (self.n_node_features, self.n_global_features, self.output,
                  self.n_edge_features, self.node_embed, self.edge_embed,
                  self.global_embed, self.mlp_hidden, *self.head_hidden)
        if any(w < 1 for w in widths):
            raise ShapeError("all widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "head_hidden", tuple(self.head_hidden))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "MegnetConfig":
        d = dict(d)
        d["head_hidden"] = tuple(d.get("head_hidden", ()))
        return cls(**d)


@dataclass
class GraphBatch:
    """Disjoint union of graphs with per-graph segment ids."""
    node_x: np.ndarray  # (N, F_n)
    edge_t: np.ndarray  # (E, 1)
    glob: np.ndarray  # (B, F_g)
    src: np.ndarray  # (E,) global node ids
    dst: np.ndarray  # (E,)
    node_graph: np.ndarray  # (N,)
    edge_graph: np.ndarray  # (E,)
    n_graphs: int = field(default=0)

    @classmethod
    def from_features(cls, features: list[GraphFeatures]) -> "GraphBatch":
        node_x, edge_t, glob = [], [], []
        src, dst, node_graph, edge_graph = [], [], [], []
        offset = 0
        for gi, f in enumerate(features):
            node_x.append(f.node_features)
            edge_t.append(f.edge_features)
            glob.append(f.global_features)
            src.append(f.edge_src + offset)
            dst.append(f.edge_dst + offset)
            node_graph.append(np.full(f.n_nodes, gi, dtype=np.int64))
            edge_graph.append(np.full(len(f.edge_src), gi, dtype=np.int64))
            offset += f.n_nodes
        return cls(
            node_x=np.concatenate(node_x, axis=0),
            edge_t=np.concatenate(edge_t)[:, None],
            glob=np.stack(glob, axis=0),
            src=np.concatenate(src).astype(np.int64),
            dst=np.concatenate(dst).astype(np.int64),
            node_graph=np.concatenate(node_graph),
            edge_graph=np.concatenate(edge_graph),
            n_graphs=len(features),
        )


def _glorot(rng, fan_in, fan_out):
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


def _init_mlp(params, prefix, rng, sizes):
    for i, (fi, fo) in enumerate(zip(sizes[:-1], sizes[1:])):
        params[f"{prefix}.w{i}"] = Tensor(_glorot(rng, fi, fo), requires_grad=True)
        params[f"{prefix}.b{i}"] = Tensor(np.zeros(fo), requires_grad=True)


def _mlp(params, prefix, x, n_layers, act):
    for i in range(n_layers):
        x = ag.add(ag.matmul(x, params[f"{prefix}.w{i}"]), params[f"{prefix}.b{i}"])
        if i < n_layers - 1:
            x = act(x)
    return x


def _mlp_depth(sizes) -> int:
    return len(sizes) - 1


def init_params(config: MegnetConfig, rng) -> dict[str, Tensor]:
    p: dict[str, Tensor] = {}
    _init_mlp(p, "embed.node", rng, (config.n_node_features, config.node_embed))
    _init_mlp(p, "embed.edge", rng, (config.n_edge_features, config.edge_embed))
    _init_mlp(p, "embed.glob", rng, (config.n_global_features, config.global_embed))
    ne, ee, ge = config.node_embed, config.edge_embed, config.global_embed
    for k in range(config.layers):
        _init_mlp(p, f"layer{k}.edge", rng, (2 * ne + ee + ge, config.mlp_hidden, ee))
        _init_mlp(p, f"layer{k}.node", rng, (ne + ee + ge, config.mlp_hidden, ne))
        _init_mlp(p, f"layer{k}.glob", rng, (ne + ee + ge, config.mlp_hidden, ge))
    readout = ne + ee + ge
    if config.dueling:
        _init_mlp(p, "head.value", rng, (readout, *config.head_hidden, 1))
        _init_mlp(p, "head.adv", rng, (readout, *config.head_hidden, config.output))
    else:
        _init_mlp(p, "head.out", rng, (readout, *config.head_hidden, config.output))
    return p


def forward(params: dict, config: MegnetConfig, batch: GraphBatch | GraphFeatures) -> Tensor:
    """Batched forward pass; returns (n_graphs, output)."""
    if isinstance(batch, GraphFeatures):
        batch = GraphBatch.from_features([batch])
    if batch.node_x.shape[1] != config.n_node_features:
        raise ShapeError(f"node features {batch.node_x.shape[1]} != "
                         f"configured {config.n_node_features}")
    if batch.glob.shape[1] != config.n_global_features:
        raise ShapeError(f"global features {batch.glob.shape[1]} != "
                         f"configured {config.n_global_features}")
    act = ACTIVATIONS[config.activation]
    n_nodes = len(batch.node_x)
    n_graphs = batch.n_graphs

    h = _mlp(params, "embed.node", Tensor(batch.node_x), 1, act)
    e = _mlp(params, "embed.edge", Tensor(batch.edge_t), 1, act)
    g = _mlp(params, "embed.glob", Tensor(batch.glob), 1, act)

    for k in range(config.layers):
        g_edge = ag.gather_rows(g, batch.edge_graph)
        e_in = ag.concat([ag.gather_rows(h, batch.src),
                          ag.gather_rows(h, batch.dst), e, g_edge], axis=1)
        e = ag.add(e, _mlp(params, f"layer{k}.edge", e_in, 2, act))
        agg = ag.segment_mean(e, batch.src, n_nodes)
        h_in = ag.concat([h, agg, ag.gather_rows(g, batch.node_graph)], axis=1)
        h = ag.add(h, _mlp(params, f"layer{k}.node", h_in, 2, act))
        g_in = ag.concat([ag.segment_mean(h, batch.node_graph, n_graphs),
                          ag.segment_mean(e, batch.edge_graph, n_graphs), g], axis=1)
        g = ag.add(g, _mlp(params, f"layer{k}.glob", g_in, 2, act))

    readout = ag.concat([ag.segment_mean(h, batch.node_graph, n_graphs),
                         ag.segment_mean(e, batch.edge_graph, n_graphs), g], axis=1)
    head_depth = len(config.head_hidden) + 1
    if config.dueling:
        value = _mlp(params, "head.value", readout, head_depth, act)
        adv = _mlp(params, "head.adv", readout, head_depth, act)
        centered = ag.sub(adv, ag.tmean(adv, axis=1, keepdims=True))
        return ag.add(value, centered)
    return _mlp(params, "head.out", readout, head_depth, act)


def copy_params(params: dict, requires_grad: bool = False) -> dict:
    return {k: Tensor(v.data.copy(), requires_grad=requires_grad)
            for k, v in params.items()}


def zero_grads(params: dict) -> None:
    for v in params.values():
        v.grad = None
