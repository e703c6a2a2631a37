"""Dense spatio-temporal encoder.

Two independent streams (temporal tokens = frames, spatial tokens = body-joint
slots) built from stacked layers. Each layer fuses two branches with weights
``alpha`` (convolutional attention) and ``beta`` (dense shift attention):

* dense shift attention: a token-mixing MLP reveals global structure, a
  strided row mask splices the mixed rows back into the original sequence
  every ``gap``-th token, and two shared attention+feed-forward paths (masked
  and original input) are summed;
* convolutional attention: depthwise convolution along the token axis with a
  residual, followed by the same attention+feed-forward stack.

Dense outputs keep one vector per token; ``condense`` max-pools them into a
temporal, a spatial, and a concatenated instance vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .config import ModelConfig
from .errors import ConfigError, ShapeError


@dataclass
class DenseRepresentation:
    """Per-token encoder outputs: y_t is [*, T, C_r], y_s is [*, S, C_r]."""

    y_t: torch.Tensor
    y_s: torch.Tensor


@dataclass
class CondensedVector:
    """Column-wise max pools: t_pool/s_pool are [*, C_r], instance [*, 2*C_r]."""

    t_pool: torch.Tensor
    s_pool: torch.Tensor
    instance: torch.Tensor


def truncated_normal_(tensor: torch.Tensor, std: float = 0.02,
                      generator: torch.Generator | None = None) -> torch.Tensor:
    """In-place truncated normal at +/- 2 std via inverse-CDF sampling."""
    lo = 0.5 * (1.0 + math.erf(-2.0 / math.sqrt(2.0)))
    hi = 1.0 - lo
    u = torch.empty_like(tensor).uniform_(lo, hi, generator=generator)
    tensor.copy_(torch.erfinv(2.0 * u - 1.0) * math.sqrt(2.0) * std)
    return tensor


def reset_parameters(module: nn.Module, seed: int) -> None:
    """Deterministic re-initialization: truncated normal (std 0.02) for
    weights, zeros for biases, normalization layers at identity. Walks modules
    in registration order so the draw sequence is stable.
    """
    g = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, (nn.LayerNorm, nn.BatchNorm1d)):
                if m.weight is not None:
                    m.weight.fill_(1.0)
                if m.bias is not None:
                    m.bias.zero_()
                if isinstance(m, nn.BatchNorm1d) and m.track_running_stats:
                    m.reset_running_stats()
            elif isinstance(m, (nn.Linear, nn.Conv1d)):
                truncated_normal_(m.weight, std=0.02, generator=g)
                if m.bias is not None:
                    m.bias.zero_()
            else:
                for p in m.parameters(recurse=False):
                    truncated_normal_(p, std=0.02, generator=g)


def dsa_hidden(f: torch.Tensor, w1: torch.Tensor, w2: torch.Tensor) -> torch.Tensor:
    """Token-mixing MLP with residual, computed on the transposed sequence.

    ``f`` is [..., L, C]; ``w1``/``w2`` are [L, L]. The input is transposed to
    [..., C, L], mixed as relu(F1 @ W1) @ W2 + F1, and transposed back.
    """
    length = f.shape[-2]
    for w, label in ((w1, "w1"), (w2, "w2")):
        if w.shape != (length, length):
            raise ShapeError(f"{label} must be [{length}, {length}], got {tuple(w.shape)}")
    f1 = f.transpose(-2, -1)
    mixed = torch.relu(f1 @ w1) @ w2 + f1
    return mixed.transpose(-2, -1)


def dense_shift(f_h: torch.Tensor, f: torch.Tensor, gap: int) -> torch.Tensor:
    """Row interleave: token i comes from ``f_h`` when i % gap == 0, else ``f``.

    Pure row selection; every output row is bit-identical to one of the inputs.
    """
    if f_h.shape != f.shape:
        raise ShapeError(f"shape mismatch: {tuple(f_h.shape)} vs {tuple(f.shape)}")
    if gap < 1:
        raise ConfigError(f"gap must be >= 1, got {gap}")
    length = f.shape[-2]
    mask = (torch.arange(length, device=f.device) % gap == 0).unsqueeze(-1)
    return torch.where(mask, f_h, f)


class MultiHeadSelfAttention(nn.Module):
    """Scaled dot-product self-attention over the token axis."""

    def __init__(self, dim: int, num_heads: int):
        super().__init__()
        if dim % num_heads != 0:
            raise ConfigError(f"dim {dim} not divisible by num_heads {num_heads}")
        self.dim = dim
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.q = nn.Linear(dim, dim)
        self.k = nn.Linear(dim, dim)
        self.v = nn.Linear(dim, dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if x.shape[-1] != self.dim:
            raise ShapeError(f"expected channel dim {self.dim}, got {x.shape[-1]}")
        batched = x.dim() == 3
        if not batched:
            x = x.unsqueeze(0)
        b, length, _ = x.shape

        def split(t):
            return t.view(b, length, self.num_heads, self.head_dim).transpose(1, 2)

        q, k, v = split(self.q(x)), split(self.k(x)), split(self.v(x))
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        weights = torch.softmax(scores, dim=-1)  # [b, heads, L, L]
        ctx = (weights @ v).transpose(1, 2).reshape(b, length, self.dim)
        y = self.out(ctx)
        if not batched:
            return y.squeeze(0), weights.squeeze(0)
        return y, weights


class AttentionBlock(nn.Module):
    """Self-attention with residual connection and layer normalization."""

    def __init__(self, dim: int, num_heads: int):
        super().__init__()
        self.attn = MultiHeadSelfAttention(dim, num_heads)
        self.ln = nn.LayerNorm(dim)

    def forward(self, x: torch.Tensor, return_weights: bool = False):
        y, weights = self.attn(x)
        out = self.ln(x + y)
        if return_weights:
            return out, weights
        return out


class FeedForwardBlock(nn.Module):
    """Linear -> GELU -> linear (hidden 2x input), residual, layer norm.

    When the output width differs from the input, the residual goes through a
    linear shortcut so the block can change channel count.
    """

    def __init__(self, dim: int, out_dim: int):
        super().__init__()
        self.lin1 = nn.Linear(dim, 2 * dim)
        self.lin2 = nn.Linear(2 * dim, out_dim)
        self.act = nn.GELU()
        self.shortcut = (nn.Identity() if dim == out_dim
                         else nn.Linear(dim, out_dim, bias=False))
        self.ln = nn.LayerNorm(out_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.ln(self.shortcut(x) + self.lin2(self.act(self.lin1(x))))


class DsaBranch(nn.Module):
    """Dense shift attention: token-mix, strided splice, dual shared SA+FFN."""

    def __init__(self, tokens: int, dim: int, out_dim: int, num_heads: int, gap: int):
        super().__init__()
        if gap < 1:
            raise ConfigError(f"gap must be >= 1, got {gap}")
        self.tokens = tokens
        self.gap = gap
        self.w1 = nn.Parameter(torch.empty(tokens, tokens))
        self.w2 = nn.Parameter(torch.empty(tokens, tokens))
        self.sa = AttentionBlock(dim, num_heads)
        self.ffn = FeedForwardBlock(dim, out_dim)
        with torch.no_grad():
            truncated_normal_(self.w1)
            truncated_normal_(self.w2)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        if f.shape[-2] != self.tokens:
            raise ShapeError(f"expected {self.tokens} tokens, got {f.shape[-2]}")
        f_h = dsa_hidden(f, self.w1, self.w2)
        f_m = dense_shift(f_h, f, self.gap)
        return self.ffn(self.sa(f_m)) + self.ffn(self.sa(f))


class CaBranch(nn.Module):
    """Convolutional attention: depthwise token convolution + residual, SA, FFN."""

    def __init__(self, dim: int, out_dim: int, num_heads: int, kernel_size: int):
        super().__init__()
        if kernel_size % 2 == 0:
            raise ConfigError(f"kernel size must be odd, got {kernel_size}")
        self.conv = nn.Conv1d(dim, dim, kernel_size, padding=kernel_size // 2,
                              groups=dim, bias=False)
        self.sa = AttentionBlock(dim, num_heads)
        self.ffn = FeedForwardBlock(dim, out_dim)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        batched = f.dim() == 3
        x = f if batched else f.unsqueeze(0)
        conv = self.conv(x.transpose(1, 2)).transpose(1, 2)
        if not batched:
            conv = conv.squeeze(0)
        return self.ffn(self.sa(conv + f))


class DsteLayer(nn.Module):
    """Weighted fusion of the two branches: alpha * CA + beta * DSA."""

    def __init__(self, tokens: int, dim: int, out_dim: int, num_heads: int,
                 gap: int, kernel_size: int, alpha: float, beta: float):
        super().__init__()
        if abs(alpha + beta - 1.0) > 1e-9:
            raise ConfigError(f"branch weights must sum to 1: {alpha} + {beta}")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.ca = CaBranch(dim, out_dim, num_heads, kernel_size)
        self.dsa = DsaBranch(tokens, dim, out_dim, num_heads, gap)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        # endpoints bypass the other branch so pure-branch runs are bit-exact
        if self.alpha == 1.0:
            return self.ca(f)
        if self.alpha == 0.0:
            return self.dsa(f)
        return self.alpha * self.ca(f) + self.beta * self.dsa(f)


class TokenEmbedding(nn.Module):
    """Linear map to the embedding space plus a learned per-token table."""

    def __init__(self, in_dim: int, embed_dim: int, tokens: int):
        super().__init__()
        self.proj = nn.Linear(in_dim, embed_dim, bias=False)
        self.position = nn.Parameter(torch.zeros(tokens, embed_dim))
        with torch.no_grad():
            truncated_normal_(self.position)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.proj.in_features:
            raise ShapeError(
                f"expected input width {self.proj.in_features}, got {x.shape[-1]}")
        if x.shape[-2] != self.position.shape[0]:
            raise ShapeError(
                f"expected {self.position.shape[0]} tokens, got {x.shape[-2]}")
        return self.proj(x) + self.position


class StreamEncoder(nn.Module):
    """One stream: embedding followed by stacked fusion layers."""

    def __init__(self, in_dim: int, tokens: int, cfg: ModelConfig):
        super().__init__()
        if cfg.num_layers < 1:
            raise ConfigError("num_layers must be >= 1")
        self.embed = TokenEmbedding(in_dim, cfg.c_e, tokens)
        dims = [cfg.c_e] + [cfg.c_r] * cfg.num_layers
        self.layers = nn.ModuleList([
            DsteLayer(tokens, dims[i], dims[i + 1], cfg.num_heads, cfg.gap,
                      cfg.conv_kernel, cfg.alpha, cfg.beta)
            for i in range(cfg.num_layers)
        ])

    def encode(self, f: torch.Tensor) -> torch.Tensor:
        for layer in self.layers:
            f = layer(f)
        return f

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.encode(self.embed(x))


class SkeletonBackbone(nn.Module):
    """Embedding + dual-stream encoder over the two domain matrices.

    ``forward`` takes the temporal matrix ``x_t`` ([*, T, M*V*C_in]) and the
    spatial matrix ``x_s`` ([*, M*V, T*C_in]) produced by
    :func:`usdrl.skdata.reshape_domains`.
    """

    def __init__(self, cfg: ModelConfig, temporal_tokens: int, spatial_tokens: int):
        super().__init__()
        self.cfg = cfg
        self.temporal_tokens = temporal_tokens
        self.spatial_tokens = spatial_tokens
        temporal_in = spatial_tokens * cfg.c_in
        spatial_in = temporal_tokens * cfg.c_in
        self.temporal = StreamEncoder(temporal_in, temporal_tokens, cfg)
        self.spatial = StreamEncoder(spatial_in, spatial_tokens, cfg)
        reset_parameters(self, cfg.seed)

    def forward(self, x_t: torch.Tensor, x_s: torch.Tensor) -> DenseRepresentation:
        return DenseRepresentation(y_t=self.temporal(x_t), y_s=self.spatial(x_s))

    def encode(self, f_s: torch.Tensor, f_t: torch.Tensor) -> DenseRepresentation:
        """Run only the stacked layers on already-embedded streams."""
        return DenseRepresentation(y_t=self.temporal.encode(f_t),
                                   y_s=self.spatial.encode(f_s))


def condense(rep: DenseRepresentation) -> CondensedVector:
    """Column-wise max over tokens; instance = concat(temporal, spatial)."""
    t_pool = rep.y_t.amax(dim=-2)
    s_pool = rep.y_s.amax(dim=-2)
    return CondensedVector(t_pool=t_pool, s_pool=s_pool,
                           instance=torch.cat([t_pool, s_pool], dim=-1))


def build_backbone(cfg: ModelConfig, T: int, V: int, M: int) -> SkeletonBackbone:
    """Backbone sized for sequences of shape [C_in, T, V, M]."""
    temporal = cfg.temporal_tokens or T
    spatial = cfg.spatial_tokens or M * V
    if temporal != T or spatial != M * V:
        raise ConfigError(
            f"config token counts ({cfg.temporal_tokens}, {cfg.spatial_tokens}) "
            f"do not match data dims T={T}, M*V={M * V}")
    return SkeletonBackbone(cfg, temporal, spatial)
