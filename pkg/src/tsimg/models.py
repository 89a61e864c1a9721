"""The three trainable architectures and their analytic gradients.

All parameters live in a flat dict (name -> float64 ndarray) so the Adam
optimizer, checkpointing, and finite-difference checks can treat every
architecture uniformly. Forward passes cache intermediates; backward passes
consume them and return a gradient dict with the same keys.

Architectures (all share the patch-projection front end):
  wolvm     patch embed -> per-token linear layer
  lvm2attn  patch embed -> one multi-head self-attention block (residual + LN)
  minimae   patch embed (+ learned mask token) -> attention block -> linear
            patch decoder

Task heads: classification (mean-pool per variate, concat, linear),
linear forecasting (flatten tokens, linear), and masked-patch
reconstruction (linear decoder, loss on masked patches only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import ForecastMask, PatchSequence
from .errors import (
    NonFiniteLossError,
    RoutingError,
    ShapeMismatchError,
)
from .imaging import VALUE_PRESERVING_METHODS

ARCHS = ("wolvm", "lvm2attn", "minimae")
TASKS = ("classify", "forecast_linear", "forecast_reconstruct")

LN_EPS = 1e-8

ParamSet = dict  # name -> np.ndarray
GradSet = dict


@dataclass
class ModelConfig:
    arch: str = "lvm2attn"
    task: str = "forecast_linear"
    image_size: int = 64
    patch_size: int = 8
    embed_dim: int = 64
    num_heads: int = 4
    horizon: int = 96          # forecast tasks
    num_classes: int = 2       # classify
    num_variates: int = 1      # classify: variates concatenated at the head

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ShapeMismatchError(f"unknown arch {self.arch!r}")
        if self.task not in TASKS:
            raise ShapeMismatchError(f"unknown task {self.task!r}")
        if self.image_size % self.patch_size != 0:
            raise ShapeMismatchError("image_size must be divisible by patch_size")
        if self.embed_dim % self.num_heads != 0:
            raise ShapeMismatchError("embed_dim must be divisible by num_heads")

    @property
    def grid_side(self) -> int:
        return self.image_size // self.patch_size

    @property
    def n_patches(self) -> int:
        return self.grid_side ** 2

    @property
    def patch_dim(self) -> int:
        return 3 * self.patch_size ** 2


def validate_routing(task: str, imaging_method: str) -> None:
    """Enforce the framework routing: mask-reconstruction forecasting only
    works on imaging methods whose pixels are raw series values."""
    if task == "forecast_reconstruct" and imaging_method not in VALUE_PRESERVING_METHODS:
        raise RoutingError(
            f"forecast_reconstruct requires a value-preserving imaging method "
            f"({'/'.join(VALUE_PRESERVING_METHODS)}); got {imaging_method!r}. "
            f"Pixels of {imaging_method!r} images do not hold raw series values, "
            f"so reconstructed patches cannot be read back as forecasts; "
            f"use forecast_linear instead.")


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(cfg: ModelConfig, seed: int = 0) -> ParamSet:
    """Xavier-uniform projections, zero biases, N(0, 0.02) mask token and
    positional embeddings."""
    rng = np.random.default_rng(seed)
    D, N, F = cfg.embed_dim, cfg.n_patches, cfg.patch_dim
    p: ParamSet = {
        "embed_w": _xavier(rng, F, D),
        "embed_b": np.zeros(D),
        "pos": rng.normal(0.0, 0.02, size=(N, D)),
    }
    if cfg.arch == "wolvm":
        p["body_w"] = _xavier(rng, D, D)
        p["body_b"] = np.zeros(D)
    else:
        for name in ("wq", "wk", "wv", "wo"):
            p[name] = _xavier(rng, D, D)
        p["ln_g"] = np.ones(D)
        p["ln_b"] = np.zeros(D)
    if cfg.task == "forecast_reconstruct":
        p["mask_token"] = rng.normal(0.0, 0.02, size=D)
        p["dec_w"] = _xavier(rng, D, F)
        p["dec_b"] = np.zeros(F)
    elif cfg.task == "forecast_linear":
        p["head_w"] = _xavier(rng, N * D, cfg.horizon)
        p["head_b"] = np.zeros(cfg.horizon)
    else:
        p["head_w"] = _xavier(rng, cfg.num_variates * D, cfg.num_classes)
        p["head_b"] = np.zeros(cfg.num_classes)
    return p


def zeros_like_params(params: ParamSet) -> GradSet:
    return {k: np.zeros_like(v) for k, v in params.items()}


def count_params(params: ParamSet) -> int:
    return sum(v.size for v in params.values())


# --- patch embedding ----------------------------------------------------

def forward_embed(patches: np.ndarray, params: ParamSet,
                  mask_rows: np.ndarray | None = None):
    """tokens = W_e @ patch + b + pos; masked rows (reconstruction task)
    use mask_token + pos instead of the projected patch."""
    if patches.shape[1] != params["embed_w"].shape[0]:
        raise ShapeMismatchError(
            f"patch dim {patches.shape[1]} != embed fan-in {params['embed_w'].shape[0]}")
    proj = patches @ params["embed_w"] + params["embed_b"]
    if mask_rows is not None and mask_rows.any():
        proj = np.where(mask_rows[:, None], params["mask_token"], proj)
    tokens = proj + params["pos"][: patches.shape[0]]
    cache = {"patches": patches, "mask_rows": mask_rows}
    return tokens, cache


def backward_embed(d_tokens: np.ndarray, cache: dict, grads: GradSet) -> None:
    patches = cache["patches"]
    mask_rows = cache["mask_rows"]
    grads["pos"][: d_tokens.shape[0]] += d_tokens
    d_proj = d_tokens
    if mask_rows is not None and mask_rows.any():
        grads["mask_token"] += d_tokens[mask_rows].sum(axis=0)
        d_proj = d_tokens * (~mask_rows)[:, None]
    grads["embed_w"] += patches.T @ d_proj
    grads["embed_b"] += d_proj.sum(axis=0)


# --- bodies -------------------------------------------------------------

def forward_body(tokens: np.ndarray, params: ParamSet, arch: str):
    if arch == "wolvm":
        out = tokens @ params["body_w"] + params["body_b"]
        return out, {"kind": "linear", "tokens": tokens}
    return forward_attention(tokens, params)


def backward_body(d_out: np.ndarray, cache: dict, params: ParamSet,
                  grads: GradSet) -> np.ndarray:
    if cache["kind"] == "linear":
        grads["body_w"] += cache["tokens"].T @ d_out
        grads["body_b"] += d_out.sum(axis=0)
        return d_out @ params["body_w"].T
    return backward_attention(d_out, cache, params, grads)


def forward_attention(tokens: np.ndarray, params: ParamSet):
    """Multi-head self-attention with output projection, residual add and
    layer norm. Returns (output, cache)."""
    N, D = tokens.shape
    h = _infer_heads(params, D)
    dh = D // h
    Q = tokens @ params["wq"]
    K = tokens @ params["wk"]
    V = tokens @ params["wv"]
    Qh = Q.reshape(N, h, dh).transpose(1, 0, 2)
    Kh = K.reshape(N, h, dh).transpose(1, 0, 2)
    Vh = V.reshape(N, h, dh).transpose(1, 0, 2)
    scores = Qh @ Kh.transpose(0, 2, 1) / np.sqrt(dh)
    scores -= scores.max(axis=2, keepdims=True)
    exps = np.exp(scores)
    A = exps / exps.sum(axis=2, keepdims=True)           # (h, N, N)
    Oh = A @ Vh
    O = Oh.transpose(1, 0, 2).reshape(N, D)
    attn = O @ params["wo"]
    z = tokens + attn
    mu = z.mean(axis=1, keepdims=True)
    var = z.var(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (z - mu) * inv_std
    out = params["ln_g"] * xhat + params["ln_b"]
    cache = {"kind": "attn", "tokens": tokens, "Qh": Qh, "Kh": Kh, "Vh": Vh,
             "A": A, "O": O, "xhat": xhat, "inv_std": inv_std, "h": h, "dh": dh}
    return out, cache


def attention_weights(tokens: np.ndarray, params: ParamSet) -> np.ndarray:
    """(heads, N, N) row-stochastic attention matrix (diagnostics)."""
    _, cache = forward_attention(tokens, params)
    return cache["A"]


def _infer_heads(params: ParamSet, D: int) -> int:
    h = params.get("_num_heads")
    if h is None:
        raise ShapeMismatchError("attention params missing _num_heads marker")
    return int(h)


def backward_attention(d_out: np.ndarray, cache: dict, params: ParamSet,
                       grads: GradSet) -> np.ndarray:
    tokens, xhat, inv_std = cache["tokens"], cache["xhat"], cache["inv_std"]
    N, D = tokens.shape
    h, dh = cache["h"], cache["dh"]
    grads["ln_g"] += (d_out * xhat).sum(axis=0)
    grads["ln_b"] += d_out.sum(axis=0)
    d_xhat = d_out * params["ln_g"]
    dz = inv_std * (d_xhat
                    - d_xhat.mean(axis=1, keepdims=True)
                    - xhat * (d_xhat * xhat).mean(axis=1, keepdims=True))
    d_attn = dz
    grads["wo"] += cache["O"].T @ d_attn
    dO = d_attn @ params["wo"].T
    dOh = dO.reshape(N, h, dh).transpose(1, 0, 2)
    A, Qh, Kh, Vh = cache["A"], cache["Qh"], cache["Kh"], cache["Vh"]
    dA = dOh @ Vh.transpose(0, 2, 1)
    dVh = A.transpose(0, 2, 1) @ dOh
    d_scores = A * (dA - (dA * A).sum(axis=2, keepdims=True))
    scale = 1.0 / np.sqrt(dh)
    dQh = d_scores @ Kh * scale
    dKh = d_scores.transpose(0, 2, 1) @ Qh * scale
    dQ = dQh.transpose(1, 0, 2).reshape(N, D)
    dK = dKh.transpose(1, 0, 2).reshape(N, D)
    dV = dVh.transpose(1, 0, 2).reshape(N, D)
    grads["wq"] += tokens.T @ dQ
    grads["wk"] += tokens.T @ dK
    grads["wv"] += tokens.T @ dV
    d_tokens = dz + dQ @ params["wq"].T + dK @ params["wk"].T + dV @ params["wv"].T
    return d_tokens


# --- heads --------------------------------------------------------------

def forward_classify(tokens_per_variate: list[np.ndarray], params: ParamSet) -> np.ndarray:
    """Mean-pool tokens per variate, concatenate, linear head -> logits."""
    pooled = [t.mean(axis=0) for t in tokens_per_variate]
    feat = np.concatenate(pooled)
    if feat.shape[0] != params["head_w"].shape[0]:
        raise ShapeMismatchError(
            f"feature dim {feat.shape[0]} != head fan-in {params['head_w'].shape[0]}")
    return feat @ params["head_w"] + params["head_b"]


def argmax_class(logits: np.ndarray) -> int:
    """Deterministic argmax; ties break toward the lower class index."""
    return int(np.argmax(logits))


def forward_forecast_linear(tokens: np.ndarray, params: ParamSet) -> np.ndarray:
    flat = tokens.reshape(-1)
    if flat.shape[0] != params["head_w"].shape[0]:
        raise ShapeMismatchError(
            f"flattened dim {flat.shape[0]} != head fan-in {params['head_w'].shape[0]}")
    return flat @ params["head_w"] + params["head_b"]


def forward_reconstruct(seq: PatchSequence, mask: ForecastMask, params: ParamSet,
                        cfg: ModelConfig) -> PatchSequence:
    """Full framework-(d) forward: masked tokens become the mask token,
    the decoder regenerates patches, and unmasked output patches are the
    inputs passed through untouched."""
    params = _with_heads(params, cfg)
    mask_rows = mask.row_mask(seq.patches.shape[0])
    tokens, _ = forward_embed(seq.patches, params, mask_rows)
    body_out, _ = forward_body(tokens, params, cfg.arch)
    decoded = body_out @ params["dec_w"] + params["dec_b"]
    out = np.where(mask_rows[:, None], decoded, seq.patches)
    return PatchSequence(patches=out, grid=seq.grid, patch_size=seq.patch_size)


# --- batched loss + gradients ------------------------------------------

@dataclass
class ClassifySample:
    patch_seqs: list[np.ndarray]    # per-variate (N, F) patch matrices
    label: int


@dataclass
class ForecastSample:
    patches: np.ndarray             # (N, F)
    target: np.ndarray              # (T',)


@dataclass
class ReconstructSample:
    patches: np.ndarray             # (N, F) input (horizon region placeholder)
    target_patches: np.ndarray      # (N, F) ground truth in the same scale
    mask_rows: np.ndarray           # bool (N,)


def _softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max())
    return e / e.sum()


def _sample_loss_grad(sample, params: ParamSet, cfg: ModelConfig,
                      grads: GradSet | None):
    """Loss (and gradient accumulation when grads is not None) for one
    sample. Returns the scalar loss."""
    if cfg.task == "classify":
        token_list, caches = [], []
        for patches in sample.patch_seqs:
            tokens, ec = forward_embed(patches, params)
            body, bc = forward_body(tokens, params, cfg.arch)
            token_list.append(body)
            caches.append((ec, bc))
        logits = forward_classify(token_list, params)
        probs = _softmax(logits)
        loss = -np.log(max(probs[sample.label], 1e-300))
        if grads is not None:
            d_logits = probs.copy()
            d_logits[sample.label] -= 1.0
            feat = np.concatenate([t.mean(axis=0) for t in token_list])
            grads["head_w"] += np.outer(feat, d_logits)
            grads["head_b"] += d_logits
            d_feat = params["head_w"] @ d_logits
            D = cfg.embed_dim
            for v, (ec, bc) in enumerate(caches):
                n = token_list[v].shape[0]
                d_body = np.tile(d_feat[v * D:(v + 1) * D] / n, (n, 1))
                d_tokens = backward_body(d_body, bc, params, grads)
                backward_embed(d_tokens, ec, grads)
        return loss

    if cfg.task == "forecast_linear":
        tokens, ec = forward_embed(sample.patches, params)
        body, bc = forward_body(tokens, params, cfg.arch)
        pred = forward_forecast_linear(body, params)
        err = pred - sample.target
        loss = float(np.mean(err * err))
        if grads is not None:
            d_pred = 2.0 * err / err.size
            flat = body.reshape(-1)
            grads["head_w"] += np.outer(flat, d_pred)
            grads["head_b"] += d_pred
            d_body = (params["head_w"] @ d_pred).reshape(body.shape)
            d_tokens = backward_body(d_body, bc, params, grads)
            backward_embed(d_tokens, ec, grads)
        return loss

    # forecast_reconstruct: MSE on masked patch entries only
    mask_rows = sample.mask_rows
    n_masked = int(mask_rows.sum())
    if n_masked == 0:
        from .errors import EmptyMaskError
        raise EmptyMaskError("reconstruction loss needs >= 1 masked patch")
    tokens, ec = forward_embed(sample.patches, params, mask_rows)
    body, bc = forward_body(tokens, params, cfg.arch)
    decoded = body @ params["dec_w"] + params["dec_b"]
    err = (decoded - sample.target_patches) * mask_rows[:, None]
    denom = n_masked * decoded.shape[1]
    loss = float((err * err).sum() / denom)
    if grads is not None:
        d_dec = 2.0 * err / denom
        grads["dec_w"] += body.T @ d_dec
        grads["dec_b"] += d_dec.sum(axis=0)
        d_body = d_dec @ params["dec_w"].T
        d_tokens = backward_body(d_body, bc, params, grads)
        backward_embed(d_tokens, ec, grads)
    return loss


def batch_loss(batch: list, params: ParamSet, cfg: ModelConfig) -> float:
    """Mean loss over a batch, forward only."""
    params = _with_heads(params, cfg)
    total = 0.0
    for s in batch:
        total += _sample_loss_grad(s, params, cfg, None)
    loss = total / len(batch)
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss is {loss}")
    return loss


def backward(batch: list, params: ParamSet, cfg: ModelConfig):
    """Mean loss and analytic gradients over a batch."""
    params = _with_heads(params, cfg)
    grads = zeros_like_params({k: v for k, v in params.items() if k != "_num_heads"})
    total = 0.0
    for s in batch:
        total += _sample_loss_grad(s, params, cfg, grads)
    b = len(batch)
    for k in grads:
        grads[k] /= b
    loss = total / b
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss is {loss}")
    return loss, grads


def _with_heads(params: ParamSet, cfg: ModelConfig) -> ParamSet:
    """Attention kernels need the head count; carry it alongside the
    tensors without making it a trainable entry."""
    if cfg.arch == "wolvm" or "_num_heads" in params:
        return params
    p = dict(params)
    p["_num_heads"] = cfg.num_heads
    return p


def predict_linear(sample_patches: np.ndarray, params: ParamSet,
                   cfg: ModelConfig) -> np.ndarray:
    params = _with_heads(params, cfg)
    tokens, _ = forward_embed(sample_patches, params)
    body, _ = forward_body(tokens, params, cfg.arch)
    return forward_forecast_linear(body, params)


def predict_class(patch_seqs: list[np.ndarray], params: ParamSet,
                  cfg: ModelConfig) -> int:
    params = _with_heads(params, cfg)
    token_list = []
    for patches in patch_seqs:
        tokens, _ = forward_embed(patches, params)
        body, _ = forward_body(tokens, params, cfg.arch)
        token_list.append(body)
    return argmax_class(forward_classify(token_list, params))
