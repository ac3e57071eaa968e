"""Residual MLP pair predictor with hand-written reverse-mode gradients.

Architecture (batch-major, ``H`` hidden width, ``D`` residual width)::

    v0 = x W_in^T + b_in            r = relu(v0) W_proj^T + b_proj
    repeat blocks:  r = r + relu(LN(r) W_a^T + b_a) W_b^T + b_b
    o  = relu(LN(r) W_ha^T + b_ha) W_hb^T + b_hb

The head turns ``o`` into a joint over ``(Y1, Y2)``.
"""

from __future__ import annotations

import logging
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import expit, logsumexp, softmax

from core.algebra import symmetric_eigh
from core.errors import NonFiniteActivation, ZeroProbabilityTarget
from core.types import JointPairDistribution, default_labels
from models.base import JointPairModel

logger = logging.getLogger(__name__)

LN_EPS = 1e-5
MIN_TARGET_PROB = 1e-300

HeadKind = Literal["binary", "symmetric", "bernoulli"]


class MlpConfig(BaseModel):
    """Shape of the network and its output head."""

    input_dim: int = Field(default=1, ge=1)
    hidden: int = Field(default=512, ge=1, description="Width of the expanded layers")
    width: int = Field(default=128, ge=1, description="Width of the residual stream")
    blocks: int = Field(default=3, ge=0)
    head: HeadKind = "binary"
    classes: int = Field(default=2, ge=2, description="Alphabet size for the symmetric head")
    eigen_penalty_weight: float = Field(default=0.0, ge=0.0)

    @property
    def output_dim(self) -> int:
        if self.head == "binary":
            return 2
        if self.head == "bernoulli":
            return 1
        return self.classes * self.classes


def _layer_norm(x, gain, bias):
    mean = x.mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(x.var(axis=1, keepdims=True) + LN_EPS)
    xhat = (x - mean) * inv_std
    return xhat * gain + bias, (xhat, inv_std)


def _layer_norm_backward(dy, gain, cache):
    xhat, inv_std = cache
    dgain = (dy * xhat).sum(axis=0)
    dbias = dy.sum(axis=0)
    dxhat = dy * gain
    n = xhat.shape[1]
    dx = inv_std / n * (
        n * dxhat - dxhat.sum(axis=1, keepdims=True) - xhat * (dxhat * xhat).sum(axis=1, keepdims=True)
    )
    return dx, dgain, dbias


def init_params(config: MlpConfig, seed: int) -> dict[str, np.ndarray]:
    """Fan-in scaled normal weights. The input bias is standard normal so
    ReLU kinks spread across the input range; other biases start at zero."""
    rng = np.random.default_rng(seed)
    h, d = config.hidden, config.width

    def dense(rows, cols, gain=2.0):
        return rng.standard_normal((rows, cols)) * np.sqrt(gain / cols)

    params = {
        "in.W": dense(h, config.input_dim),
        "in.b": rng.standard_normal(h),
        "proj.W": dense(d, h, 1.0),
        "proj.b": np.zeros(d),
    }
    for i in range(config.blocks):
        params[f"block{i}.ln.g"] = np.ones(d)
        params[f"block{i}.ln.b"] = np.zeros(d)
        params[f"block{i}.Wa"] = dense(h, d)
        params[f"block{i}.ba"] = np.zeros(h)
        params[f"block{i}.Wb"] = dense(d, h, 1.0 / max(config.blocks, 1))
        params[f"block{i}.bb"] = np.zeros(d)
    params["head.ln.g"] = np.ones(d)
    params["head.ln.b"] = np.zeros(d)
    params["head.Wa"] = dense(h, d)
    params["head.ba"] = np.zeros(h)
    params["head.Wb"] = dense(config.output_dim, h, 1.0)
    params["head.bb"] = np.zeros(config.output_dim)
    return params


class MlpPairModel(JointPairModel):
    """Trainable pair predictor; parameters are float64 numpy arrays."""

    name = "mlp"
    display_name = "Residual MLP Pair Model"

    def __init__(
        self,
        config: MlpConfig,
        params: dict[str, np.ndarray] | None = None,
        seed: int = 0,
        labels: tuple[str, ...] = (),
    ):
        self.config = config
        self.seed = seed
        self.params = params if params is not None else init_params(config, seed)
        k = 2 if config.head in ("binary", "bernoulli") else config.classes
        self.labels = tuple(labels) or default_labels(k)

    # ===================
    # Forward pass
    # ===================

    def encode(self, xs) -> np.ndarray:
        arr = np.asarray(xs, dtype=np.float64)
        return arr.reshape(arr.shape[0] if arr.ndim else 1, self.config.input_dim)

    def _trunk(self, x: np.ndarray):
        p = self.params
        cache: dict[str, Any] = {"x": x}
        v0 = x @ p["in.W"].T + p["in.b"]
        a0 = np.maximum(v0, 0.0)
        r = a0 @ p["proj.W"].T + p["proj.b"]
        cache["v0"], cache["a0"] = v0, a0
        for i in range(self.config.blocks):
            u, ln = _layer_norm(r, p[f"block{i}.ln.g"], p[f"block{i}.ln.b"])
            v = u @ p[f"block{i}.Wa"].T + p[f"block{i}.ba"]
            a = np.maximum(v, 0.0)
            r = r + a @ p[f"block{i}.Wb"].T + p[f"block{i}.bb"]
            cache[f"block{i}"] = (u, ln, v, a)
        u, ln = _layer_norm(r, p["head.ln.g"], p["head.ln.b"])
        v = u @ p["head.Wa"].T + p["head.ba"]
        a = np.maximum(v, 0.0)
        out = a @ p["head.Wb"].T + p["head.bb"]
        cache["head"] = (u, ln, v, a)
        if not np.all(np.isfinite(out)):
            raise NonFiniteActivation("network output is not finite")
        return out, cache

    def outputs(self, xs) -> np.ndarray:
        """Raw head activations for a batch of inputs."""
        return self._trunk(self.encode(xs))[0]

    def binary_params(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """``(mu, rho)`` arrays for the binary head, or read off a 2 x 2 symmetric head."""
        if self.config.head == "binary":
            out = self.outputs(xs)
            return expit(out[:, 0]), expit(out[:, 1])
        if self.config.head == "symmetric" and self.config.classes == 2:
            j = self.joints(xs)
            mu = j[:, 1, :].sum(axis=1)
            spread = mu * (1.0 - mu)
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(spread > 0, 1.0 - j[:, 0, 1] / spread, 1.0)
            return mu, np.clip(rho, 0.0, 1.0)
        raise ValueError("binary_params needs a binary alphabet")

    def bernoulli_prob(self, xs) -> np.ndarray:
        """``P(Y=1)`` for the single-response head."""
        if self.config.head != "bernoulli":
            raise ValueError("bernoulli_prob needs the bernoulli head")
        return expit(self.outputs(xs)[:, 0])

    def joints(self, xs) -> np.ndarray:
        """Stack of K x K joints, shape (B, K, K)."""
        out = self.outputs(xs)
        return self._head_joints(out)

    def _head_joints(self, out: np.ndarray) -> np.ndarray:
        head = self.config.head
        if head == "binary":
            mu, rho = expit(out[:, 0]), expit(out[:, 1])
            return binary_joint_batch(mu, rho)
        if head == "bernoulli":
            p = expit(out[:, 0])
            q = np.stack([1.0 - p, p], axis=1)
            return q[:, :, None] * q[:, None, :]
        k = self.config.classes
        logits = out.reshape(-1, k, k)
        sym = logits + logits.transpose(0, 2, 1)
        return softmax(sym.reshape(-1, k * k), axis=1).reshape(-1, k, k)

    def joint(self, x: Any) -> JointPairDistribution:
        matrix = self.joints([x] if np.ndim(x) < 2 else x)[0]
        return JointPairDistribution(matrix / matrix.sum(), self.labels)

    # ===================
    # Loss and gradients
    # ===================

    def loss_and_grad(self, xs, y1, y2) -> tuple[float, float, dict[str, np.ndarray]]:
        """Mean pair negative log-likelihood plus eigenvalue penalty, and its gradient.

        Returns:
            (total loss, penalty part, gradient per parameter)

        Raises:
            ZeroProbabilityTarget: if a target cell has probability below 1e-300.
        """
        x = self.encode(xs)
        i1 = np.asarray(y1, dtype=np.int64)
        i2 = np.asarray(y2, dtype=np.int64)
        batch = x.shape[0]
        out, cache = self._trunk(x)
        head = self.config.head
        penalty = 0.0

        if head == "binary":
            nll, dout = _binary_head_grad(out, i1, i2)
        elif head == "bernoulli":
            p = expit(out[:, 0])
            nll = -0.5 * (_safe_log(np.where(i1 == 1, p, 1 - p)) + _safe_log(np.where(i2 == 1, p, 1 - p)))
            dout = (0.5 * ((p - i1) + (p - i2)))[:, None]
        else:
            nll, dout, penalty = self._symmetric_head_grad(out, i1, i2)

        loss = float(nll.mean()) + penalty
        grads = self._backward(dout / batch, cache)
        return loss, penalty, grads

    def _symmetric_head_grad(self, out, i1, i2):
        k = self.config.classes
        batch = out.shape[0]
        logits = out.reshape(batch, k, k)
        sym = (logits + logits.transpose(0, 2, 1)).reshape(batch, k * k)
        log_norm = logsumexp(sym, axis=1)
        target = sym[np.arange(batch), i1 * k + i2]
        nll = log_norm - target
        if np.any(target - log_norm < np.log(MIN_TARGET_PROB)):
            raise ZeroProbabilityTarget("target pair has vanishing probability")
        probs = np.exp(sym - log_norm[:, None])
        dsym = probs.copy()
        dsym[np.arange(batch), i1 * k + i2] -= 1.0

        penalty = 0.0
        weight = self.config.eigen_penalty_weight
        if weight > 0.0:
            pen_total = 0.0
            for b in range(batch):
                values, vectors = symmetric_eigh(probs[b].reshape(k, k))
                neg = np.minimum(values, 0.0)
                pen_total += float(np.sum(neg**2))
                grad_p = (vectors * (2.0 * neg)) @ vectors.T
                g = grad_p.reshape(-1) * weight
                # back through the softmax over all K^2 cells
                dsym[b] += probs[b] * (g - np.dot(g, probs[b]))
            penalty = weight * pen_total / batch

        dsym = dsym.reshape(batch, k, k)
        dlogits = dsym + dsym.transpose(0, 2, 1)
        return nll, dlogits.reshape(batch, k * k), penalty

    def _backward(self, dout: np.ndarray, cache) -> dict[str, np.ndarray]:
        p = self.params
        g: dict[str, np.ndarray] = {}
        u, ln, v, a = cache["head"]
        g["head.Wb"] = dout.T @ a
        g["head.bb"] = dout.sum(axis=0)
        dv = (dout @ p["head.Wb"]) * (v > 0)
        g["head.Wa"] = dv.T @ u
        g["head.ba"] = dv.sum(axis=0)
        dr, g["head.ln.g"], g["head.ln.b"] = _layer_norm_backward(dv @ p["head.Wa"], p["head.ln.g"], ln)
        for i in reversed(range(self.config.blocks)):
            u, ln, v, a = cache[f"block{i}"]
            g[f"block{i}.Wb"] = dr.T @ a
            g[f"block{i}.bb"] = dr.sum(axis=0)
            dv = (dr @ p[f"block{i}.Wb"]) * (v > 0)
            g[f"block{i}.Wa"] = dv.T @ u
            g[f"block{i}.ba"] = dv.sum(axis=0)
            du, g[f"block{i}.ln.g"], g[f"block{i}.ln.b"] = _layer_norm_backward(
                dv @ p[f"block{i}.Wa"], p[f"block{i}.ln.g"], ln
            )
            dr = dr + du
        g["proj.W"] = dr.T @ cache["a0"]
        g["proj.b"] = dr.sum(axis=0)
        dv0 = (dr @ p["proj.W"]) * (cache["v0"] > 0)
        g["in.W"] = dv0.T @ cache["x"]
        g["in.b"] = dv0.sum(axis=0)
        return g

    # ===================
    # Serialization
    # ===================

    def to_dict(self) -> dict:
        return {
            "kind": self.name,
            "config": self.config.model_dump(),
            "seed": self.seed,
            "labels": list(self.labels),
            "params": {
                name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
                for name, arr in self.params.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> MlpPairModel:
        params = {
            name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in data["params"].items()
        }
        return cls(
            MlpConfig(**data["config"]), params, int(data.get("seed", 0)), tuple(data.get("labels") or ())
        )


def _safe_log(p: np.ndarray) -> np.ndarray:
    if np.any(p < MIN_TARGET_PROB):
        raise ZeroProbabilityTarget("target response has vanishing probability")
    return np.log(p)


def binary_joint_batch(mu: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Vectorized ``rho * diag(1-mu, mu) + (1-rho) q q^T`` with ``q = (1-mu, mu)``."""
    mu = np.asarray(mu, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    off = (1.0 - rho) * mu * (1.0 - mu)
    j00 = rho * (1.0 - mu) + (1.0 - rho) * (1.0 - mu) ** 2
    j11 = rho * mu + (1.0 - rho) * mu**2
    return np.stack([np.stack([j00, off], axis=-1), np.stack([off, j11], axis=-1)], axis=-2)


def _binary_head_grad(out, i1, i2):
    """NLL of the target cell under the (mu, rho) head and its gradient w.r.t. the two logits."""
    mu, rho = expit(out[:, 0]), expit(out[:, 1])
    j = binary_joint_batch(mu, rho)
    rows = np.arange(out.shape[0])
    target = j[rows, i1, i2]
    nll = -_safe_log(target)

    both_one = (i1 == 1) & (i2 == 1)
    both_zero = (i1 == 0) & (i2 == 0)
    dj_dmu = np.where(
        both_zero,
        -rho - 2.0 * (1.0 - rho) * (1.0 - mu),
        np.where(both_one, rho + 2.0 * (1.0 - rho) * mu, (1.0 - rho) * (1.0 - 2.0 * mu)),
    )
    dj_drho = np.where(both_zero | both_one, mu * (1.0 - mu), -mu * (1.0 - mu))
    dout = np.stack(
        [-dj_dmu / target * mu * (1.0 - mu), -dj_drho / target * rho * (1.0 - rho)], axis=1
    )
    return nll, dout
