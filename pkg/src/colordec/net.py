"""Two-headed recurrent decoder, written directly in numpy.

The body is two LSTM layers; per cycle the first layer consumes the
concatenated syndrome increments and flag bits.  Both heads read the
rectified final state of the second layer through one hidden layer of
rectified linear units and a sigmoid output.  The lower head additionally
sees the final syndrome increment and is the one used for predictions;
the upper head only shapes training, which keeps the recurrent body
time-translation invariant.

Gradients are exact backpropagation through time (dropout masks held
constant), checked against central finite differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

PROB_CLIP = 1e-7
_GATES = ("input", "forget", "output", "modulation")  # slices of the stacked 4N axis


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LstmLayerParams:
    """Stacked gate parameters; rows 0..4N group (i, f, o, m) gates."""

    w: np.ndarray   # (4N, D) input weights
    v: np.ndarray   # (4N, N) recurrent weights
    b: np.ndarray   # (4N,)

    @property
    def n(self) -> int:
        return self.w.shape[0] // 4

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def gate(self, name: str, which: str = "w") -> np.ndarray:
        i = _GATES.index(name)
        return getattr(self, which)[i * self.n:(i + 1) * self.n]


@dataclass
class HeadParams:
    wh: np.ndarray  # (N, in_dim) hidden rectified-linear layer
    bh: np.ndarray  # (N,)
    wo: np.ndarray  # (N,) output weights
    bo: np.ndarray  # (1,)


@dataclass
class LstmDecoderParams:
    layer1: LstmLayerParams
    layer2: LstmLayerParams
    head_upper: HeadParams
    head_lower: HeadParams
    n_hidden: int
    d_in: int
    n_final: int    # width of delta_f fed to the lower head

    def tree(self) -> dict[str, np.ndarray]:
        return {
            "l1.w": self.layer1.w, "l1.v": self.layer1.v, "l1.b": self.layer1.b,
            "l2.w": self.layer2.w, "l2.v": self.layer2.v, "l2.b": self.layer2.b,
            "up.wh": self.head_upper.wh, "up.bh": self.head_upper.bh,
            "up.wo": self.head_upper.wo, "up.bo": self.head_upper.bo,
            "low.wh": self.head_lower.wh, "low.bh": self.head_lower.bh,
            "low.wo": self.head_lower.wo, "low.bo": self.head_lower.bo,
        }


def init_params(d_in: int, n_hidden: int, n_final: int, rng) -> LstmDecoderParams:
    """Uniform [-1/sqrt(N), 1/sqrt(N)] weights, zero biases, forget bias 1."""
    s = 1.0 / np.sqrt(n_hidden)

    def u(*shape):
        return rng.uniform(-s, s, size=shape)

    def layer(d):
        b = np.zeros(4 * n_hidden)
        b[n_hidden:2 * n_hidden] = 1.0
        return LstmLayerParams(u(4 * n_hidden, d), u(4 * n_hidden, n_hidden), b)

    def head(in_dim):
        return HeadParams(u(n_hidden, in_dim), np.zeros(n_hidden), u(n_hidden), np.zeros(1))

    return LstmDecoderParams(
        layer1=layer(d_in),
        layer2=layer(n_hidden),
        head_upper=head(n_hidden),
        head_lower=head(n_hidden + n_final),
        n_hidden=n_hidden,
        d_in=d_in,
        n_final=n_final,
    )


def lstm_forward(layer: LstmLayerParams, xs: np.ndarray):
    """Run the layer over xs of shape (T, B, D); returns (hs, cache).

    Implements i,f,o = sigmoid, m = tanh gate pre-activations from input,
    recurrent state and bias; c_t = f*c + i*m; h_t = o*tanh(c_t).
    """
    if not np.all(np.isfinite(xs)):
        raise ValueError("non-finite input to lstm_forward")
    T, B, D = xs.shape
    if D != layer.d:
        raise ValueError(f"input width {D} does not match layer width {layer.d}")
    N = layer.n
    h = np.zeros((B, N))
    c = np.zeros((B, N))
    gates = np.empty((T, B, 4 * N))
    cs = np.empty((T, B, N))
    tcs = np.empty((T, B, N))
    hs = np.empty((T, B, N))
    for t in range(T):
        z = xs[t] @ layer.w.T + h @ layer.v.T + layer.b
        i = _sigmoid(z[:, :N])
        f = _sigmoid(z[:, N:2 * N])
        o = _sigmoid(z[:, 2 * N:3 * N])
        g = np.tanh(z[:, 3 * N:])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[t, :, :N] = i
        gates[t, :, N:2 * N] = f
        gates[t, :, 2 * N:3 * N] = o
        gates[t, :, 3 * N:] = g
        cs[t] = c
        tcs[t] = tc
        hs[t] = h
    cache = {"xs": xs, "gates": gates, "cs": cs, "tcs": tcs, "hs": hs}
    return hs, cache


def lstm_backward(layer: LstmLayerParams, cache: dict, dhs: np.ndarray):
    """Exact BPTT; dhs holds dLoss/dh_t.  Returns (grads, dxs)."""
    xs, gates, cs, tcs, hs = cache["xs"], cache["gates"], cache["cs"], cache["tcs"], cache["hs"]
    T, B, D = xs.shape
    N = layer.n
    dw = np.zeros_like(layer.w)
    dv = np.zeros_like(layer.v)
    db = np.zeros_like(layer.b)
    dxs = np.zeros_like(xs)
    dh_next = np.zeros((B, N))
    dc_next = np.zeros((B, N))
    for t in range(T - 1, -1, -1):
        i = gates[t, :, :N]
        f = gates[t, :, N:2 * N]
        o = gates[t, :, 2 * N:3 * N]
        g = gates[t, :, 3 * N:]
        c_prev = cs[t - 1] if t > 0 else np.zeros((B, N))
        h_prev = hs[t - 1] if t > 0 else np.zeros((B, N))
        dh = dhs[t] + dh_next
        do = dh * tcs[t]
        dc = dh * o * (1.0 - tcs[t] ** 2) + dc_next
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), do * o * (1 - o), dg * (1 - g ** 2)],
            axis=1,
        )
        dw += dz.T @ xs[t]
        dv += dz.T @ h_prev
        db += dz.sum(axis=0)
        dxs[t] = dz @ layer.w
        dh_next = dz @ layer.v
    return {"w": dw, "v": dv, "b": db}, dxs


def _dropout_mask(rng, shape, keep: float):
    # inverted dropout: scale kept units by 1/keep at train time
    return (rng.random(shape) < keep).astype(np.float64) / keep


def decoder_forward(params: LstmDecoderParams, delta: np.ndarray, delta_f: np.ndarray,
                    train: bool = False, dropout_rng=None, keep_prob: float = 0.8):
    """Probabilities (p_upper, p_lower) for a batch of equal-length sequences.

    delta: (T, B, D) per-cycle inputs; delta_f: (B, n_final).  Outputs are
    clipped into [PROB_CLIP, 1 - PROB_CLIP].  Eval mode is deterministic.
    """
    if delta.ndim != 3 or delta.shape[2] != params.d_in:
        raise ValueError("delta must be (T, B, d_in)")
    if delta_f.shape != (delta.shape[1], params.n_final):
        raise ValueError("delta_f must be (B, n_final)")
    T, B, _ = delta.shape
    N = params.n_hidden
    masks = {}
    h1, cache1 = lstm_forward(params.layer1, delta)
    x2 = h1
    if train:
        masks["l1"] = _dropout_mask(dropout_rng, h1.shape, keep_prob)
        x2 = h1 * masks["l1"]
    h2, cache2 = lstm_forward(params.layer2, x2)
    hT = h2[-1]
    if train:
        masks["l2"] = _dropout_mask(dropout_rng, hT.shape, keep_prob)
        hT = hT * masks["l2"]
    u = np.maximum(hT, 0.0)

    def head(hp: HeadParams, inp, key):
        pre = inp @ hp.wh.T + hp.bh
        hidden = np.maximum(pre, 0.0)
        dropped = hidden
        if train:
            masks[key] = _dropout_mask(dropout_rng, hidden.shape, keep_prob)
            dropped = hidden * masks[key]
        logit = dropped @ hp.wo + hp.bo[0]
        return _sigmoid(logit), (inp, pre, hidden, dropped, logit)

    p_up, cache_up = head(params.head_upper, u, "up")
    low_in = np.concatenate([u, delta_f.astype(np.float64)], axis=1)
    p_low, cache_low = head(params.head_lower, low_in, "low")
    cache = {
        "cache1": cache1, "cache2": cache2, "masks": masks, "hT": hT, "u": u,
        "up": cache_up, "low": cache_low, "train": train,
        "p_up": p_up, "p_low": p_low,
    }
    p_up = np.clip(p_up, PROB_CLIP, 1.0 - PROB_CLIP)
    p_low = np.clip(p_low, PROB_CLIP, 1.0 - PROB_CLIP)
    return p_up, p_low, cache


def cross_entropy(p_target, p_model) -> np.ndarray:
    p = np.clip(p_model, PROB_CLIP, 1.0 - PROB_CLIP)
    return -(p_target * np.log(p) + (1.0 - p_target) * np.log(1.0 - p))


def loss_value(p_up, p_low, p_true, params: LstmDecoderParams, c_reg: float) -> float:
    """Mean cost: H(p_true, p_lower) + H(p_true, p_upper)/2 + c |w_eval|^2.

    Only the evaluation-layer weights are regularized, never biases.
    """
    p_true = np.asarray(p_true, dtype=np.float64)
    ce = cross_entropy(p_true, p_low) + 0.5 * cross_entropy(p_true, p_up)
    reg = 0.0
    for hp in (params.head_upper, params.head_lower):
        reg += float(np.sum(hp.wh ** 2) + np.sum(hp.wo ** 2))
    return float(ce.mean() + c_reg * reg)


def loss_and_gradients(params: LstmDecoderParams, delta, delta_f, p_true,
                       c_reg: float, train: bool = True, dropout_rng=None,
                       keep_prob: float = 0.8):
    """Forward + exact backward for one mini-batch.

    Returns (loss, grads, p_upper, p_lower) with grads keyed like
    params.tree() plus the two output biases.
    """
    p_up, p_low, cache = decoder_forward(
        params, delta, delta_f, train=train, dropout_rng=dropout_rng, keep_prob=keep_prob
    )
    p_true = np.asarray(p_true, dtype=np.float64)
    B = p_true.shape[0]
    loss = loss_value(p_up, p_low, p_true, params, c_reg)

    # d(mean CE)/d logit = (sigma(logit) - target) / B, using unclipped sigma
    dlogit_low = (cache["p_low"] - p_true) / B
    dlogit_up = 0.5 * (cache["p_up"] - p_true) / B
    grads: dict[str, np.ndarray] = {}
    masks = cache["masks"]

    def head_backward(hp: HeadParams, hcache, dlogit, key):
        inp, pre, hidden, dropped, _ = hcache
        dwo = dropped.T @ dlogit + 2.0 * c_reg * hp.wo
        dbo = np.array([dlogit.sum()])
        ddropped = np.outer(dlogit, hp.wo)
        dhidden = ddropped * masks[key] if cache["train"] else ddropped
        dpre = dhidden * (pre > 0)
        dwh = dpre.T @ inp + 2.0 * c_reg * hp.wh
        dbh = dpre.sum(axis=0)
        dinp = dpre @ hp.wh
        grads[f"{key}.wh"] = dwh
        grads[f"{key}.bh"] = dbh
        grads[f"{key}.wo"] = dwo
        grads[f"{key}.bo"] = dbo
        return dinp

    du_up = head_backward(params.head_upper, cache["up"], dlogit_up, "up")
    dlow_in = head_backward(params.head_lower, cache["low"], dlogit_low, "low")
    N = params.n_hidden
    du = du_up + dlow_in[:, :N]
    dhT = du * (cache["hT"] > 0)
    if cache["train"]:
        dhT = dhT * masks["l2"]
    T = delta.shape[0]
    dh2 = np.zeros_like(cache["cache2"]["hs"])
    dh2[T - 1] = dhT
    g2, dx2 = lstm_backward(params.layer2, cache["cache2"], dh2)
    dh1 = dx2 * masks["l1"] if cache["train"] else dx2
    g1, _ = lstm_backward(params.layer1, cache["cache1"], dh1)
    grads.update({"l1.w": g1["w"], "l1.v": g1["v"], "l1.b": g1["b"],
                  "l2.w": g2["w"], "l2.v": g2["v"], "l2.b": g2["b"]})
    return loss, grads, p_up, p_low


def save_checkpoint(path, params: LstmDecoderParams, adam_state=None, meta: dict | None = None):
    """Versioned binary dump; reload is bit-exact."""
    arrays = {f"param.{k}": v for k, v in params.tree().items()}
    payload = {
        "version": 1,
        "dims": {"d_in": params.d_in, "n_hidden": params.n_hidden, "n_final": params.n_final},
        "meta": meta or {},
    }
    if adam_state is not None:
        arrays.update({f"adam.m.{k}": v for k, v in adam_state.m.items()})
        arrays.update({f"adam.v.{k}": v for k, v in adam_state.v.items()})
        payload["adam"] = {
            "step": adam_state.step, "lr": adam_state.lr,
            "beta1": adam_state.beta1, "beta2": adam_state.beta2, "eps": adam_state.eps,
        }
    arrays["__meta__"] = np.frombuffer(json.dumps(payload, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path):
    """Returns (params, adam_state_or_None, meta dict)."""
    from .optim import AdamState

    with np.load(path) as data:
        payload = json.loads(bytes(data["__meta__"]).decode())
        if payload["version"] != 1:
            raise ValueError(f"unsupported checkpoint version {payload['version']}")
        dims = payload["dims"]
        arr = {k[len("param."):]: data[k] for k in data.files if k.startswith("param.")}
        params = LstmDecoderParams(
            layer1=LstmLayerParams(arr["l1.w"], arr["l1.v"], arr["l1.b"]),
            layer2=LstmLayerParams(arr["l2.w"], arr["l2.v"], arr["l2.b"]),
            head_upper=HeadParams(arr["up.wh"], arr["up.bh"], arr["up.wo"], arr["up.bo"]),
            head_lower=HeadParams(arr["low.wh"], arr["low.bh"], arr["low.wo"], arr["low.bo"]),
            n_hidden=dims["n_hidden"], d_in=dims["d_in"], n_final=dims["n_final"],
        )
        adam = None
        if "adam" in payload:
            cfg = payload["adam"]
            adam = AdamState(
                m={k[len("adam.m."):]: data[k] for k in data.files if k.startswith("adam.m.")},
                v={k[len("adam.v."):]: data[k] for k in data.files if k.startswith("adam.v.")},
                step=cfg["step"], lr=cfg["lr"], beta1=cfg["beta1"],
                beta2=cfg["beta2"], eps=cfg["eps"],
            )
        return params, adam, payload["meta"]
