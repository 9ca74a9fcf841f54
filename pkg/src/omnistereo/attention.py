"""Height-axis circular attention for panoramic feature maps.

A panorama's vertical axis sweeps the full azimuth, so row ``0`` and row
``h - 1`` are physical neighbours. The attention layer here lets every row
attend to a circular window of rows in the same column: queries and keys
meet modulo the image height, and learned relative-position vectors bias
the logits and values for each in-window offset. Multiple heads run the
same computation with separate projections; their outputs are concatenated
and mixed by a final linear map, with an optional residual connection.

A quadratic global variant (every pixel attends to every pixel, no
positional terms) is included for comparison; the circular layer's cost
grows linearly with the window span instead.

All contractions go through ``np.einsum`` with fixed summation order, so
outputs are reproducible bit for bit and rolling the input rows rolls the
output rows exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .parallel import map_rows


class MultiplyCounter:
    """Tallies scalar multiplications spent in attention contractions.

    Only multiplies inside tensor contractions are counted (projections,
    logit terms, value mixing); softmax exponentials and divisions are not.
    """

    def __init__(self):
        self.total = 0

    def add(self, n: int):
        self.total += int(n)


def circular_offsets(span: int) -> np.ndarray:
    """Window offsets for a given span, centered with the extra slot (for an
    even span) on the positive side."""
    lo = -((span - 1) // 2)
    return np.arange(lo, lo + span)


def neighborhood_indices(height: int, span: int) -> np.ndarray:
    """Row-gather table: entry ``[i, j]`` is the row index the ``j``-th
    window slot of row ``i`` reads, modulo the height."""
    if span < 1:
        raise ValueError(f"span must be at least 1, got {span}")
    if span > height:
        raise ValueError(f"span {span} exceeds height {height}")
    return (np.arange(height)[:, None] + circular_offsets(span)[None, :]) % height


@dataclass(frozen=True)
class AttentionParams:
    """Weights for one circular attention layer.

    Shapes: ``w_q``/``w_k`` are ``(heads, d_q, d_in)``, ``w_v`` is
    ``(heads, d_v, d_in)``, the relative-position tables ``r_q``/``r_k``
    are ``(heads, span, d_q)`` and ``r_v`` is ``(heads, span, d_v)``;
    ``pre`` is ``(d_in, d_in)`` and ``post`` is ``(d_out, heads * d_v)``.
    """

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    r_q: np.ndarray
    r_k: np.ndarray
    r_v: np.ndarray
    pre: np.ndarray
    post: np.ndarray
    residual: bool = True

    def __post_init__(self):
        heads, d_q, d_in = self.w_q.shape
        d_v = self.w_v.shape[1]
        span = self.r_q.shape[1]
        if self.w_k.shape != (heads, d_q, d_in):
            raise ValueError("w_k shape must match w_q")
        if self.w_v.shape != (heads, d_v, d_in):
            raise ValueError(f"w_v must be (heads, d_v, {d_in})")
        if self.r_q.shape != (heads, span, d_q) or self.r_k.shape != (heads, span, d_q):
            raise ValueError("r_q and r_k must be (heads, span, d_q)")
        if self.r_v.shape != (heads, span, d_v):
            raise ValueError("r_v must be (heads, span, d_v)")
        if self.pre.shape != (d_in, d_in):
            raise ValueError(f"pre must be ({d_in}, {d_in})")
        if self.post.ndim != 2 or self.post.shape[1] != heads * d_v:
            raise ValueError(f"post must be (d_out, {heads * d_v})")
        if self.residual and self.d_out != d_in:
            raise ValueError("residual connection needs d_out == d_in")

    @property
    def heads(self) -> int:
        return self.w_q.shape[0]

    @property
    def span(self) -> int:
        return self.r_q.shape[1]

    @property
    def d_in(self) -> int:
        return self.w_q.shape[2]

    @property
    def d_q(self) -> int:
        return self.w_q.shape[1]

    @property
    def d_v(self) -> int:
        return self.w_v.shape[1]

    @property
    def d_out(self) -> int:
        return self.post.shape[0]

    @classmethod
    def randomized(cls, seed: int, d_in: int, heads: int = 4, span: int = 9,
                   d_q: int | None = None, d_v: int | None = None,
                   d_out: int | None = None, residual: bool = True
                   ) -> "AttentionParams":
        """Reproducible random initialization with variance-scaled weights."""
        rng = np.random.default_rng(seed)
        d_q = d_q if d_q is not None else max(1, d_in // heads)
        d_v = d_v if d_v is not None else max(1, d_in // heads)
        d_out = d_out if d_out is not None else d_in
        return cls(
            w_q=rng.normal(0.0, d_in ** -0.5, (heads, d_q, d_in)),
            w_k=rng.normal(0.0, d_in ** -0.5, (heads, d_q, d_in)),
            w_v=rng.normal(0.0, d_in ** -0.5, (heads, d_v, d_in)),
            r_q=rng.normal(0.0, d_q ** -0.5, (heads, span, d_q)),
            r_k=rng.normal(0.0, d_q ** -0.5, (heads, span, d_q)),
            r_v=rng.normal(0.0, d_v ** -0.5, (heads, span, d_v)),
            pre=np.eye(d_in) + rng.normal(0.0, 0.05, (d_in, d_in)),
            post=rng.normal(0.0, (heads * d_v) ** -0.5, (d_out, heads * d_v)),
            residual=residual,
        )

    def save(self, path):
        np.savez(path, w_q=self.w_q, w_k=self.w_k, w_v=self.w_v,
                 r_q=self.r_q, r_k=self.r_k, r_v=self.r_v,
                 pre=self.pre, post=self.post,
                 residual=np.array(self.residual))

    @classmethod
    def load(cls, path) -> "AttentionParams":
        with np.load(path) as blob:
            return cls(w_q=blob["w_q"], w_k=blob["w_k"], w_v=blob["w_v"],
                       r_q=blob["r_q"], r_k=blob["r_k"], r_v=blob["r_v"],
                       pre=blob["pre"], post=blob["post"],
                       residual=bool(blob["residual"]))

    def zeros_like(self) -> "AttentionParams":
        return replace(self, w_q=np.zeros_like(self.w_q),
                       w_k=np.zeros_like(self.w_k),
                       w_v=np.zeros_like(self.w_v),
                       r_q=np.zeros_like(self.r_q),
                       r_k=np.zeros_like(self.r_k),
                       r_v=np.zeros_like(self.r_v),
                       pre=np.zeros_like(self.pre),
                       post=np.zeros_like(self.post))


def _check_input(z: np.ndarray, params: AttentionParams) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 3 or z.shape[2] != params.d_in:
        raise ValueError(f"input must be (h, w, {params.d_in}), got {z.shape}")
    return z


def _softmax(logits: np.ndarray, axis: int) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=axis, keepdims=True)


def circular_attention(z: np.ndarray, params: AttentionParams,
                       workers=None, counter: MultiplyCounter | None = None
                       ) -> np.ndarray:
    """Apply the circular attention layer to a feature map ``(h, w, d_in)``.

    Rows attend within their column to a circular window of ``span`` rows.
    Work is split over column chunks; the result does not depend on the
    worker count.
    """
    z = _check_input(z, params)
    h, w, d_in = z.shape
    idx = neighborhood_indices(h, params.span)
    m, heads = params.span, params.heads
    d_q, d_v = params.d_q, params.d_v

    if counter is not None:
        proj = h * w * d_in * (d_in + heads * (2 * d_q + d_v))
        logits = heads * (3 * h * m * w * d_q)
        mix = heads * (h * m * w * d_v) + h * w * heads * d_v * params.d_out
        counter.add(proj + logits + mix)

    out = np.empty((h, w, params.d_out), dtype=np.float64)

    def run(cols):
        zc = z[:, cols, :]
        z1 = np.einsum("hwd,ed->hwe", zc, params.pre)
        head_outs = []
        for a in range(heads):
            q = np.einsum("hwd,cd->hwc", z1, params.w_q[a])
            k = np.einsum("hwd,cd->hwc", z1, params.w_k[a])
            v = np.einsum("hwd,cd->hwc", z1, params.w_v[a])
            kg = k[idx]
            vg = v[idx]
            logits = (np.einsum("hwc,hmwc->hmw", q, kg)
                      + np.einsum("hwc,mc->hmw", q, params.r_q[a])
                      + np.einsum("hmwc,mc->hmw", kg, params.r_k[a]))
            att = _softmax(logits, axis=1)
            u = vg + params.r_v[a][None, :, None, :]
            head_outs.append(np.einsum("hmw,hmwc->hwc", att, u))
        concat = np.concatenate(head_outs, axis=2)
        y = np.einsum("hwe,oe->hwo", concat, params.post)
        if params.residual:
            y = y + zc
        out[:, cols, :] = y

    map_rows(run, w, workers)
    return out


def circular_attention_backward(z: np.ndarray, params: AttentionParams,
                                upstream: np.ndarray):
    """Gradients of ``sum(circular_attention(z) * upstream)``.

    Returns ``(grad_z, grad_params)`` where ``grad_params`` mirrors the
    parameter container (its ``residual`` flag is just carried over).
    """
    z = _check_input(z, params)
    h, w, d_in = z.shape
    g_out = np.asarray(upstream, dtype=np.float64)
    if g_out.shape != (h, w, params.d_out):
        raise ValueError(f"upstream must be (h, w, {params.d_out})")
    idx = neighborhood_indices(h, params.span)
    heads = params.heads
    d_v = params.d_v

    z1 = np.einsum("hwd,ed->hwe", z, params.pre)
    cache = []
    head_outs = []
    for a in range(heads):
        q = np.einsum("hwd,cd->hwc", z1, params.w_q[a])
        k = np.einsum("hwd,cd->hwc", z1, params.w_k[a])
        v = np.einsum("hwd,cd->hwc", z1, params.w_v[a])
        kg = k[idx]
        vg = v[idx]
        logits = (np.einsum("hwc,hmwc->hmw", q, kg)
                  + np.einsum("hwc,mc->hmw", q, params.r_q[a])
                  + np.einsum("hmwc,mc->hmw", kg, params.r_k[a]))
        att = _softmax(logits, axis=1)
        u = vg + params.r_v[a][None, :, None, :]
        head_outs.append(np.einsum("hmw,hmwc->hwc", att, u))
        cache.append((q, kg, att, u))
    concat = np.concatenate(head_outs, axis=2)

    grads = {name: np.zeros_like(getattr(params, name))
             for name in ("w_q", "w_k", "w_v", "r_q", "r_k", "r_v", "pre", "post")}
    g_z = np.zeros_like(z)
    if params.residual:
        g_z += g_out

    grads["post"][...] = np.einsum("hwo,hwe->oe", g_out, concat)
    g_concat = np.einsum("hwo,oe->hwe", g_out, params.post)
    g_z1 = np.zeros_like(z1)

    for a in range(heads):
        q, kg, att, u = cache[a]
        g_ho = g_concat[:, :, a * d_v:(a + 1) * d_v]

        g_att = np.einsum("hwc,hmwc->hmw", g_ho, u)
        g_u = np.einsum("hmw,hwc->hmwc", att, g_ho)
        grads["r_v"][a] = g_u.sum(axis=(0, 2))
        g_v = np.zeros((h, w, d_v))
        np.add.at(g_v, idx, g_u)

        g_logits = att * (g_att - (att * g_att).sum(axis=1, keepdims=True))
        g_q = (np.einsum("hmw,hmwc->hwc", g_logits, kg)
               + np.einsum("hmw,mc->hwc", g_logits, params.r_q[a]))
        grads["r_q"][a] = np.einsum("hmw,hwc->mc", g_logits, q)
        g_kg = (np.einsum("hmw,hwc->hmwc", g_logits, q)
                + np.einsum("hmw,mc->hmwc", g_logits, params.r_k[a]))
        grads["r_k"][a] = np.einsum("hmw,hmwc->mc", g_logits, kg)
        g_k = np.zeros((h, w, params.d_q))
        np.add.at(g_k, idx, g_kg)

        grads["w_q"][a] = np.einsum("hwc,hwd->cd", g_q, z1)
        grads["w_k"][a] = np.einsum("hwc,hwd->cd", g_k, z1)
        grads["w_v"][a] = np.einsum("hwc,hwd->cd", g_v, z1)
        g_z1 += (np.einsum("hwc,cd->hwd", g_q, params.w_q[a])
                 + np.einsum("hwc,cd->hwd", g_k, params.w_k[a])
                 + np.einsum("hwc,cd->hwd", g_v, params.w_v[a]))

    grads["pre"][...] = np.einsum("hwe,hwd->ed", g_z1, z)
    g_z += np.einsum("hwe,ed->hwd", g_z1, params.pre)
    return g_z, replace(params, **grads)


def circular_attention_reference(z: np.ndarray, params: AttentionParams
                                 ) -> np.ndarray:
    """Loop-everything rendition of :func:`circular_attention`; slow but
    easy to audit."""
    z = _check_input(z, params)
    h, w, _ = z.shape
    offs = circular_offsets(params.span)
    if not 1 <= params.span <= h:
        raise ValueError("invalid span for this height")
    out = np.zeros((h, w, params.d_out))
    for x in range(w):
        z1 = np.stack([params.pre @ z[i, x] for i in range(h)])
        for i in range(h):
            per_head = []
            for a in range(params.heads):
                q = params.w_q[a] @ z1[i]
                logits = []
                values = []
                for j, off in enumerate(offs):
                    src = (i + off) % h
                    k = params.w_k[a] @ z1[src]
                    v = params.w_v[a] @ z1[src]
                    logits.append(q @ k + q @ params.r_q[a, j] + k @ params.r_k[a, j])
                    values.append(v + params.r_v[a, j])
                logits = np.array(logits)
                att = np.exp(logits - logits.max())
                att = att / att.sum()
                per_head.append(sum(att[j] * values[j] for j in range(params.span)))
            y = params.post @ np.concatenate(per_head)
            out[i, x] = y + z[i, x] if params.residual else y
    return out


def global_self_attention(z: np.ndarray, w_q: np.ndarray, w_k: np.ndarray,
                          w_v: np.ndarray,
                          counter: MultiplyCounter | None = None) -> np.ndarray:
    """Single-head attention across every pixel of the map (no positional
    terms): the quadratic baseline the circular layer replaces."""
    z = np.asarray(z, dtype=np.float64)
    h, w, d_in = z.shape
    tokens = z.reshape(h * w, d_in)
    q = np.einsum("nd,cd->nc", tokens, w_q)
    k = np.einsum("nd,cd->nc", tokens, w_k)
    v = np.einsum("nd,cd->nc", tokens, w_v)
    logits = np.einsum("nc,mc->nm", q, k)
    att = _softmax(logits, axis=1)
    out = np.einsum("nm,mc->nc", att, v)
    if counter is not None:
        n = h * w
        counter.add(n * d_in * (2 * w_q.shape[0] + w_v.shape[0])
                    + n * n * w_q.shape[0] + n * n * w_v.shape[0])
    return out.reshape(h, w, v.shape[1])
