"""
Circular attention along the azimuth axis
=========================================

Panoramic rasters wrap vertically: row 0 and the last row are
neighbors. The circular attention layer exploits that by letting each
pixel attend to a fixed-size window of rows above and below, with
relative positional terms, at cost linear in the window span. This
script applies a randomly initialized layer to a rendered view, checks
it against the brute-force definition, compares multiply counts with
global attention, and saves the weights for the ``attn`` CLI command.
"""

from pathlib import Path

import numpy as np

from omnistereo.attention import (AttentionParams, MultiplyCounter,
                                  circular_attention,
                                  circular_attention_reference,
                                  global_self_attention)
from omnistereo.geometry import PanoramaGeometry, Pose, Projection
from omnistereo.scenes import room_with_sphere
from omnistereo.viz import colorize, write_png

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

scene = room_with_sphere()
geom = PanoramaGeometry(Projection.CASSINI, 64, 128)
image, _ = scene.render(Pose(translation=np.zeros(3)), geom)

# One input channel (intensity), two heads, a 9-row window.
params = AttentionParams.randomized(0, d_in=1, heads=2, span=9, d_out=1)
params.save(out_dir / "attention_params.npz")
print(f"saved layer: heads={params.heads} span={params.span} "
      f"d_in={params.d_in} d_out={params.d_out}")
print("the CLI applies the same file: "
      "omnistereo attn view.pfm out.pfm --params attention_params.npz")

features = image.data.astype(np.float64)[..., None]
out = circular_attention(features, params)
write_png(out_dir / "attention_output.png", colorize(out[..., 0]))

# The windowed implementation must agree with the O(h^2) definition.
crop = features[:, :8]
diff = np.abs(circular_attention(crop, params)
              - circular_attention_reference(crop, params)).max()
print(f"max deviation from brute force on a crop: {diff:.2e}")

# Cost scaling: circular attention is linear in the image height while
# the global layer is quadratic, which is what makes tall panoramic
# rasters affordable.
d = 4
w_q = np.random.default_rng(1).normal(size=(3, d))
print(f"{'height':>8s} {'circular':>12s} {'global':>12s}")
for h in (64, 128, 256, 512):
    z = np.random.default_rng(h).normal(size=(h, 2, d))
    layer = AttentionParams.randomized(2, d_in=d, heads=1, span=9)
    circ_counter = MultiplyCounter()
    circular_attention(z, layer, counter=circ_counter)
    glob_counter = MultiplyCounter()
    global_self_attention(z, w_q, w_q, w_q, counter=glob_counter)
    print(f"{h:8d} {circ_counter.total:12d} {glob_counter.total:12d}")
