"""Generate a synthetic working set for the CLI: a degraded input video,
a mixture spec over sharp fields, and a ready-to-run enhance config.

The dataset fields are band-limited random textures; the input video is a
blurred draw from the same family, so enhancement has real headroom.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from noisecal import (
    RngSeed,
    as_video,
    band_limited_field,
    blurred,
    write_tensor,
    write_video,
)


def quantize(x):
    return as_video(np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5) / 255.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path, help="workspace directory to create")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-fields", type=int, default=16, help="mixture size")
    ap.add_argument("--frames", type=int, default=4)
    ap.add_argument("--size", type=int, default=16, help="square frame edge")
    ap.add_argument("--variance", type=float, default=0.03, help="component variance")
    args = ap.parse_args()

    root = RngSeed(args.seed)
    shape = (args.frames, 1, args.size, args.size)
    args.out.mkdir(parents=True, exist_ok=True)

    spec = []
    for i in range(args.n_fields):
        field = band_limited_field(shape, root.substream(1, i))
        name = f"field_{i:03d}.vnt"
        write_tensor(field, args.out / name)
        spec.append({"weight": 1.0, "mean": name, "variance": args.variance})
    (args.out / "gmm.json").write_text(json.dumps(spec, indent=2) + "\n")

    sharp = band_limited_field(shape, root.substream(2))
    write_video(quantize(blurred(sharp)), args.out / "input")
    write_video(quantize(sharp), args.out / "reference")

    cfg = {
        "sampler": {"num_steps": 30, "seed": args.seed},
        "calibration": {"t0": 0.6, "N": 3, "nu": 1.0},
        "denoiser": {"kind": "gmm", "spec": "gmm.json"},
        "io": {"input": "input"},
    }
    (args.out / "enhance.json").write_text(json.dumps(cfg, indent=2) + "\n")

    print(f"wrote {args.n_fields} mixture fields, input/, reference/, enhance.json")
    print(f"try: noisecal enhance --config {args.out / 'enhance.json'} --output {args.out / 'out'}")


if __name__ == "__main__":
    main()
