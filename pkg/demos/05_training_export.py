"""End-to-end export: event stream in, training-ready samples out.

Drives the same code the CLI uses: simulate a scene, export augmented LNECS
frames with keypoint labels and a manifest, then replay the manifest through
the evbridge dataset iterator the way a training loop would. Requires the
bridge package (pip install -e bridge/).
"""

import tempfile
from pathlib import Path

from evframes.cli import main as cli_main

SCENE = """
width = 128
height = 96
duration_us = 600000
contrast_threshold = 0.25
noise_rate = 2.0
seed = 12

[[shapes]]
kind = "disc"
size = 5.0
contrast = 0.8
path = { kind = "circular", center = [64.0, 48.0], radius = 28.0, revolutions = 1.0 }
"""

root = Path(tempfile.mkdtemp(prefix="evframes_demo_"))
(root / "scene.toml").write_text(SCENE)

for argv in (
    ["--quiet", "simulate", "--config", str(root / "scene.toml"),
     "--out", str(root / "s.evb"), "--traj", str(root / "t.csv")],
    ["--quiet", "--seed", "3", "augment", "--in", str(root / "s.evb"),
     "--segment", "count:2500", "--rep", "lnecs", "--size", "64x48",
     "--traj", str(root / "t.csv"), "--len-mult", "0.5:2.5",
     "--crop-frac", "0.8:1.0", "--out", str(root / "train")],
):
    assert cli_main(argv) == 0, argv

try:
    from evbridge import iter_dataset
except ImportError:
    print("evbridge not installed; manifest written to", root / "train")
    raise SystemExit(0)

for record in iter_dataset(root / "train" / "manifest.json", shuffle_seed=0):
    rotation = record.meta["augment"]["rotation_deg"]
    c, h, w = record.frame.shape
    print(f"{record.meta['id']}: frame {c}x{h}x{w}, "
          f"rotation {rotation:.0f} deg, "
          f"wrist ({record.keypoints[0][0]:.1f}, {record.keypoints[0][1]:.1f})")

print(f"\nmanifest and tensors under {root / 'train'}")
