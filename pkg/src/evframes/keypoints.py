"""21-joint hand keypoint sets, 2D (pixels) or 3D (meters).

Joint order follows the de facto hand-landmark layout: wrist at index 0,
then four joints per finger from thumb to pinky; the middle-finger MCP sits
at index 9. Palm length (wrist to middle MCP) is the normalization unit for
keypoint metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_JOINTS = 21
WRIST = 0
MIDDLE_MCP = 9

JOINT_NAMES = (
    "wrist",
    "thumb_cmc", "thumb_mcp", "thumb_ip", "thumb_tip",
    "index_mcp", "index_pip", "index_dip", "index_tip",
    "middle_mcp", "middle_pip", "middle_dip", "middle_tip",
    "ring_mcp", "ring_pip", "ring_dip", "ring_tip",
    "pinky_mcp", "pinky_pip", "pinky_dip", "pinky_tip",
)


@dataclass(frozen=True)
class KeypointSet:
    """Exactly 21 joints, each (u, v) in pixels or (X, Y, Z) in meters."""

    joints: np.ndarray

    def __post_init__(self):
        joints = np.array(self.joints, dtype=np.float64, copy=True)
        if joints.shape not in ((NUM_JOINTS, 2), (NUM_JOINTS, 3)):
            raise ValueError(
                f"expected ({NUM_JOINTS}, 2) or ({NUM_JOINTS}, 3) joints, got {joints.shape}"
            )
        joints.flags.writeable = False
        object.__setattr__(self, "joints", joints)

    @property
    def is_2d(self) -> bool:
        return self.joints.shape[1] == 2

    @property
    def wrist(self) -> np.ndarray:
        return self.joints[WRIST]

    @property
    def middle_mcp(self) -> np.ndarray:
        return self.joints[MIDDLE_MCP]
