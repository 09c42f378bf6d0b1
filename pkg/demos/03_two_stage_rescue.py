"""
Inside the two-stage detector
=============================

Stage one keeps candidate pixels, stage two re-examines the candidates with a
stricter matrix. Pixels that stage one converts to near-white are kept no
matter what stage two decides, so very bright flame cores are not lost.
"""
import numpy as np

from flamelens import fixtures
from flamelens.pipeline import PipelineConfig, nonlinear_stages

# a flame block plus a dim amber patch; stage one whitens the amber
image, flame, amber = fixtures.rescue_scene()
stages = nonlinear_stages(image)

for name in ("stage1", "rescue", "stage2", "final"):
    m = getattr(stages, name)
    print(f"{name:>6}: flame {m[flame].mean():.2f}  amber {m[amber].mean():.2f}  total {m.sum()}")

# the clamped stage-one channels of the amber patch all clear 0.8
print("amber stage-one channels:", np.clip(stages.stage1_converted[amber][0], 0, 1).round(3))

# raising the white threshold above them switches the rescue off
strict = nonlinear_stages(image, PipelineConfig(white_threshold=0.9))
print("amber kept with threshold 0.9:", bool(strict.final[amber].any()))

# optional closing fills small holes left inside detected regions
holed = image.copy()
holed[10:12, 10:12] = fixtures.DARK_GRAY
plain = nonlinear_stages(holed).final
closed = nonlinear_stages(holed, PipelineConfig(morph_close=2)).final
print("flame coverage without / with closing:", plain[flame].mean(), closed[flame].mean())
