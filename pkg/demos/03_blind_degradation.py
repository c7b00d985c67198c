"""Deployment on a blurred, noisy observation the loop never saw made.

In evaluation mode the loop manufactures its own observation, so its
internal model of the degradation is exact by construction. Deployment is
the honest setting: the observation arrives from outside, produced by a
blur + downsample + noise pipeline, and the loop runs with whatever
observation model it assumes. This script degrades a ground-truth image
externally, hands only the low-quality result to the loop, and compares

  open loop          one bicubic upsample of the observation
  closed, assumed    feedback assuming a plain area downsample
  closed, matched    feedback whose model knows the true blur kernel

Quality is scored against the withheld truth. The matched model should
recover more, and the mismatched one should still not fall apart.

Run:  python3 demos/03_blind_degradation.py
"""

import numpy as np

import cmisr

SCALE = 2
SIDE = 5
SIGMA = 1.0
NOISE = 0.01


def closed_loop_deploy(ur, observed):
    sys = cmisr.NfSystem(ur=ur, sr=cmisr.bicubic_up(SCALE), scale=SCALE)
    cfg = cmisr.LoopConfig(lambda_mode="auto", tol=1e-8, max_iters=200, seed=0)
    return cmisr.run_circular(sys, observed, mode="deployment", cfg=cfg)


def main():
    name, truth = cmisr.make_image(index=3, h=48, w=48, seed=1)  # a glyph

    # ---- the world degrades the image; the loop is not told how ----
    kernel = cmisr.gaussian_kernel(SIDE, SIGMA)
    world = cmisr.DegradationSpec(kernel=kernel, noise_kind="gaussian",
                                  noise_sigma=NOISE, seed=7)
    observed = cmisr.degrade(truth, world, s=SCALE)
    print(f"image {name}: truth {truth.shape[0]}x{truth.shape[1]}, observed "
          f"{observed.shape[0]}x{observed.shape[1]} "
          f"({SIDE}x{SIDE} gaussian sigma={SIGMA}, noise sigma={NOISE})")

    # ---- three reconstructions from the same observation ----
    blur_only = cmisr.DegradationSpec(kernel=kernel)  # kernel known, noise not
    runs = {
        "closed, assumed area": closed_loop_deploy(
            lambda x: cmisr.downsample(x, SCALE, "area"), observed),
        "closed, matched blur": closed_loop_deploy(
            lambda x: cmisr.degrade(x, blur_only, s=SCALE), observed),
    }

    print(f"\n{'reconstruction':>22} {'psnr db':>9} {'ssim':>8} {'stop':>13} {'iters':>6}")
    x_open = cmisr.clamp01(runs["closed, assumed area"].x_open)
    p, s = cmisr.psnr(x_open, truth), cmisr.ssim(x_open, truth)
    print(f"{'open loop':>22} {p:>9.3f} {s:>8.4f} {'':>13} {'':>6}")
    for label, res in runs.items():
        x = cmisr.clamp01(res.x_final)
        p, s = cmisr.psnr(x, truth), cmisr.ssim(x, truth)
        print(f"{label:>22} {p:>9.3f} {s:>8.4f} {res.stop_reason:>13} {res.iters:>6}")

    print("\nthe residual the loop drives to zero is measured against its own "
          "model, so a\nwrong model converges to the wrong fixed point, "
          "gracefully rather than\nexplosively. knowing the kernel recovers "
          "more signal (psnr), but inverting a\nblur also amplifies the noise "
          "it cannot model, which is why its structural\nscore can dip and "
          "its slow eigendirections exhaust the iteration budget")


if __name__ == "__main__":
    main()
