"""Swapping the upscaler for an external process over the wire protocol.

The feedback loop treats SR as an opaque operator, so any upscaler that
speaks the length-prefixed frame protocol on stdin/stdout can slot in: a
neural model server, or here the reference implementation shipped as the
cmisr-ref-plugin executable (install it with `pip install -e plugin`).

This script exchanges the handshake and a few frames through the client
session, shows the in-band error channel, verifies the plugin's bicubic
agrees with the in-process one to float32 transport precision, and then
runs the whole closed loop with the external upscaler in the SR slot.

Run:  python3 demos/04_plugin_protocol.py
"""

import shutil
import sys

import numpy as np

import cmisr

SCALE = 2


def main():
    if not shutil.which("cmisr-ref-plugin"):
        print("cmisr-ref-plugin is not on PATH; install it first:")
        print("  pip install -e plugin --no-build-isolation")
        sys.exit(1)
    command = f"cmisr-ref-plugin --mode bicubic --scale {SCALE}"
    print(f"plugin command: {command}")

    # ---- one session, a few frames by hand ----
    rng = np.random.default_rng(0)
    x = cmisr.image(rng.random((8, 8, 1)))
    with cmisr.PluginSession(command) as session:
        y = session.apply(x, SCALE)
        print(f"handshake ok; SR_APPLY 8x8 -> SR_RESULT {y.shape[0]}x{y.shape[1]}")

        try:
            session.apply(x, 9)
        except cmisr.PluginError as exc:
            print(f"in-band error channel: {exc}")

        # the session survives the rejected request
        y2 = session.apply(x, SCALE)
        assert np.array_equal(y, y2)
        print("session still serving after the error frame")

    # ---- transport precision: external vs in-process bicubic ----
    op_wire = cmisr.plugin_up(SCALE, command)
    op_here = cmisr.bicubic_up(SCALE)
    try:
        worst = 0.0
        for _ in range(10):
            img = cmisr.image(rng.random((8, 8, 1)))
            diff = np.max(np.abs(cmisr.sr_apply(op_wire, img)
                                 - cmisr.sr_apply(op_here, img)))
            worst = max(worst, float(diff))
        print(f"plugin bicubic vs in-process, 10 random 8x8 images: "
              f"max abs diff {worst:.2e} (float32 transport)")
    finally:
        op_wire.close()

    # ---- the loop does not care where SR runs ----
    name, truth = cmisr.make_image(index=0, h=32, w=32, seed=0)
    for label, sr_op in (("in-process", cmisr.bicubic_up(SCALE)),
                         ("plugin", cmisr.plugin_up(SCALE, command))):
        sys_ = cmisr.NfSystem(ur=lambda v: cmisr.downsample(v, SCALE, "area"),
                              sr=sr_op, scale=SCALE)
        try:
            cfg = cmisr.LoopConfig(lambda_mode="auto", tol=1e-6,
                                   max_iters=200, seed=0)
            res = cmisr.run_circular(sys_, truth, mode="evaluation", cfg=cfg)
            p = cmisr.psnr(cmisr.clamp01(res.x_final), truth)
            print(f"{label:>11} SR on {name}: {res.stop_reason} at k={res.iters}, "
                  f"psnr {p:.3f} db")
        finally:
            sr_op.close()


if __name__ == "__main__":
    main()
