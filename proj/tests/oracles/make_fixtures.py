# Copyright 2026 The AugCondD Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reference values computed with numpy/scipy, written as JSON for the tests."""

import argparse
import json

import numpy as np
import scipy.linalg

DESK = dict(sr=22050, n_fft=256, hop=64, win=256, n_mels=40, fmin=0.0, fmax=11025.0, floor=1e-5)


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    f_sp = 200.0 / 3
    mel = f / f_sp
    logstep = np.log(6.4) / 27.0
    return np.where(f >= 1000.0, 15.0 + np.log(np.maximum(f, 1e-300) / 1000.0) / logstep, mel)


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    f_sp = 200.0 / 3
    logstep = np.log(6.4) / 27.0
    return np.where(m >= 15.0, 1000.0 * np.exp(logstep * (m - 15.0)), f_sp * m)


def filterbank(c):
    n_bins = c["n_fft"] // 2 + 1
    fft_f = np.linspace(0, c["sr"] / 2, n_bins)
    mel_f = mel_to_hz(np.linspace(hz_to_mel(c["fmin"]), hz_to_mel(c["fmax"]), c["n_mels"] + 2))
    fdiff = np.diff(mel_f)
    ramps = mel_f[:, None] - fft_f[None, :]
    w = np.zeros((c["n_mels"], n_bins))
    for i in range(c["n_mels"]):
        lower = -ramps[i] / fdiff[i]
        upper = ramps[i + 2] / fdiff[i + 1]
        w[i] = np.maximum(0, np.minimum(lower, upper))
    enorm = 2.0 / (mel_f[2:c["n_mels"] + 2] - mel_f[:c["n_mels"]])
    return w * enorm[:, None], mel_f[1:-1]


def log_mel(x, c):
    pad = c["n_fft"] // 2
    xp = np.pad(x, pad, mode="reflect")
    n = np.arange(c["win"])
    hann = 0.5 - 0.5 * np.cos(2 * np.pi * n / c["win"])
    window = np.zeros(c["n_fft"])
    off = (c["n_fft"] - c["win"]) // 2
    window[off:off + c["win"]] = hann
    frames = -(-len(x) // c["hop"])
    spec = np.stack([np.fft.rfft(xp[t * c["hop"]:t * c["hop"] + c["n_fft"]] * window)
                     for t in range(frames)])
    fb, _ = filterbank(c)
    return np.log(np.maximum(np.abs(spec) @ fb.T, c["floor"]))


def sine(freq, n, sr, amp=0.5, phase=0.0):
    t = np.arange(n) / sr
    return amp * np.sin(2 * np.pi * freq * t + phase)


def frechet(a, b):
    ma, mb = a.mean(0), b.mean(0)
    ca, cb = np.cov(a, rowvar=False), np.cov(b, rowvar=False)
    s = scipy.linalg.sqrtm(ca @ cb).real
    return float(np.sum((ma - mb) ** 2) + np.trace(ca + cb - 2 * s))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    c = DESK
    fb, centers = filterbank(c)
    out = {"config": c, "filterbank": fb.tolist(), "centers": centers.tolist()}

    argmax = {}
    for k in (10, 20, 30, 38):
        lm = log_mel(sine(centers[k], 4096, c["sr"]), c)
        steady = lm[4:-4]
        argmax[str(k)] = np.bincount(np.argmax(steady, axis=1)).argmax().item()
    out["sine_argmax"] = argmax
    out["sine_log_mel_k20"] = log_mel(sine(centers[20], 1000, c["sr"]), c).tolist()

    x = sine(440.0, 4096, c["sr"], 0.5)
    y = sine(660.0, 4096, c["sr"], 0.3) + sine(1320.0, 4096, c["sr"], 0.1)
    out["tone_pair_mel_l1"] = float(np.mean(np.abs(log_mel(x, c) - log_mel(y, c))))

    rng = np.random.default_rng(1234)
    a = rng.normal(size=(200, 5)) @ rng.normal(size=(5, 5))
    b = rng.normal(size=(150, 5)) @ rng.normal(size=(5, 5)) + 0.7
    out["frechet"] = {"a": a.tolist(), "b": b.tolist(), "distance": frechet(a, b)}

    with open(args.out, "w") as f:
        json.dump(out, f)


if __name__ == "__main__":
    main()
