"""From raw microphone samples to a blow-intensity series.

Builds a fake 5-second blow recording (48 kHz noise shaped by a breathy
envelope), then walks it through the two preprocessing stages: RMS over
non-overlapping 960-sample windows, and a trailing 8-point moving average.
Run from the repository root:

    python3 demos/01_preprocess.py
"""

import numpy as np

from blowauth import PreprocessConfig, RawAudio, preprocess_session, rms_windows, sma

BARS = "▁▂▃▄▅▆▇█"


def spark(values, width=72):
    """Render a series as a one-line unicode bar chart."""
    v = np.asarray(values, dtype=float)
    if len(v) > width:
        edges = np.linspace(0, len(v), width + 1).astype(int)
        v = np.array([v[a:b].mean() for a, b in zip(edges, edges[1:])])
    lo, hi = v.min(), v.max()
    unit = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    return "".join(BARS[int(round(u * (len(BARS) - 1)))] for u in unit)


def fake_blow_recording(seconds=5.0, rate=48_000.0, seed=7):
    """White noise under a two-puff breath envelope, like a mic capture."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * rate)) / rate
    envelope = 0.8 * np.exp(-0.5 * ((t - 1.6) / 0.45) ** 2)
    envelope += 0.55 * np.exp(-0.5 * ((t - 3.4) / 0.6) ** 2)
    envelope += 0.02  # room noise floor
    return RawAudio(rng.normal(0.0, 1.0, t.size) * envelope, rate)


def main():
    cfg = PreprocessConfig()  # 48 kHz, 960-sample RMS windows, SMA of 8
    audio = fake_blow_recording()
    print(f"recording: {len(audio.samples)} samples at {audio.sample_rate:.0f} Hz "
          f"({audio.duration:.2f} s)")
    print(f"|samples|: {spark(np.abs(audio.samples))}")
    print()

    rms = rms_windows(audio, cfg.window_size)
    print(f"RMS windows ({cfg.window_size} samples -> one point every "
          f"{cfg.dt * 1000:.0f} ms): {len(rms)} points")
    print(f"rms:       {spark(rms.values)}")
    print()

    smooth = sma(rms, cfg.sma_window)
    print(f"after {cfg.sma_window}-point trailing moving average "
          f"(earlier points use the shorter history that exists):")
    print(f"smoothed:  {spark(smooth.values)}")
    print()

    series = preprocess_session(audio, cfg)
    assert np.array_equal(series.values, smooth.values)
    peak = series.values.argmax()
    print(f"preprocess_session combines both steps: {len(series)} points, "
          f"dt {series.dt} s")
    print(f"strongest intensity {series.values[peak]:.3f} at "
          f"t = {peak * series.dt:.2f} s; the two puffs stay clearly visible "
          f"while the sample-level jitter is gone.")


if __name__ == "__main__":
    main()
