"""Data model walkthrough: loading, windowing, normalization, downsampling."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mtsearch.data import downsample_track, extract_windows, normalize_window, series_to_csv, load_csv
from mtsearch.synthetic import make_corpus

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# A synthetic 3-track series with recurring motifs, sized for 2000 windows.
series = make_corpus(n_windows=2000, t=120, d=3, seed=7)
print(f"series: n={series.n} steps, d={series.d} tracks {series.track_names}")

# Round-trip through CSV, the single ingestion format.
csv_path = os.path.join(OUT, "demo_series.csv")
series_to_csv(series, csv_path)
reloaded = load_csv(csv_path, has_header=True)
print(f"CSV round-trip: max abs diff = {np.abs(reloaded.values - series.values).max():.2e}")

# Sliding windows are z-normalized per track, so shape is all that matters.
windows = extract_windows(series, t=120, stride=1)
w = windows.windows[500]
print(f"{len(windows)} windows of t={windows.t}; window 500 starts at {w.start}")
print(f"  per-track mean ~ {w.values.mean(axis=0).round(9)}")
print(f"  per-track std  ~ {w.values.std(axis=0).round(6)}")

# Amplitude and offset do not change the normalized shape.
scaled = normalize_window(3.5 * series.values[500:620] + 42.0)
print(f"amplitude invariance: max diff = {np.abs(scaled - w.values).max():.2e}")

# min/max/mean downsampling drives the dataset overview rendering.
bands = downsample_track(series, track=0, target_points=300)
times = [b[0] for b in bands]
fig, ax = plt.subplots(figsize=(10, 3))
ax.fill_between(times, [b[1] for b in bands], [b[2] for b in bands], alpha=0.4, label="min/max")
ax.plot(times, [b[3] for b in bands], lw=1, label="mean")
ax.set_title("track 0, downsampled to 300 points")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "overview_band.png"), dpi=110)
print("wrote output/overview_band.png")
