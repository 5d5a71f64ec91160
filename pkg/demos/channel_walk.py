"""Walk through the last-hop link model: the four-state chain, its
long-run split, and what one seeded minute of bandwidth looks like."""

import numpy as np

from mdpstream.presets import default_channel
from mdpstream.sim import sample_channel_path

GLYPHS = ".:|#"  # one glyph per channel state, worst to best


def main():
    channel = default_channel()

    print("per-second transition matrix:")
    for row in channel.transition:
        print("   " + "  ".join(f"{p:.1f}" for p in row))
    print("state bandwidths (Kbps):", channel.state_bandwidth)

    stationary = channel.stationary_distribution()
    print("\nlong-run occupancy:")
    for k, p in enumerate(stationary):
        print(f"   state {k} ({channel.state_bandwidth[k]:>5.0f} Kbps): "
              f"{p:.4f}  {'=' * round(p * 40)}")

    rng = np.random.default_rng(2)
    path = sample_channel_path(channel, 0, 60, rng)
    print("\none seeded minute, starting from the worst state:")
    print("   " + "".join(GLYPHS[s] for s in path))
    print("   (" + ", ".join(f"{g} = state {k}" for k, g in enumerate(GLYPHS)) + ")")

    long_path = sample_channel_path(channel, 0, 200_000, rng)
    occupancy = np.bincount(long_path, minlength=4) / len(long_path)
    print("\noccupancy over 200k sampled seconds vs the stationary split:")
    for k in range(4):
        print(f"   state {k}: sampled {occupancy[k]:.4f}   "
              f"stationary {stationary[k]:.4f}")


if __name__ == "__main__":
    main()
