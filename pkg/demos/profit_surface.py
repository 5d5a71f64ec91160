"""Tour of the operator's per-segment profit pieces on the default grid:
where income flows, where the buffering penalty bites, and which rate
changes the smoothness term charges for."""

from mdpstream.economics import (
    buffering_cost,
    derive_constants,
    playback_income,
    smoothness_cost,
)
from mdpstream.presets import default_channel, default_ladder, fair_scenario


def main():
    config = fair_scenario()
    ladder = default_ladder()
    channel = default_channel()
    params = config.profit
    consts = derive_constants(ladder, channel, params)

    print("weights: playback 0.3, buffering 0.5, smoothness 0.2")
    print(f"income normalization: {consts.income_norm:.6f}")
    print(f"buffering normalization: {consts.buffering_norm:.6f} "
          f"(smallest shortfall {consts.min_shortfall_kbps:.6f} Kbps)")
    print(f"variation normalization: {consts.variation_norm:.6f}")

    print("\nplayback income by (rate, bandwidth); zero means the rate "
          "outruns the link:")
    header = "rate \\ bw " + "".join(f"{bw:>9.0f}" for bw in channel.state_bandwidth)
    print("   " + header)
    for rate in ladder.rates:
        cells = []
        for bw in channel.state_bandwidth:
            cells.append(f"{playback_income(rate, bw, params, consts):>9.4f}")
        print(f"   {rate:>9.2f}" + "".join(cells))

    print("\nbuffering cost on the same grid; zero means normal playback:")
    print("   " + header)
    for rate in ladder.rates:
        cells = []
        for bw in channel.state_bandwidth:
            cells.append(f"{buffering_cost(rate, bw, params, consts):>9.4f}")
        print(f"   {rate:>9.2f}" + "".join(cells))

    print("\nsmoothness cost for each rate change (threshold 350 Kbps):")
    for prev in ladder.rates:
        for new in ladder.rates:
            cost = smoothness_cost(prev, new, params, consts)
            if cost > 0:
                print(f"   {prev:>7.2f} -> {new:>7.2f}  "
                      f"|delta| {abs(new - prev):>7.2f}  cost {cost:.4f}")
    print("   every other pair stays under the threshold and is free")

    print("\nat the corners the pieces hit their weights exactly:")
    top, bottom = ladder.r_max, ladder.r_min
    print(f"   income at the top rung under ample bandwidth: "
          f"{playback_income(top, 896.0, params, consts):.12f}")
    print(f"   buffering at the top rung on the worst link:  "
          f"{buffering_cost(top, 95.0, params, consts):.12f}")
    print(f"   smoothness across the whole ladder span:      "
          f"{smoothness_cost(bottom, top, params, consts):.12f}")


if __name__ == "__main__":
    main()
