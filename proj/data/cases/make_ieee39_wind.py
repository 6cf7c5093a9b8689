"""Writes ieee39_wind.json: the 39-bus New England topology with a 10-unit
thermal fleet, a 24-hour load curve and one 500 MW wind farm at bus 29."""

import json
from pathlib import Path

# (from, to, reactance p.u., rating MW)
BRANCHES = [
    (1, 2, 0.0411, 600), (1, 39, 0.0250, 1000), (2, 3, 0.0151, 500), (2, 25, 0.0086, 500),
    (2, 30, 0.0181, 900), (3, 4, 0.0213, 500), (3, 18, 0.0133, 500), (4, 5, 0.0128, 600),
    (4, 14, 0.0129, 500), (5, 6, 0.0026, 1200), (5, 8, 0.0112, 900), (6, 7, 0.0092, 900),
    (6, 11, 0.0082, 480), (6, 31, 0.0250, 1800), (7, 8, 0.0046, 900), (8, 9, 0.0363, 900),
    (9, 39, 0.0250, 900), (10, 11, 0.0043, 600), (10, 13, 0.0043, 600), (10, 32, 0.0200, 900),
    (12, 11, 0.0435, 500), (12, 13, 0.0435, 500), (13, 14, 0.0101, 600), (14, 15, 0.0217, 600),
    (15, 16, 0.0094, 600), (16, 17, 0.0089, 600), (16, 19, 0.0195, 600), (16, 21, 0.0135, 600),
    (16, 24, 0.0059, 600), (17, 18, 0.0082, 600), (17, 27, 0.0173, 600), (19, 20, 0.0138, 900),
    (19, 33, 0.0142, 900), (20, 34, 0.0180, 900), (21, 22, 0.0140, 900), (22, 23, 0.0096, 600),
    (22, 35, 0.0143, 900), (23, 24, 0.0350, 600), (23, 36, 0.0272, 900), (25, 26, 0.0323, 600),
    (25, 37, 0.0232, 900), (26, 27, 0.0147, 600), (26, 28, 0.0474, 600), (26, 29, 0.0625, 600),
    (28, 29, 0.0151, 600), (29, 38, 0.0156, 1200),
]

# Base-case bus demand (MW); only the shares are used.
BUS_LOAD = {
    3: 322.0, 4: 500.0, 7: 233.8, 8: 522.0, 12: 7.5, 15: 320.0, 16: 329.0, 18: 158.0,
    20: 628.0, 21: 274.0, 23: 247.5, 24: 308.6, 25: 224.0, 26: 139.0, 27: 281.0,
    28: 206.0, 29: 283.5, 31: 9.2, 39: 1104.0,
}

# bus, p_max, p_min, a, b, no-load, min on/off, start-up, ramp, initial hours (+on / -off)
UNITS = [
    (30, 455, 150, 0.00048, 16.19, 1000, 8, 8, 4500, 180, 8),
    (31, 455, 150, 0.00031, 17.26, 970, 8, 8, 5000, 180, 8),
    (32, 130, 20, 0.00200, 16.60, 700, 5, 5, 550, 60, -5),
    (33, 130, 20, 0.00211, 16.50, 680, 5, 5, 560, 60, -5),
    (34, 162, 25, 0.00398, 19.70, 450, 6, 6, 900, 80, -6),
    (35, 80, 20, 0.00712, 22.26, 370, 3, 3, 170, 40, -3),
    (36, 85, 25, 0.00079, 27.74, 480, 3, 3, 260, 45, -3),
    (37, 55, 10, 0.00413, 25.92, 660, 1, 1, 30, 55, -1),
    (38, 55, 10, 0.00222, 27.27, 665, 1, 1, 30, 55, -1),
    (39, 55, 10, 0.00173, 27.79, 670, 1, 1, 30, 55, -1),
]

SYSTEM_LOAD = [700, 750, 850, 950, 1000, 1100, 1150, 1200, 1300, 1400, 1450, 1500,
               1400, 1300, 1200, 1050, 1000, 1100, 1200, 1400, 1300, 1100, 900, 800]

WIND = [300, 310, 320, 300, 280, 260, 230, 200, 180, 160, 150, 140,
        150, 160, 180, 200, 230, 260, 280, 300, 320, 330, 320, 310]


def main():
    total = sum(BUS_LOAD.values())
    gens = []
    for k, (bus, pmax, pmin, a, b, nl, mon, moff, su, ramp, hours) in enumerate(UNITS, start=1):
        on = hours > 0
        gens.append({
            "id": f"G{k}", "bus": bus, "p_min": pmin, "p_max": pmax,
            "ramp_up": ramp, "ramp_down": ramp, "min_on": mon, "min_off": moff,
            "startup_cost": su, "no_load_cost": nl, "cost_a": a, "cost_b": b,
            "initial": {"on": on, "hours": abs(hours), "p0": 250.0 if on else 0.0},
        })
    loads = [{"id": f"D{bus}", "bus": bus} for bus in sorted(BUS_LOAD)]
    profile = {
        f"D{bus}": [round(d * BUS_LOAD[bus] / total, 6) for d in SYSTEM_LOAD]
        for bus in sorted(BUS_LOAD)
    }
    case = {
        "name": "ieee39_wind",
        "system": {
            "buses": list(range(1, 40)),
            "reference_bus": 31,
            "generators": gens,
            "lines": [
                {"id": f"L{k}", "from": f, "to": t, "reactance": x, "capacity": r}
                for k, (f, t, x, r) in enumerate(BRANCHES, start=1)
            ],
            "wind_farms": [{"id": "W29", "bus": 29, "capacity": 500}],
            "loads": loads,
        },
        "profiles": {
            "horizon": 24,
            "load": profile,
            "wind": {"W29": WIND},
            "price_coefficient": {"W29": 20.0},
        },
        "uncertainty": {
            "gamma_t": 8, "gamma_s": 1, "band_confidence": 0.99,
            "sigma_base": {"W29": 0.15}, "sigma_scaling": "forecast",
        },
        "options": {"mode": "wgc", "epsilon_feas": 1e-4, "max_iter": 50, "segments": 4},
    }
    out = Path(__file__).with_name("ieee39_wind.json")
    out.write_text(json.dumps(case, indent=2) + "\n")


if __name__ == "__main__":
    main()
