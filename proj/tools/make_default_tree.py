#!/usr/bin/env python3
"""Writes data/default_tree.json, the bundled 11-level totem task."""
import json
import sys

levels = []  # list of (name, [ingredient names])


def add(level, name, ingredients=()):
    levels.append((level, name, list(ingredients)))


for n in ["stone", "branch", "flint", "fiber", "red_berries", "yellow_flowers"]:
    add(0, n)

add(1, "sharp_stone", ["stone", "flint"])
add(1, "rope", ["fiber", "branch"])
add(1, "red_paint", ["red_berries", "stone"])
add(1, "yellow_paint", ["yellow_flowers", "stone"])

add(2, "axe", ["branch", "sharp_stone", "rope"])
add(2, "chisel", ["flint", "sharp_stone", "rope"])

add(3, "logs", ["axe", "branch"])
add(3, "carving_knife", ["chisel", "sharp_stone"])

add(4, "painted_logs", ["red_paint", "logs"])
add(4, "carved_logs", ["logs", "carving_knife"])

add(5, "totem_base", ["painted_logs", "carved_logs"])
add(5, "canoe", ["carved_logs", "axe"])
add(5, "paddle", ["painted_logs", "carving_knife"])

add(6, "small_pole", ["totem_base", "rope"])
add(6, "tall_pole", ["totem_base", "logs"])
add(6, "great_pole", ["totem_base", "logs", "rope"])

animals = ["eagle", "bear", "wolf", "owl", "raven", "whale"]
carving_recipes = [
    ["small_pole", "chisel"],
    ["tall_pole", "chisel"],
    ["great_pole", "chisel"],
    ["small_pole", "carving_knife"],
    ["tall_pole", "carving_knife"],
    ["great_pole", "carving_knife"],
]
for animal, rec in zip(animals, carving_recipes):
    add(7, f"{animal}_carving", rec)
add(7, "frog_carving", ["small_pole", "chisel", "carving_knife"])

patterns = []
for shape, tool in [("stripes", None), ("dots", "sharp_stone"),
                    ("zigzag", "chisel"), ("spirals", "carving_knife")]:
    for color in ["red", "yellow"]:
        name = f"{color}_{shape}"
        rec = ["frog_carving", f"{color}_paint"] + ([tool] if tool else [])
        add(8, name, rec)
        patterns.append(name)
add(8, "feather_crown", ["raven_carving", "rope"])
add(8, "shell_necklace", ["whale_carving", "rope"])
add(8, "ceremonial_drum", ["owl_carving", "logs"])

totems = []
for animal in animals:
    for pattern in patterns:
        name = f"{pattern}_{animal}_totem"
        add(9, name, [f"{animal}_carving", pattern])
        totems.append(name)

for ornament, prefix in [("feather_crown", "crowned"), ("shell_necklace", "adorned")]:
    for totem in totems:
        add(10, f"{prefix}_{totem}", [totem, ornament])

ids = {name: i for i, (_, name, _) in enumerate(levels)}
sizes = [0] * 11
for level, _, _ in levels:
    sizes[level] += 1
assert sizes == [6, 4, 2, 2, 2, 3, 3, 7, 11, 48, 96], sizes

doc = {
    "levels": sizes,
    "items": [{"id": ids[n], "name": n, "level": lv} for lv, n, _ in levels],
    "recipes": [
        {"ingredients": sorted(ids[x] for x in rec), "product": ids[n]}
        for lv, n, rec in levels if rec
    ],
}
out = sys.argv[1] if len(sys.argv) > 1 else "data/default_tree.json"
with open(out, "w") as f:
    json.dump(doc, f, indent=1)
    f.write("\n")
