#!/usr/bin/env python3
"""Regenerates scorer_fixtures.json by running the two reference listings.

The listings in qwen_ceoh.py and gpt4o_eoh.py are the oracle; the native C++
scorers are checked against the values frozen here. Run from this directory:

    python3 make_scorer_fixtures.py > scorer_fixtures.json
"""
import importlib.util
import json
import random


def load(name):
    spec = importlib.util.spec_from_file_location(name, name + ".py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module.select_next_move


def random_state(rng):
    lanes = rng.randint(1, 6)
    depth = rng.randint(1, 5)
    classes = rng.randint(1, 5)
    state = []
    for _ in range(lanes):
        filled = rng.randint(0, depth)
        lane = [0] * (depth - filled) + [rng.randint(1, classes) for _ in range(filled)]
        state.append(lane)
    return state


def main():
    rng = random.Random(20240611)
    states = [[[0, 1]], [[0, 0]]]
    while len(states) < 20:
        states.append(random_state(rng))
    out = {
        "states": states,
        "qwen-ceoh": load("qwen_ceoh")(states),
        "gpt4o-eoh": load("gpt4o_eoh")(states),
    }
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
