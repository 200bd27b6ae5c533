"""Named preset models: recipes, the shipped JSON files and their registry."""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

from .model import ModelError, TrussModel, from_dict, save_model
from .structures import apply_preset, generate, perturb_apex

ENV_VAR = "SYMSPEC_PRESET_DIR"


def _recipes() -> dict[str, dict]:
    out = {}
    for n in range(3, 9):
        out[f"dome{n}-nosym"] = {"family": "dome", "params": {"n": n}, "preset": "nosym"}
        out[f"dome{n}-c{n}v"] = {"family": "dome", "params": {"n": n}, "preset": f"c{n}v"}
    for n in (6, 8):
        out[f"dome{n}-nosym-perturbed"] = {"family": "dome", "params": {"n": n},
                                           "preset": "nosym", "perturb": True}
        out[f"dome{n}-c{n}v-perturbed"] = {"family": "dome", "params": {"n": n},
                                           "preset": f"c{n}v", "perturb": True}
    for fam, names in [("tetrahedral", ("td", "c3v", "nosym")),
                       ("octahedral", ("oh", "c4v", "c2v", "nosym")),
                       ("dodecahedral", ("ih", "c5v", "accidental")),
                       ("icosahedral", ("ih", "accidental"))]:
        for p in names:
            out[f"{fam}-{p}"] = {"family": fam, "params": {}, "preset": p}
    return out


RECIPES = _recipes()


def build_preset(name: str) -> TrussModel:
    """Construct a preset from its generator recipe."""
    try:
        r = RECIPES[name]
    except KeyError:
        raise ModelError(f"unknown preset {name!r}") from None
    model = apply_preset(generate(r["family"], **r["params"]), r["preset"])
    if r.get("perturb"):
        model = perturb_apex(model)
    meta = dict(model.meta)
    meta["name"] = name
    return TrussModel(model.nodes, model.elements, model.material, model.partition, meta)


def preset_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("symspec").joinpath("data/presets")))


def registry(directory: Path | None = None) -> dict[str, dict]:
    """``name -> {"file", "family", "enforced"}`` from the preset directory's index."""
    d = preset_dir() if directory is None else Path(directory)
    index = d / "index.json"
    if not index.exists():
        raise ModelError(f"no preset index at {index}")
    with open(index) as fh:
        return json.load(fh)


def load_preset(name: str, directory: Path | None = None) -> TrussModel:
    d = preset_dir() if directory is None else Path(directory)
    reg = registry(d)
    if name not in reg:
        raise ModelError(f"unknown preset {name!r}; known: {', '.join(sorted(reg))}")
    with open(d / reg[name]["file"]) as fh:
        return from_dict(json.load(fh))


def write_presets(directory: Path) -> dict[str, dict]:
    """Regenerate every preset file plus ``index.json`` in ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    reg = {}
    for name in RECIPES:
        model = build_preset(name)
        save_model(model, directory / f"{name}.json")
        reg[name] = {"file": f"{name}.json", "family": model.meta["family"],
                     "enforced": model.meta["symmetry"]["enforced"]["name"]}
    with open(directory / "index.json", "w") as fh:
        json.dump(reg, fh, indent=1)
        fh.write("\n")
    return reg


def resolve_model(ref: str) -> TrussModel:
    """A model file path, ``preset:NAME``, or a bare preset name."""
    from .model import load_model

    if ref.startswith("preset:"):
        return load_preset(ref.split(":", 1)[1])
    p = Path(ref)
    if p.exists():
        return load_model(p)
    if ref in RECIPES or ref in registry():
        return load_preset(ref)
    raise ModelError(f"{ref!r} is neither a model file nor a preset name")
