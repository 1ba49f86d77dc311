# Copyright (C) 2026 The mpgui Authors
# SPDX-License-Identifier: Apache-2.0

"""Toy multi-perceiver GUI grounding model.

Thin wrappers over the compiled ``_mpgui`` extension. Functions that return
structured data decode the extension's JSON into plain Python objects.
"""

import json

from mpgui._mpgui import (
    ConfigError,
    ContractError,
    EmptyPromptError,
    Error,
    InputError,
    NumericError,
    ParseError,
    ShapeError,
    VersionError,
    __version__,
    fusion_gate,
    iou,
    rouge_l,
    scale_box,
    separation_score,
    small_object_ratio,
    token_f1,
)
from mpgui import _mpgui

__all__ = [
    "ConfigError",
    "ContractError",
    "EmptyPromptError",
    "Error",
    "InputError",
    "NumericError",
    "ParseError",
    "ShapeError",
    "VersionError",
    "__version__",
    "audit_srp",
    "build_dataset",
    "evaluate",
    "forge",
    "fusion_gate",
    "gen_scene",
    "iou",
    "rouge_l",
    "scale_box",
    "separation_score",
    "small_object_ratio",
    "token_f1",
    "train",
]


def gen_scene(seed):
    """Scene tree of one generated screen (without the raster)."""
    return json.loads(_mpgui.gen_scene_json(seed))


def build_dataset(seed, kind):
    """Samples of one screen. kind is tad, gad, srp, spe or mpe."""
    return json.loads(_mpgui.build_dataset_json(seed, kind))


def forge(out, config=None, force=False):
    return json.loads(_mpgui.forge(json.dumps(config or {}), str(out), force))


def audit_srp(data_dir):
    return json.loads(_mpgui.audit_srp(str(data_dir)))


def train(config, data_dir, out, force=False):
    return json.loads(_mpgui.train(json.dumps(config), str(data_dir), str(out), force))


def evaluate(checkpoint, data_dir, out, tasks=(), max_per_task=0, force=False):
    return json.loads(
        _mpgui.evaluate(str(checkpoint), str(data_dir), str(out), list(tasks), max_per_task, force)
    )
