"""Mesh and Scene containers plus the canonical Scene JSON format.

Scene JSON (keys in this order, floats written with at most 9 significant
digits)::

    {"units": "cm",
     "image": {"width": int, "height": int},
     "camera": {"f": num, "pitch": num, "height": num} | null,
     "meshes": [{"person_id": str,
                 "vertices": [[x, y, z], ...],
                 "segments": [[i, j], ...],
                 "joints": {"head": int, "foot_left": int, "foot_right": int, "root": int, ...}}]}

Extra joint names are allowed after the four required ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import jsonschema
import numpy as np

from .errors import MissingJoint, SchemaError, UnitError
from .geometry import CameraParams

REQUIRED_JOINTS = ("head", "foot_left", "foot_right", "root")
SIGNIFICANT_DIGITS = 9


def quantize(x: float) -> float:
    """Round to the precision used on disk."""
    v = float(f"{x:.{SIGNIFICANT_DIGITS}g}")
    return 0.0 if v == 0 else v


def quantize_camera(cam: CameraParams) -> CameraParams:
    return CameraParams(quantize(cam.f), quantize(cam.pitch), quantize(cam.height))


@dataclass(eq=False)
class Mesh:
    person_id: str
    vertices: np.ndarray
    joints: dict[str, int]
    segments: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        if len(self.vertices) == 0:
            raise ValueError(f"mesh {self.person_id!r} has no vertices")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError(f"mesh {self.person_id!r} has non-finite vertices")
        n = len(self.vertices)
        self.joints = {str(k): int(v) for k, v in self.joints.items()}
        for name, idx in self.joints.items():
            if not 0 <= idx < n:
                raise ValueError(f"joint {name!r} index {idx} out of range for {n} vertices")
        self.segments = [(int(i), int(j)) for i, j in self.segments]
        for i, j in self.segments:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"segment ({i}, {j}) out of range for {n} vertices")

    def joint(self, name: str) -> np.ndarray:
        try:
            return self.vertices[self.joints[name]]
        except KeyError:
            raise MissingJoint(f"mesh {self.person_id!r} has no joint {name!r}") from None

    @property
    def head(self) -> np.ndarray:
        return self.joint("head")

    @property
    def foot_mid(self) -> np.ndarray:
        return 0.5 * (self.joint("foot_left") + self.joint("foot_right"))

    @property
    def root(self) -> np.ndarray:
        return self.joint("root")

    def check_joints(self):
        for name in REQUIRED_JOINTS:
            self.joint(name)

    def joint_array(self) -> tuple[np.ndarray, int]:
        """Named joints as an ``(J, 3)`` array, in dict order, plus the root's row."""
        names = list(self.joints)
        if "root" not in self.joints:
            raise MissingJoint(f"mesh {self.person_id!r} has no joint 'root'")
        return self.vertices[[self.joints[n] for n in names]], names.index("root")

    def with_vertices(self, vertices) -> "Mesh":
        return replace(self, vertices=np.array(vertices, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.person_id == other.person_id
            and self.vertices.shape == other.vertices.shape
            and np.array_equal(self.vertices, other.vertices)
            and self.joints == other.joints
            and list(self.joints) == list(other.joints)
            and self.segments == other.segments
        )


@dataclass(eq=False)
class Scene:
    width: int
    height: int
    camera: CameraParams | None = None
    meshes: list[Mesh] = field(default_factory=list)
    units: str = "cm"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.units != "cm":
            raise UnitError(f"units must be 'cm', got {self.units!r}", "/units")
        ids = [m.person_id for m in self.meshes]
        if len(set(ids)) != len(ids):
            raise ValueError("person_id values must be unique")

    def mesh(self, person_id: str) -> Mesh:
        for m in self.meshes:
            if m.person_id == person_id:
                return m
        raise KeyError(person_id)

    def __eq__(self, other):
        if not isinstance(other, Scene):
            return NotImplemented
        return (
            (self.width, self.height, self.units) == (other.width, other.height, other.units)
            and self.camera == other.camera
            and self.meshes == other.meshes
        )


_SCHEMA = {
    "type": "object",
    "required": ["units", "image", "meshes"],
    "properties": {
        "units": {"type": "string"},
        "image": {
            "type": "object",
            "required": ["width", "height"],
            "properties": {
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
            },
        },
        "camera": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["f", "pitch", "height"],
                    "properties": {k: {"type": "number"} for k in ("f", "pitch", "height")},
                },
            ]
        },
        "meshes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["person_id", "vertices", "joints"],
                "properties": {
                    "person_id": {"type": "string"},
                    "vertices": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "minItems": 3,
                            "maxItems": 3,
                            "items": {"type": "number"},
                        },
                    },
                    "segments": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": {"type": "integer", "minimum": 0},
                        },
                    },
                    "joints": {
                        "type": "object",
                        "required": list(REQUIRED_JOINTS),
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
    },
}


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def scene_from_dict(doc) -> Scene:
    try:
        jsonschema.validate(doc, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message, _pointer(exc.absolute_path)) from None
    if doc["units"] != "cm":
        raise UnitError(f"units must be 'cm', got {doc['units']!r}", "/units")
    camera = doc.get("camera")
    try:
        camera = CameraParams.from_dict(camera) if camera is not None else None
    except ValueError as exc:
        raise SchemaError(str(exc), "/camera") from None
    meshes = []
    seen = set()
    for k, m in enumerate(doc["meshes"]):
        pid = m["person_id"]
        if pid in seen:
            raise SchemaError(f"duplicate person_id {pid!r}", f"/meshes/{k}/person_id")
        seen.add(pid)
        joints = {name: m["joints"][name] for name in REQUIRED_JOINTS}
        joints.update({n: i for n, i in m["joints"].items() if n not in joints})
        try:
            meshes.append(Mesh(pid, m["vertices"], joints, m.get("segments", [])))
        except ValueError as exc:
            raise SchemaError(str(exc), f"/meshes/{k}") from None
    return Scene(doc["image"]["width"], doc["image"]["height"], camera, meshes)


def load_scene(data: bytes | str) -> Scene:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return scene_from_dict(doc)


def fmt_num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    s = f"{x:.{SIGNIFICANT_DIGITS}g}"
    return "0" if s in ("0", "-0") else s


def _vec(values) -> str:
    return "[" + ", ".join(fmt_num(v) for v in values) + "]"


def save_scene(scene: Scene) -> bytes:
    lines = ["{", '  "units": "cm",']
    lines.append(f'  "image": {{"width": {int(scene.width)}, "height": {int(scene.height)}}},')
    if scene.camera is None:
        lines.append('  "camera": null,')
    else:
        c = scene.camera
        lines.append(
            f'  "camera": {{"f": {fmt_num(c.f)}, "pitch": {fmt_num(c.pitch)}, '
            f'"height": {fmt_num(c.height)}}},'
        )
    if not scene.meshes:
        lines.append('  "meshes": []')
    else:
        lines.append('  "meshes": [')
        for k, m in enumerate(scene.meshes):
            verts = ",\n".join(f"        {_vec(v)}" for v in m.vertices)
            segs = ", ".join(f"[{i}, {j}]" for i, j in m.segments)
            order = [n for n in REQUIRED_JOINTS if n in m.joints]
            order += [n for n in m.joints if n not in REQUIRED_JOINTS]
            joints = ", ".join(f"{json.dumps(n)}: {m.joints[n]}" for n in order)
            lines.append("    {")
            lines.append(f'      "person_id": {json.dumps(m.person_id, ensure_ascii=False)},')
            lines.append('      "vertices": [')
            lines.append(verts)
            lines.append("      ],")
            lines.append(f'      "segments": [{segs}],')
            lines.append(f'      "joints": {{{joints}}}')
            lines.append("    }" + ("," if k < len(scene.meshes) - 1 else ""))
        lines.append("  ]")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_scene(path) -> Scene:
    with open(path, "rb") as fh:
        return load_scene(fh.read())
