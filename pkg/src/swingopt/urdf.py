"""Robot description parsing and serialization (URDF subset).

Supported elements: robot / link / inertial (origin, mass, inertia) /
joint (revolute, continuous, fixed) with origin, axis, parent, child.
Visual, collision and mesh elements are ignored; they carry no dynamics.

Joint significance classes and foot-frame roles are not expressible in
URDF, so they live in a sibling annotation file `<model>.meta.json` with
fields {frozen_joints, significant_joints, left_foot, right_foot} plus an
optional {limbs} mapping for momentum attribution.  When no annotations
are given, joints whose names contain "ankle", "wrist" or "yaw" are frozen
and the rest are significant.
"""

import json
import math
import os
import xml.etree.ElementTree as ET

import numpy as np

from .geometry import rpy_matrix
from .models import BUILTIN_NAMES, builtin
from .robot import FIXED, FROZEN, REVOLUTE, SIGNIFICANT, JointSpec, ModelError, RobotModel, SpatialInertia


class ParseError(ValueError):
    """Malformed or unsupported robot description; message names the element."""


def _context(el, name=None):
    label = el.tag
    name = name or el.get("name")
    if name:
        label += f" {name!r}"
    return label


def _parse_vec3(text, where):
    if text is None:
        return np.zeros(3)
    try:
        parts = [float(p) for p in text.split()]
    except ValueError:
        raise ParseError(f"{where}: cannot parse vector {text!r}")
    if len(parts) != 3:
        raise ParseError(f"{where}: expected 3 numbers, got {text!r}")
    return np.array(parts)


def _parse_origin(el, where):
    if el is None:
        return np.zeros(3), np.eye(3)
    xyz = _parse_vec3(el.get("xyz"), where)
    rpy = _parse_vec3(el.get("rpy"), where)
    return xyz, rpy_matrix(*rpy)


def _parse_inertial(link_el):
    where = _context(link_el)
    inertial = link_el.find("inertial")
    if inertial is None:
        raise ParseError(f"{where}: missing inertial block")
    mass_el = inertial.find("mass")
    if mass_el is None or mass_el.get("value") is None:
        raise ParseError(f"{where}: inertial block has no mass")
    try:
        mass = float(mass_el.get("value"))
    except ValueError:
        raise ParseError(f"{where}: bad mass {mass_el.get('value')!r}")
    xyz, rot = _parse_origin(inertial.find("origin"), where)
    inertia_el = inertial.find("inertia")
    if inertia_el is None:
        if mass == 0.0:
            return SpatialInertia(0.0, xyz, np.zeros((3, 3)))
        raise ParseError(f"{where}: inertial block has no inertia tensor")
    vals = {}
    for key in ("ixx", "iyy", "izz", "ixy", "ixz", "iyz"):
        raw = inertia_el.get(key, "0")
        try:
            vals[key] = float(raw)
        except ValueError:
            raise ParseError(f"{where}: bad inertia entry {key}={raw!r}")
    I = np.array([
        [vals["ixx"], vals["ixy"], vals["ixz"]],
        [vals["ixy"], vals["iyy"], vals["iyz"]],
        [vals["ixz"], vals["iyz"], vals["izz"]],
    ])
    I = rot @ I @ rot.T
    try:
        return SpatialInertia(mass, xyz, I)
    except ModelError as e:
        raise ParseError(f"{where}: non-physical inertia ({e})")


def _default_significance(joint_name):
    lowered = joint_name.lower()
    if "ankle" in lowered or "wrist" in lowered or "yaw" in lowered:
        return FROZEN
    return SIGNIFICANT


def parse_model(text: str, meta: dict = None, name: str = "robot") -> RobotModel:
    """Parse a robot description string into a RobotModel.

    meta, if given, supplies {frozen_joints, significant_joints, left_foot,
    right_foot, limbs}; otherwise significance falls back to joint-name
    patterns and every childless link gets an end-effector frame of its own
    name.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ParseError(f"malformed XML: {e}")
    if root.tag != "robot":
        raise ParseError(f"expected <robot> root element, found <{root.tag}>")
    name = root.get("name", name)

    inertias = {}
    order = []
    for link_el in root.findall("link"):
        link_name = link_el.get("name")
        if link_name is None:
            raise ParseError("link without a name attribute")
        if link_name in inertias:
            raise ParseError(f"duplicate link {link_name!r}")
        inertias[link_name] = _parse_inertial(link_el)
        order.append(link_name)

    joints = []
    children = {}
    for joint_el in root.findall("joint"):
        where = _context(joint_el)
        jname = joint_el.get("name")
        jtype = joint_el.get("type")
        if jname is None:
            raise ParseError("joint without a name attribute")
        if jtype not in ("revolute", "continuous", "fixed"):
            raise ParseError(f"{where}: unsupported joint type {jtype!r}")
        parent_el = joint_el.find("parent")
        child_el = joint_el.find("child")
        if parent_el is None or child_el is None:
            raise ParseError(f"{where}: missing parent or child element")
        parent = parent_el.get("link")
        child = child_el.get("link")
        for link in (parent, child):
            if link not in inertias:
                raise ParseError(f"{where}: references unknown link {link!r}")
        if child in children:
            raise ParseError(f"{where}: link {child!r} already has a parent joint")
        children[child] = jname
        xyz, rot = _parse_origin(joint_el.find("origin"), where)
        kind = FIXED if jtype == "fixed" else REVOLUTE
        axis = None
        significance = None
        if kind == REVOLUTE:
            axis_el = joint_el.find("axis")
            axis = _parse_vec3(axis_el.get("xyz") if axis_el is not None else "1 0 0", where)
            norm = np.linalg.norm(axis)
            if norm < 1e-12:
                raise ParseError(f"{where}: zero-length axis")
            axis = axis / norm
            significance = _default_significance(jname)
        joints.append(JointSpec(jname, kind, parent, child, xyz, rotation=rot,
                                axis=axis, significance=significance))

    roots = [link for link in order if link not in children]
    if len(roots) != 1:
        raise ParseError(f"expected exactly one root link, found {roots or 'none'}")
    root_link = roots[0]

    # topological order preserving document order among ready joints, so a
    # serialized model re-parses with identical joint indexing; leftover
    # joints mean a cycle or disconnected component
    by_parent = {}
    for j in joints:
        by_parent.setdefault(j.parent, []).append(j)
    ordered_links = [root_link]
    ordered_joints = []
    placed = {root_link}
    remaining = list(joints)
    progress = True
    while remaining and progress:
        progress = False
        deferred = []
        for j in remaining:
            if j.parent in placed:
                ordered_joints.append(j)
                ordered_links.append(j.child)
                placed.add(j.child)
                progress = True
            else:
                deferred.append(j)
        remaining = deferred
    if remaining:
        raise ParseError("joints do not form a tree rooted at the base (cycle or disconnected)")

    if meta:
        frozen = set(meta.get("frozen_joints", []))
        significant = set(meta.get("significant_joints", []))
        known = {j.name for j in joints if j.kind == REVOLUTE}
        for jname in frozen | significant:
            if jname not in known:
                raise ParseError(f"annotation references unknown joint {jname!r}")
        relabeled = []
        for j in ordered_joints:
            if j.kind != REVOLUTE:
                relabeled.append(j)
                continue
            if j.name in frozen:
                tag = FROZEN
            elif j.name in significant:
                tag = SIGNIFICANT
            else:
                tag = j.significance
            relabeled.append(JointSpec(j.name, j.kind, j.parent, j.child, j.translation,
                                       rotation=j.rotation, axis=j.axis, significance=tag))
        ordered_joints = relabeled

    # childless links double as end-effector frames; meta foot roles refer
    # to these by link name
    leaf_frames = {link: (link, np.zeros(3)) for link in ordered_links if link not in by_parent}
    if meta:
        for role in ("left_foot", "right_foot"):
            frame = meta.get(role)
            if frame is None:
                continue
            if frame not in ordered_links:
                raise ParseError(f"annotation {role} references unknown link {frame!r}")
            leaf_frames.setdefault(frame, (frame, np.zeros(3)))
    limbs = {}
    if meta and "limbs" in meta:
        limbs = {limb: list(members) for limb, members in meta["limbs"].items()}

    try:
        return RobotModel(
            links=tuple((link, inertias[link]) for link in ordered_links),
            joints=tuple(ordered_joints),
            end_effectors=leaf_frames,
            limbs=limbs,
            name=name,
        )
    except ModelError as e:
        raise ParseError(str(e))


def serialize_model(model: RobotModel):
    """Render a RobotModel as (description XML, annotation dict).

    End-effector frames become explicit massless links on fixed joints so
    the description is self-contained; re-parsing yields a model with
    identical dynamics.
    """

    def num(x):
        return repr(float(x))

    def vec(v):
        return " ".join(num(x) for x in v)

    def rpy_of(R):
        # intrinsic XYZ factorization matching geometry.rpy_matrix
        pitch = math.asin(min(1.0, max(-1.0, R[0, 2])))
        if abs(R[0, 2]) < 1.0 - 1e-12:
            roll = math.atan2(-R[1, 2], R[2, 2])
            yaw = math.atan2(-R[0, 1], R[0, 0])
        else:
            roll = math.atan2(R[1, 0], R[1, 1])
            yaw = 0.0
        return f"{roll!r} {pitch!r} {yaw!r}"

    lines = [f'<robot name="{model.name}">']
    for link_name, si in model.links:
        lines.append(f'  <link name="{link_name}">')
        lines.append("    <inertial>")
        lines.append(f'      <origin xyz="{vec(si.com_offset)}" rpy="0 0 0"/>')
        lines.append(f'      <mass value="{num(si.mass)}"/>')
        I = si.inertia_about_com
        lines.append(
            f'      <inertia ixx="{num(I[0, 0])}" iyy="{num(I[1, 1])}" '
            f'izz="{num(I[2, 2])}" ixy="{num(I[0, 1])}" ixz="{num(I[0, 2])}" '
            f'iyz="{num(I[1, 2])}"/>'
        )
        lines.append("    </inertial>")
        lines.append("  </link>")
    for frame, (link, offset) in model.end_effectors.items():
        lines.append(f'  <link name="{frame}">')
        lines.append("    <inertial>")
        lines.append(f'      <origin xyz="0 0 0"/>')
        lines.append('      <mass value="0.0"/>')
        lines.append('      <inertia ixx="0" iyy="0" izz="0" ixy="0" ixz="0" iyz="0"/>')
        lines.append("    </inertial>")
        lines.append("  </link>")
        lines.append(f'  <joint name="{frame}_mount" type="fixed">')
        lines.append(f'    <origin xyz="{vec(offset)}" rpy="0 0 0"/>')
        lines.append(f'    <parent link="{link}"/>')
        lines.append(f'    <child link="{frame}"/>')
        lines.append("  </joint>")
    for j in model.joints:
        jtype = "revolute" if j.kind == REVOLUTE else "fixed"
        lines.append(f'  <joint name="{j.name}" type="{jtype}">')
        lines.append(f'    <origin xyz="{vec(j.translation)}" rpy="{rpy_of(j.rotation)}"/>')
        lines.append(f'    <parent link="{j.parent}"/>')
        lines.append(f'    <child link="{j.child}"/>')
        if j.kind == REVOLUTE:
            lines.append(f'    <axis xyz="{vec(j.axis)}"/>')
        lines.append("  </joint>")
    lines.append("</robot>")

    frame_of = {link: frame for frame, (link, _) in model.end_effectors.items()}
    limbs = {}
    for limb, members in model.limbs.items():
        expanded = list(members)
        for member in members:
            if member in frame_of:
                expanded.append(frame_of[member])
        limbs[limb] = expanded

    def foot_frame(side):
        for frame in model.end_effectors:
            if side in frame and "foot" in frame:
                return frame
        return None

    meta = {
        "frozen_joints": model.frozen_joints,
        "significant_joints": model.significant_joints,
        "left_foot": foot_frame("left"),
        "right_foot": foot_frame("right"),
        "limbs": limbs,
    }
    return "\n".join(lines) + "\n", meta


def load_model(source: str) -> RobotModel:
    """Load a model from a builtin name or a description file path.

    For a path, a sibling `<stem>.meta.json` supplies annotations when
    present.
    """
    if source in BUILTIN_NAMES:
        return builtin(source)
    if not os.path.exists(source):
        raise ParseError(f"model {source!r} is neither a builtin name nor a file")
    with open(source, "r", encoding="utf-8") as fh:
        text = fh.read()
    meta = None
    stem, _ = os.path.splitext(source)
    meta_path = stem + ".meta.json"
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            try:
                meta = json.load(fh)
            except json.JSONDecodeError as e:
                raise ParseError(f"{meta_path}: invalid JSON ({e})")
    return parse_model(text, meta=meta, name=os.path.basename(stem))
