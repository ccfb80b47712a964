import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swingopt import models
from swingopt.rbd import compute_centroidal_map
from swingopt.robot import ModelError
from swingopt.urdf import ParseError, load_model, parse_model, serialize_model

from conftest import random_quat

TWO_LINK = """
<robot name="twolink">
  <link name="base">
    <inertial>
      <origin xyz="0 0 0"/>
      <mass value="1.0"/>
      <inertia ixx="0.1" iyy="0.1" izz="0.1" ixy="0" ixz="0" iyz="0"/>
    </inertial>
  </link>
  <link name="arm">
    <inertial>
      <origin xyz="0 0 -0.2"/>
      <mass value="1.0"/>
      <inertia ixx="0.02" iyy="0.02" izz="0.005" ixy="0" ixz="0" iyz="0"/>
    </inertial>
  </link>
  <joint name="shoulder" type="revolute">
    <origin xyz="0 0 -0.1" rpy="0 0 0"/>
    <parent link="base"/>
    <child link="arm"/>
    <axis xyz="0 1 0"/>
  </joint>
</robot>
"""


class TestParse:
    def test_two_link_document(self):
        model = parse_model(TWO_LINK)
        assert model.n == 1
        assert model.total_mass == pytest.approx(2.0)
        assert model.name == "twolink"
        # the childless link doubles as an end-effector frame
        assert "arm" in model.end_effectors

    def test_name_pattern_significance_defaults(self):
        doc = TWO_LINK.replace("shoulder", "ankle_pitch")
        assert parse_model(doc).frozen_joints == ["ankle_pitch"]
        doc = TWO_LINK.replace("shoulder", "torso_yaw")
        assert parse_model(doc).frozen_joints == ["torso_yaw"]
        doc = TWO_LINK.replace("shoulder", "wrist_roll")
        assert parse_model(doc).frozen_joints == ["wrist_roll"]
        assert parse_model(TWO_LINK).significant_joints == ["shoulder"]

    def test_meta_overrides_significance(self):
        model = parse_model(TWO_LINK, meta={"frozen_joints": ["shoulder"]})
        assert model.frozen_joints == ["shoulder"]
        model = parse_model(
            TWO_LINK.replace("shoulder", "ankle"),
            meta={"significant_joints": ["ankle"]})
        assert model.significant_joints == ["ankle"]

    def test_meta_unknown_joint_rejected(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK, meta={"frozen_joints": ["nope"]})

    def test_continuous_treated_as_revolute(self):
        model = parse_model(TWO_LINK.replace('type="revolute"', 'type="continuous"'))
        assert model.n == 1

    def test_missing_axis_defaults_to_x(self):
        doc = TWO_LINK.replace('    <axis xyz="0 1 0"/>\n', "")
        model = parse_model(doc)
        np.testing.assert_array_equal(model.joints[0].axis, [1.0, 0.0, 0.0])

    def test_malformed_xml_rejected(self):
        with pytest.raises(ParseError):
            parse_model("<robot><link name='a'>")

    def test_wrong_root_rejected(self):
        with pytest.raises(ParseError):
            parse_model("<model/>")

    def test_unsupported_joint_type_rejected(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK.replace('type="revolute"', 'type="prismatic"'))

    def test_unknown_link_reference_rejected(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK.replace('child link="arm"', 'child link="nope"'))

    def test_cycle_rejected(self):
        doc = TWO_LINK.replace(
            "</robot>",
            '<joint name="loop" type="fixed">'
            '<origin xyz="0 0 0"/><parent link="arm"/><child link="base"/>'
            "</joint></robot>",
        )
        with pytest.raises(ParseError):
            parse_model(doc)

    def test_negative_mass_rejected_at_parse(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK.replace('value="1.0"', 'value="-1.0"'))

    def test_corrupted_inertia_sign_rejected(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK.replace('ixx="0.02"', 'ixx="-0.02"'))

    def test_zero_axis_rejected(self):
        with pytest.raises(ParseError):
            parse_model(TWO_LINK.replace('xyz="0 1 0"', 'xyz="0 0 0"'))

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=400))
    def test_parser_total_on_fuzzed_text(self, text):
        try:
            parse_model(text)
        except ParseError:
            pass

    @settings(max_examples=60, deadline=None)
    @given(st.text(alphabet="<>/robtlinkjemass=\"' 0123456789.axyz", max_size=300))
    def test_parser_total_on_fuzzed_markup(self, text):
        try:
            parse_model(text)
        except ParseError:
            pass


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["planar3", "biped12", "humanoid20"])
    def test_momentum_map_survives_round_trip(self, name):
        model = models.builtin(name)
        text, meta = serialize_model(model)
        again = parse_model(text, meta=meta, name=model.name)
        assert again.n == model.n
        assert again.total_mass == pytest.approx(model.total_mass, abs=1e-12)
        assert again.significant_joints == model.significant_joints
        assert set(again.end_effectors) >= set(model.end_effectors)
        rng = np.random.default_rng(5)
        for _ in range(100):
            quat = random_quat(rng)
            q = rng.uniform(-1.5, 1.5, model.n)
            a = compute_centroidal_map(model, quat, q)
            b = compute_centroidal_map(again, quat, q)
            np.testing.assert_allclose(b.ang_base_ang, a.ang_base_ang, atol=1e-12)
            np.testing.assert_allclose(b.ang_joint, a.ang_joint, atol=1e-12)
            np.testing.assert_allclose(b.lin, a.lin, atol=1e-12)
            np.testing.assert_allclose(b.com, a.com, atol=1e-12)

    def test_end_effector_offsets_survive(self, biped12):
        text, meta = serialize_model(biped12)
        again = parse_model(text, meta=meta)
        from swingopt.rbd import forward_kinematics
        rng = np.random.default_rng(6)
        q = rng.uniform(-0.8, 0.8, biped12.n)
        pa = forward_kinematics(biped12, [1, 0, 0, 0], q)
        pb = forward_kinematics(again, [1, 0, 0, 0], q)
        for frame in biped12.end_effectors:
            np.testing.assert_allclose(
                pb.position(frame), pa.position(frame), atol=1e-12)

    def test_limbs_and_feet_in_meta(self, biped12):
        _, meta = serialize_model(biped12)
        assert meta["left_foot"] == "foot_left"
        assert meta["right_foot"] == "foot_right"
        assert set(meta["limbs"]) == set(biped12.limbs)


class TestLoadModel:
    def test_builtin_names(self):
        assert load_model("biped12").name == "biped12"

    def test_missing_path_rejected(self):
        with pytest.raises((ParseError, ModelError)):
            load_model("/nonexistent/robot.urdf")

    def test_file_with_sibling_meta(self, tmp_path, biped12):
        text, meta = serialize_model(biped12)
        path = tmp_path / "bot.urdf"
        path.write_text(text)
        (tmp_path / "bot.meta.json").write_text(json.dumps(meta))
        model = load_model(str(path))
        assert model.significant_joints == biped12.significant_joints
        assert "foot_left" in model.end_effectors

    def test_file_without_meta_uses_name_patterns(self, tmp_path, biped12):
        text, _ = serialize_model(biped12)
        path = tmp_path / "bare.urdf"
        path.write_text(text)
        model = load_model(str(path))
        # ankle/yaw joints freeze by name; hip roll/pitch/knee stay significant
        assert set(model.frozen_joints) == set(biped12.frozen_joints)
