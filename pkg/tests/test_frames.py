import numpy as np
import pytest

from nvdac.frames import (
    AnvilStressParams,
    LabField,
    NvOrientation,
    anvil_stress,
    nv_orientations,
    to_nv_frame,
)
from nvdac.spin import build_hamiltonian, transition_frequencies


class TestAnvilStress:
    def test_forty_gpa_standard_anvil(self):
        stress = anvil_stress(AnvilStressParams(alpha=0.56, pressure=40.0))
        np.testing.assert_allclose(stress, np.diag([22.4, 22.4, 40.0]), atol=1e-12)

    def test_alpha_one_is_hydrostatic(self):
        stress = anvil_stress(AnvilStressParams(alpha=1.0, pressure=10.0))
        np.testing.assert_allclose(stress, 10.0 * np.eye(3), atol=0)

    def test_micropillar_at_100_gpa(self):
        stress = anvil_stress(AnvilStressParams(alpha=0.95, pressure=100.0))
        np.testing.assert_allclose(stress, np.diag([95.0, 95.0, 100.0]), atol=1e-12)

    def test_off_diagonals_exactly_zero(self):
        stress = anvil_stress(AnvilStressParams(alpha=0.7, pressure=55.0))
        assert np.count_nonzero(stress - np.diag(np.diag(stress))) == 0

    @pytest.mark.parametrize("alpha,pressure", [(0.0, 1.0), (1.6, 1.0), (0.5, -1.0)])
    def test_invalid_params(self, alpha, pressure):
        with pytest.raises(ValueError):
            AnvilStressParams(alpha=alpha, pressure=pressure)


class TestOrientations:
    def test_four_proper_rotations(self):
        orientations = nv_orientations()
        assert len(orientations) == 4
        for o in orientations:
            r = o.rotation
            assert np.abs(r @ r.T - np.eye(3)).max() < 1e-12
            assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_labels_map_to_z(self):
        import re

        for o in nv_orientations():
            axis = np.array([float(x) for x in re.findall(r"-?1", o.label)])
            axis /= np.linalg.norm(axis)
            np.testing.assert_allclose(o.rotation @ axis, [0.0, 0.0, 1.0], atol=1e-12)
            np.testing.assert_allclose(o.axis, axis, atol=1e-12)

    def test_angle_to_cube_axis(self):
        expected = np.degrees(np.arccos(1.0 / np.sqrt(3.0)))
        for o in nv_orientations():
            angle = np.degrees(np.arccos(abs(o.axis @ np.array([1.0, 0.0, 0.0]))))
            assert angle == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(54.7356103, abs=1e-6)

    def test_stable_ordering(self):
        labels = [o.label for o in nv_orientations()]
        assert labels == ["111", "1-1-1", "-11-1", "-1-11"]

    def test_improper_rotation_rejected(self):
        with pytest.raises(ValueError, match="determinant"):
            NvOrientation(label="x", rotation=np.diag([1.0, 1.0, -1.0]))


class TestLabField:
    def test_direction_must_be_unit(self):
        with pytest.raises(ValueError, match="unit"):
            LabField(magnitude=1.0, direction=(1.0, 1.0, 0.0))

    def test_negative_magnitude_rejected(self):
        with pytest.raises(ValueError):
            LabField(magnitude=-0.1)

    def test_vector(self):
        f = LabField(magnitude=2.0, direction=(0.0, 0.0, 1.0))
        np.testing.assert_allclose(f.vector, [0.0, 0.0, 2.0])


class TestToNvFrame:
    def test_isotropic_stress_invariant(self):
        stress = 7.0 * np.eye(3)
        for o in nv_orientations():
            nv = to_nv_frame(o, stress, LabField(0.0))
            np.testing.assert_allclose(nv.stress_nv, stress, atol=1e-12)

    def test_cube_axis_field_projection(self):
        # field along a cube axis projects onto every NV axis with the
        # same magnitude B / sqrt(3)
        field = LabField(magnitude=3.0, direction=(1.0, 0.0, 0.0))
        for o in nv_orientations():
            nv = to_nv_frame(o, np.zeros((3, 3)), field)
            assert abs(nv.field_nv[2]) == pytest.approx(3.0 / np.sqrt(3.0), abs=1e-12)
            assert np.linalg.norm(nv.field_nv) == pytest.approx(3.0, abs=1e-12)

    def test_trace_preserved(self):
        stress = np.diag([5.0, 5.0, 11.0])
        for o in nv_orientations():
            nv = to_nv_frame(o, stress, LabField(0.0))
            assert nv.stress_nv.trace() == pytest.approx(21.0, abs=1e-12)

    def test_eigenvalues_preserved(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(3, 3))
        stress = a + a.T
        expected = np.linalg.eigvalsh(stress)
        for o in nv_orientations():
            nv = to_nv_frame(o, stress, LabField(0.0))
            np.testing.assert_allclose(np.linalg.eigvalsh(nv.stress_nv), expected,
                                       atol=1e-12)


class TestPhysicalInvariances:
    def test_joint_rotation_invariance(self, zfs, couplings):
        # rotating the stress, the field and the frame definition together
        # must leave the spectrum untouched
        from scipy.spatial.transform import Rotation

        rng = np.random.default_rng(5)
        base = nv_orientations()[0]
        stress = anvil_stress(AnvilStressParams(alpha=0.6, pressure=50.0))
        field = LabField(magnitude=4.0, direction=(1.0, 0.0, 0.0))
        reference = transition_frequencies(
            build_hamiltonian(zfs, couplings, to_nv_frame(base, stress, field)))

        for _ in range(20):
            q = Rotation.random(rng=rng).as_matrix()
            rotated = NvOrientation(label=base.label, rotation=base.rotation @ q.T)
            stress_rot = q @ stress @ q.T
            stress_rot = 0.5 * (stress_rot + stress_rot.T)
            dir_rot = q @ field.direction
            dir_rot = dir_rot / np.linalg.norm(dir_rot)
            field_rot = LabField(magnitude=field.magnitude, direction=dir_rot)
            pair = transition_frequencies(
                build_hamiltonian(zfs, couplings, to_nv_frame(rotated, stress_rot, field_rot)))
            assert pair.nu_minus == pytest.approx(reference.nu_minus, abs=1e-9)
            assert pair.nu_plus == pytest.approx(reference.nu_plus, abs=1e-9)

    def test_fourfold_degeneracy_quick(self, zfs, couplings):
        rng = np.random.default_rng(6)
        for _ in range(10):
            params = AnvilStressParams(alpha=rng.uniform(0.4, 1.0),
                                       pressure=rng.uniform(0.0, 130.0))
            field = LabField(magnitude=rng.uniform(0.0, 10.0))
            stress = anvil_stress(params)
            pairs = [
                transition_frequencies(
                    build_hamiltonian(zfs, couplings, to_nv_frame(o, stress, field)))
                for o in nv_orientations()
            ]
            lo = [p.nu_minus for p in pairs]
            hi = [p.nu_plus for p in pairs]
            assert max(lo) - min(lo) < 1e-9
            assert max(hi) - min(hi) < 1e-9

    def test_world_rotation_about_nv_axis(self, zfs):
        # the trigonal defect symmetry: rotating stress and field by 120
        # degrees about the NV axis leaves the spectrum unchanged, with and
        # without the axial-transverse mixing terms
        from nvdac.spin import NvFrameInputs, StressCouplings

        t = 2 * np.pi / 3
        c = np.array([[np.cos(t), -np.sin(t), 0.0],
                      [np.sin(t), np.cos(t), 0.0],
                      [0.0, 0.0, 1.0]])
        rng = np.random.default_rng(9)
        for mixing in (False, True):
            couplings = StressCouplings(include_spin_half_mixing=mixing)
            for _ in range(10):
                a = rng.normal(scale=20, size=(3, 3))
                stress = a + a.T
                field = rng.uniform(-5, 5, size=3)
                p1 = transition_frequencies(build_hamiltonian(
                    zfs, couplings, NvFrameInputs(stress, field)))
                stress_rot = 0.5 * ((c @ stress @ c.T) + (c @ stress @ c.T).T)
                p2 = transition_frequencies(build_hamiltonian(
                    zfs, couplings, NvFrameInputs(stress_rot, c @ field)))
                assert p1.nu_minus == pytest.approx(p2.nu_minus, abs=1e-9)
                assert p1.nu_plus == pytest.approx(p2.nu_plus, abs=1e-9)
