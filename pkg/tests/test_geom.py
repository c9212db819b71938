import numpy as np
import pytest

from mvmanip.geom import (
    PinholeCamera,
    PointCloud,
    RigidTransform,
    WorkspaceBox,
    augment,
    crop_to_workspace,
    euler_zyx_to_matrix,
    pinhole_project,
    rot_z,
    sample_augment_params,
    transform_cloud,
    unproject_rgbd,
    wrap_deg,
)


def random_cloud(rng, n, scale=1.0):
    return PointCloud(rng.uniform(-scale, scale, (n, 3)), rng.uniform(0, 1, (n, 3)))


class TestRigidTransform:
    def test_identity_roundtrip(self):
        t = RigidTransform.identity()
        p = np.array([0.1, -0.2, 0.3])
        assert np.allclose(t.apply(p), p)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 2.0, np.zeros(3))

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            RigidTransform(r, np.zeros(3))

    def test_compose_group_law(self):
        rng = np.random.default_rng(0)
        t1 = RigidTransform(euler_zyx_to_matrix(rng.uniform(0, 360, 3)), rng.normal(size=3))
        t2 = RigidTransform(euler_zyx_to_matrix(rng.uniform(0, 360, 3)), rng.normal(size=3))
        pts = rng.normal(size=(100, 3))
        composed = t1.compose(t2).apply(pts)
        sequential = t1.apply(t2.apply(pts))
        assert np.allclose(composed, sequential, atol=1e-9)

    def test_inverse(self):
        rng = np.random.default_rng(1)
        t = RigidTransform(euler_zyx_to_matrix(rng.uniform(0, 360, 3)), rng.normal(size=3))
        pts = rng.normal(size=(50, 3))
        assert np.allclose(t.inverse().apply(t.apply(pts)), pts, atol=1e-9)


class TestPointCloud:
    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            PointCloud(np.zeros((3, 3)), np.zeros((2, 3)))

    def test_color_range_enforced(self):
        with pytest.raises(ValueError):
            PointCloud(np.zeros((1, 3)), np.array([[0.0, 0.0, 1.5]]))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[np.nan, 0, 0]]), np.zeros((1, 3)))


class TestUnproject:
    def test_canonical_intrinsics(self):
        # fx=fy=1, cx=cy=0, identity pose: pixel (0,0) at depth 1 -> (0,0,1)
        cam = PinholeCamera(1, 1, 0, 0)
        rgb = np.ones((1, 1, 3)) * 0.5
        depth = np.ones((1, 1))
        cloud = unproject_rgbd(rgb, depth, cam)
        assert len(cloud) == 1
        assert np.allclose(cloud.positions[0], [0, 0, 1])
        assert np.allclose(cloud.colors[0], 0.5)

    def test_zero_depth_gives_empty_cloud(self):
        cam = PinholeCamera(10, 10, 5, 5)
        cloud = unproject_rgbd(np.zeros((4, 4, 3)), np.zeros((4, 4)), cam)
        assert len(cloud) == 0

    def test_manual_unprojection(self):
        # (u - cx) / fx * d computed by hand: (164 - 64) / 100 * 2 = 2
        cam = PinholeCamera(100, 100, 64, 64)
        rgb = np.zeros((128, 256, 3))
        depth = np.zeros((128, 256))
        depth[64, 164] = 2.0
        cloud = unproject_rgbd(rgb, depth, cam)
        assert len(cloud) == 1
        assert np.allclose(cloud.positions[0], [2.0, 0.0, 2.0])

    def test_shape_mismatch_rejected(self):
        cam = PinholeCamera(1, 1, 0, 0)
        with pytest.raises(ValueError):
            unproject_rgbd(np.zeros((4, 4, 3)), np.zeros((4, 5)), cam)

    def test_reprojection_recovers_pixels(self):
        # unproject then project back: pixel coordinates within 1e-6 px
        rng = np.random.default_rng(7)
        pose = RigidTransform(euler_zyx_to_matrix([30, -10, 5]), np.array([0.2, -0.1, 0.4]))
        cam = PinholeCamera(80.0, 90.0, 32.0, 24.0, pose)
        depth = rng.uniform(0.5, 2.0, (48, 64))
        depth[rng.uniform(size=depth.shape) < 0.3] = 0.0
        rgb = rng.uniform(0, 1, (48, 64, 3))
        cloud = unproject_rgbd(rgb, depth, cam)
        u, v, z = pinhole_project(cam, cloud.positions)
        vv, uu = np.nonzero(depth > 0)
        assert np.allclose(u, uu, atol=1e-6)
        assert np.allclose(v, vv, atol=1e-6)
        assert np.allclose(z, depth[vv, uu], atol=1e-9)


class TestTransformCloud:
    def test_identity(self):
        rng = np.random.default_rng(2)
        cloud = random_cloud(rng, 20)
        out = transform_cloud(cloud, RigidTransform.identity())
        assert np.array_equal(out.positions, cloud.positions)
        assert np.array_equal(out.colors, cloud.colors)

    def test_axis_rotation(self):
        cloud = PointCloud(np.array([[1.0, 0.0, 0.0]]), np.zeros((1, 3)))
        out = transform_cloud(cloud, RigidTransform(rot_z(90.0), np.zeros(3)))
        assert np.allclose(out.positions[0], [0.0, 1.0, 0.0], atol=1e-9)

    def test_rigidity_preserves_distances(self):
        rng = np.random.default_rng(3)
        cloud = random_cloud(rng, 40)
        t = RigidTransform(euler_zyx_to_matrix(rng.uniform(0, 360, 3)), rng.normal(size=3))
        out = transform_cloud(cloud, t)
        d_before = np.linalg.norm(cloud.positions[:, None] - cloud.positions[None], axis=-1)
        d_after = np.linalg.norm(out.positions[:, None] - out.positions[None], axis=-1)
        assert np.allclose(d_before, d_after, atol=1e-9)


class TestCrop:
    def test_all_inside_identity(self):
        rng = np.random.default_rng(4)
        cloud = random_cloud(rng, 30, scale=0.4)
        out = crop_to_workspace(cloud, WorkspaceBox.default())
        assert np.array_equal(out.positions, cloud.positions)

    def test_empty_result(self):
        cloud = PointCloud(np.ones((5, 3)) * 3.0, np.zeros((5, 3)))
        out = crop_to_workspace(cloud, WorkspaceBox.default())
        assert len(out) == 0

    def test_matches_membership_oracle(self):
        rng = np.random.default_rng(5)
        box = WorkspaceBox.default()
        cloud = random_cloud(rng, 1000, scale=1.0)  # box is 2x smaller than spread
        out = crop_to_workspace(cloud, box)
        expected = [
            i
            for i, p in enumerate(cloud.positions)
            if all(box.min[k] <= p[k] <= box.max[k] for k in range(3))
        ]
        assert len(out) == len(expected)
        assert np.array_equal(out.positions, cloud.positions[expected])

    def test_zero_measure_box_rejected(self):
        with pytest.raises(ValueError):
            WorkspaceBox(np.zeros(3), np.zeros(3))


class TestAugment:
    def test_degenerate_ranges_are_identity(self):
        rng = np.random.default_rng(6)
        cloud = random_cloud(rng, 25)
        gt_t = np.array([0.1, 0.2, 0.0])
        gt_e = np.array([10.0, 20.0, 30.0])
        out_cloud, out_t, out_e = augment(cloud, gt_t, gt_e, rng_seed=9, t_range=0.0, yaw_range_deg=0.0)
        assert np.array_equal(out_cloud.positions, cloud.positions)
        assert np.array_equal(out_t, gt_t)
        assert np.array_equal(out_e, gt_e)

    def test_sampled_transform_matches_hand_application(self):
        cloud = PointCloud(np.array([[0.2, 0.0, 0.0]]), np.zeros((1, 3)))
        seed = 123
        yaw, t = sample_augment_params(seed, 0.125, 45.0)
        _, out_t, out_e = augment(cloud, [0.2, 0.0, 0.0], [0.0, 0.0, 0.0], seed)
        r = np.deg2rad(yaw)
        expected = np.array([0.2 * np.cos(r), 0.2 * np.sin(r), 0.0]) + t
        assert np.allclose(out_t, expected, atol=1e-9)
        assert np.isclose(out_e[0], wrap_deg(yaw))

    def test_same_seed_bitwise_identical(self):
        rng = np.random.default_rng(8)
        cloud = random_cloud(rng, 15)
        a = augment(cloud, [0, 0, 0], [0, 0, 0], rng_seed=42)
        b = augment(cloud, [0, 0, 0], [0, 0, 0], rng_seed=42)
        assert np.array_equal(a[0].positions, b[0].positions)
        assert np.array_equal(a[1], b[1])
        assert np.array_equal(a[2], b[2])

    def test_samples_stay_in_range(self):
        for seed in range(10_000):
            yaw, t = sample_augment_params(seed, 0.125, 45.0)
            assert -45.0 <= yaw <= 45.0
            assert np.all(np.abs(t) <= 0.125)

    def test_euler_yaw_wraps(self):
        cloud = PointCloud.empty()
        # force a seed whose sampled yaw is positive, then start near 360
        seed = next(s for s in range(100) if sample_augment_params(s, 0.0, 45.0)[0] > 1.0)
        yaw, _ = sample_augment_params(seed, 0.0, 45.0)
        _, _, out_e = augment(cloud, [0, 0, 0], [359.5, 0.0, 0.0], seed, t_range=0.0)
        assert 0.0 <= out_e[0] < 360.0
        assert np.isclose(out_e[0], wrap_deg(359.5 + yaw))
