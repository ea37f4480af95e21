import numpy as np
import pytest

from gatehouse.frames import GrayFrame
from gatehouse.lbp import (
    FaceTemplate,
    LbpConfig,
    LbpFaceRecognizer,
    chi_square,
    extract_features,
    grid_histogram,
    lbp_code,
    lbp_image,
    load_model,
    predict,
    save_model,
    train,
)


def frame(arr) -> GrayFrame:
    return GrayFrame(np.asarray(arr, dtype=np.uint8))


# ---------------------------------------------------------------- codes


def test_code_all_equal_is_255():
    assert lbp_code(np.full((3, 3), 7)) == 255


def test_code_dominant_center_is_0():
    patch = np.zeros((3, 3))
    patch[1, 1] = 255
    assert lbp_code(patch) == 0


def test_code_ordered_neighbors():
    # TL,T,TR,R,BR,B,BL,L = 1..8 around center 5: only the last four bits set
    patch = np.array([[1, 2, 3], [8, 5, 4], [7, 6, 5]])
    assert lbp_code(patch) == 240


def test_code_rejects_wrong_shape():
    with pytest.raises(ValueError):
        lbp_code(np.zeros((2, 3)))


def _lbp_oracle(px: np.ndarray) -> np.ndarray:
    """Per-pixel nested-loop reference, bit order TL,T,TR,R,BR,B,BL,L."""
    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]
    h, w = px.shape
    out = np.zeros((h - 2, w - 2), dtype=np.uint8)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            code = 0
            for bit, (dy, dx) in enumerate(offsets):
                if px[y + dy, x + dx] >= px[y, x]:
                    code |= 1 << bit
            out[y - 1, x - 1] = code
    return out


def test_image_matches_oracle_on_random_frames():
    rng = np.random.default_rng(55)
    for _ in range(100):
        px = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        assert np.array_equal(lbp_image(frame(px)), _lbp_oracle(px))


def test_image_constant_and_degenerate():
    assert np.all(lbp_image(GrayFrame.full(10, 6, 42)) == 255)
    single = lbp_image(frame([[1, 2, 3], [8, 5, 4], [7, 6, 5]]))
    assert single.shape == (1, 1) and single[0, 0] == 240
    with pytest.raises(ValueError):
        lbp_image(GrayFrame.full(2, 5, 0))


def test_image_brightness_shift_invariance():
    rng = np.random.default_rng(56)
    for _ in range(10):
        px = rng.integers(0, 200, size=(8, 8), dtype=np.uint8)
        shifted = (px + 40).astype(np.uint8)
        assert np.array_equal(lbp_image(frame(px)), lbp_image(frame(shifted)))


# ---------------------------------------------------------------- histograms


def test_histogram_1x1_counts():
    rng = np.random.default_rng(57)
    codes = rng.integers(0, 256, size=(9, 13), dtype=np.uint8)
    cfg = LbpConfig(grid_x=1, grid_y=1, normalize_cells=False)
    hist = grid_histogram(codes, cfg)
    assert hist.shape == (256,)
    assert hist.sum() == 9 * 13
    assert hist[codes[0, 0]] >= 1


def test_histogram_constant_normalized():
    codes = np.full((8, 8), 255, dtype=np.uint8)
    cfg = LbpConfig(grid_x=2, grid_y=2)
    hist = grid_histogram(codes, cfg)
    assert hist.shape == (4 * 256,)
    for cell in range(4):
        sl = hist[cell * 256 : (cell + 1) * 256]
        assert sl[255] == 1.0 and sl.sum() == 1.0


def test_histogram_hand_tally():
    codes = np.array(
        [[0, 0, 1, 1], [0, 0, 1, 2], [3, 3, 4, 4], [3, 5, 4, 4]], dtype=np.uint8
    )
    cfg = LbpConfig(grid_x=2, grid_y=2, normalize_cells=False)
    hist = grid_histogram(codes, cfg)
    tl, tr, bl, br = (hist[i * 256 : (i + 1) * 256] for i in range(4))
    assert tl[0] == 4
    assert tr[1] == 3 and tr[2] == 1
    assert bl[3] == 3 and bl[5] == 1
    assert br[4] == 4


def test_histogram_remainder_goes_to_last_cells():
    codes = np.zeros((5, 5), dtype=np.uint8)
    codes[:, 4] = 9  # rightmost column lands in the last cell column
    codes[4, :] = 7  # bottom row lands in the last cell row
    cfg = LbpConfig(grid_x=2, grid_y=2, normalize_cells=False)
    hist = grid_histogram(codes, cfg)
    tl, tr, bl, br = (hist[i * 256 : (i + 1) * 256] for i in range(4))
    assert tl.sum() == 4 and tl[0] == 4  # 2x2 block
    assert tr.sum() == 6  # 2x3 block including the 9s column
    assert tr[9] == 2
    assert bl.sum() == 6 and bl[7] == 2  # 3x2 block including one row of 7s
    assert br.sum() == 9
    # the corner pixel was overwritten to 7, leaving two 9s and three 7s
    assert br[7] == 3 and br[9] == 2 and br[0] == 4


def test_histogram_rejects_oversized_grid():
    with pytest.raises(ValueError):
        grid_histogram(np.zeros((4, 4), dtype=np.uint8), LbpConfig(grid_x=5, grid_y=2))


# ---------------------------------------------------------------- distance


def test_chi_square_known_values():
    assert chi_square(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert chi_square(np.array([2.0, 0.0]), np.array([0.0, 2.0])) == 4.0


def test_chi_square_symmetric_and_nonnegative():
    rng = np.random.default_rng(58)
    for _ in range(50):
        a = rng.uniform(0, 5, size=32)
        b = rng.uniform(0, 5, size=32)
        d = chi_square(a, b)
        assert d >= 0
        assert d == pytest.approx(chi_square(b, a), rel=1e-12)


def test_chi_square_skips_zero_bins():
    a = np.array([0.0, 3.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    assert chi_square(a, b) == pytest.approx(4.0 / 4.0)


def test_chi_square_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        chi_square(np.zeros(3), np.zeros(4))


# ---------------------------------------------------------------- train/predict


def texture(seed: int, size: int = 40) -> GrayFrame:
    rng = np.random.default_rng(seed)
    return frame(rng.integers(0, 256, size=(size, size)))


def test_train_counts_templates():
    model = train({1: [texture(1)]})
    assert len(model.templates) == 1
    assert model.templates[0].subject_id == 1 and model.templates[0].view_id == 0


def test_train_scale_180_images():
    enrollment = {}
    serial = 0
    for subject in range(16):
        count = 12 if subject < 4 else 11
        enrollment[subject] = [texture(1000 + serial + i) for i in range(count)]
        serial += count
    model = train(enrollment)
    assert len(model.templates) == 180


def test_train_duplicate_views_identical_features():
    img = texture(2)
    model = train({1: [img, img]})
    assert np.array_equal(model.templates[0].features, model.templates[1].features)


def test_train_rejects_empty_and_tiny():
    with pytest.raises(ValueError):
        train({})
    with pytest.raises(ValueError):
        train({1: []})
    with pytest.raises(ValueError, match="subject 7.*view 0"):
        train({7: [GrayFrame.full(2, 2, 0)]})


def test_resubstitution_identifies_every_training_image():
    enrollment = {s: [texture(100 * s + v) for v in range(3)] for s in (1, 2, 3)}
    model = train(enrollment)
    for s, views in enrollment.items():
        for img in views:
            result = predict(img, model)
            assert result.subject_id == s
            assert result.best_distance == 0.0


def test_predict_unknown_when_far():
    model = train({1: [GrayFrame.full(40, 40, 128)]}, LbpConfig(unknown_threshold=0.5))
    checker = np.zeros((40, 40), dtype=np.uint8)
    checker[::2, ::2] = 255
    result = predict(frame(checker), model)
    assert not result.known and result.subject_id is None
    assert result.best_distance > 0.5


def test_predict_tie_breaks_to_lower_subject():
    img = texture(3)
    model = train({2: [img], 1: [img]})
    result = predict(img, model)
    assert result.subject_id == 1
    assert result.best_distance == 0.0
    assert result.runner_up_distance == 0.0


def test_predict_runner_up_ordering():
    model = train({1: [texture(4)], 2: [texture(5)]})
    result = predict(texture(4), model)
    assert result.runner_up_distance is not None
    assert result.best_distance <= result.runner_up_distance


def test_predict_rejects_empty_model():
    model = train({1: [texture(6)]})
    model.templates = []
    with pytest.raises(ValueError):
        predict(texture(6), model)


def test_derived_threshold_behavior():
    a = texture(7)
    noisy = frame(np.clip(a.pixels.astype(int) + np.random.default_rng(8).integers(-6, 7, a.pixels.shape), 0, 255))
    model = train({1: [a, noisy]})
    intra = chi_square(model.templates[0].features, model.templates[1].features)
    assert model.unknown_threshold == pytest.approx(1.5 * intra)
    assert predict(a, model).subject_id == 1


def test_single_view_uses_fallback_threshold():
    model = train({1: [texture(9)]}, LbpConfig(fallback_threshold=20.0))
    assert model.unknown_threshold == 20.0


def test_illumination_shift_preserves_result():
    base = np.asarray(texture(10).pixels, dtype=np.uint8)
    base = np.clip(base, 0, 200).astype(np.uint8)
    model = train({1: [frame(base)]})
    lifted = frame((base + 30).astype(np.uint8))
    assert np.array_equal(
        extract_features(frame(base), model.cfg), extract_features(lifted, model.cfg)
    )
    # canonical size matches the input here so no resample blurs the shift
    exact = train({1: [frame(base)]}, LbpConfig(canonical_size=40))
    result = predict(lifted, exact)
    assert result.subject_id == 1 and result.best_distance == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        LbpConfig(radius=2)
    with pytest.raises(ValueError):
        LbpConfig(neighbors=4)
    with pytest.raises(ValueError):
        LbpConfig(grid_x=0)
    with pytest.raises(ValueError):
        LbpConfig(unknown_threshold=-1.0)
    with pytest.raises(ValueError):
        LbpConfig(canonical_size=8)


# ---------------------------------------------------------------- persistence


def test_model_roundtrip_and_byte_stability(tmp_path):
    model = train({1: [texture(11), texture(12)], 2: [texture(13)]})
    p1 = tmp_path / "model.bin"
    p2 = tmp_path / "model2.bin"
    save_model(model, p1)
    loaded = load_model(p1)
    assert loaded.cfg == model.cfg
    assert loaded.unknown_threshold == model.unknown_threshold
    assert loaded.templates == model.templates
    save_model(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_model_rejects_bad_magic(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOTAMODEL\n{}\n")
    with pytest.raises(ValueError):
        load_model(p)


def test_model_rejects_truncation(tmp_path):
    model = train({1: [texture(14)]})
    p = tmp_path / "model.bin"
    save_model(model, p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) - 100])
    with pytest.raises(ValueError):
        load_model(p)


def test_train_is_deterministic(tmp_path):
    enrollment = {1: [texture(15)], 2: [texture(16)]}
    p1 = tmp_path / "a.bin"
    p2 = tmp_path / "b.bin"
    save_model(train(enrollment), p1)
    save_model(train(enrollment), p2)
    assert p1.read_bytes() == p2.read_bytes()


# ---------------------------------------------------------------- backend


def test_recognizer_backend_lifecycle():
    rec = LbpFaceRecognizer()
    assert not rec.predict(texture(17)).known
    rec.train({1: [texture(18)], 2: [texture(19)]})
    assert rec.predict(texture(18)).subject_id == 1
    rec.forget(1)
    assert rec.predict(texture(18)).subject_id != 1
    rec.forget(2)
    assert rec.model is None
    rec.train({})
    assert rec.model is None
