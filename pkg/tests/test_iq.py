import numpy as np
import pytest
from scipy.special import erfc

from qutrit_mcmd.iq import (
    BlobModel,
    BinaryThreshold,
    QDATrainingError,
    ShotFileError,
    classify_binary,
    classify_qda,
    default_blob_model,
    read_shots_csv,
    synthesize_labeled,
    synthesize_shots,
    ternary_counts,
    train_binary_threshold,
    train_qda,
    write_shots_csv,
)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_tiny_covariance_collapses_to_mean():
    model = BlobModel([[1.0, -2.0]], [1e-12 * np.eye(2)])
    pts = synthesize_shots(model, 0, 100, seed=1)
    assert np.max(np.abs(pts - [1.0, -2.0])) < 1e-5


def test_synthesis_is_seeded():
    m = default_blob_model()
    assert np.array_equal(synthesize_shots(m, 2, 50, 9), synthesize_shots(m, 2, 50, 9))


def test_sample_mean_within_standard_error():
    m = default_blob_model()
    n = 10**5
    pts = synthesize_shots(m, 1, n, seed=4)
    se = np.sqrt(np.diag(m.covs[1]) / n)
    assert np.all(np.abs(pts.mean(axis=0) - m.means[1]) < 5 * se)


def test_blob_model_rejects_bad_covariance():
    with pytest.raises(ValueError):
        BlobModel([[0, 0]], [[[1, 2], [2, 1]]])


def test_qda_separated_blobs_perfect():
    model = BlobModel([[0, 0], [100, 0], [0, 100]], np.repeat(np.eye(2)[None], 3, axis=0))
    pts, labels = synthesize_labeled(model, 200, seed=3)
    qda = train_qda(pts, labels)
    assert np.array_equal(qda.classify(pts), labels)
    assert classify_qda(qda, qda.means[1]) == 1


def test_qda_symmetric_midpoint_tie():
    pts = np.array([[-1, 0], [-2, 1], [-2, -1], [-3, 0], [1, 0], [2, 1], [2, -1], [3, 0]], dtype=float)
    labels = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    qda = train_qda(pts, labels)
    scores = qda.log_likelihoods([[0.0, 0.0]])[0]
    assert abs(scores[0] - scores[1]) < 1e-9
    assert classify_qda(qda, [0.0, 0.0]) == 0


def test_qda_duplicated_class_keeps_parameters():
    pts, labels = synthesize_labeled(default_blob_model(), 100, seed=8)
    base = train_qda(pts, labels, priors="empirical")
    dup_pts = np.concatenate([pts, pts[labels == 2]])
    dup_labels = np.concatenate([labels, labels[labels == 2]])
    dup = train_qda(dup_pts, dup_labels, priors="empirical")
    assert np.allclose(dup.means, base.means)
    assert np.allclose(dup.covs, base.covs)
    assert np.allclose(np.exp(dup.log_priors), [0.25, 0.25, 0.5])
    assert np.allclose(np.exp(train_qda(dup_pts, dup_labels).log_priors), 1 / 3)


def test_qda_singular_covariance_rejected():
    pts = np.array([[0, 0], [1, 1], [2, 2], [5, 0], [6, 1], [5, 2]], dtype=float)
    with pytest.raises(QDATrainingError):
        train_qda(pts, [0, 0, 0, 1, 1, 1])
    with pytest.raises(QDATrainingError):
        train_qda(pts[:4], [0, 0, 1, 1])


def test_qda_confusion_concentrated_between_one_and_two():
    m = default_blob_model()
    pts, labels = synthesize_labeled(m, 3000, seed=10)
    qda = train_qda(pts, labels)
    test_pts, test_labels = synthesize_labeled(m, 20000, seed=11)
    pred = qda.classify(test_pts)
    conf = np.zeros((3, 3))
    np.add.at(conf, (pred, test_labels), 1)
    off = conf - np.diag(np.diag(conf))
    assert off[1, 2] + off[2, 1] > 0.95 * off.sum()
    assert ternary_counts(qda, test_pts).shots == 60000


def test_qda_permutation_covariant():
    pts, labels = synthesize_labeled(default_blob_model(), 500, seed=12)
    perm = np.array([2, 0, 1])
    a = train_qda(pts, labels)
    b = train_qda(pts, perm[labels])
    probe = synthesize_labeled(default_blob_model(), 500, seed=13)[0]
    assert np.array_equal(perm[a.classify(probe)], b.classify(probe))


def _bayes_rate(model, lo=-6, hi=20, n=1200):
    # Dense-grid integration of max_k (1/3) N_k(x).
    xs = np.linspace(lo, hi, n)
    ys = np.linspace(lo, hi, n)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    dens = []
    for mu, cov in zip(model.means, model.covs):
        d = grid - mu
        inv = np.linalg.inv(cov)
        q = np.einsum("ni,ij,nj->n", d, inv, d)
        dens.append(np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(np.linalg.det(cov))))
    dens = np.array(dens) / 3
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(dens.max(axis=0).sum() * cell)


def test_qda_near_bayes_optimal():
    m = BlobModel([[0, 0], [4, 0], [5.5, 1.5]], [np.eye(2), [[1.5, 0.3], [0.3, 1.0]], 2 * np.eye(2)])
    pts, labels = synthesize_labeled(m, 3000, seed=14)
    qda = train_qda(pts, labels)
    test_pts, test_labels = synthesize_labeled(m, 30000, seed=15)
    acc = np.mean(qda.classify(test_pts) == test_labels)
    assert abs(acc - _bayes_rate(m)) < 0.02


def test_binary_threshold_axis_and_midpoint():
    pts = np.array([[0, 0], [0, 0], [2, 0], [2, 0]], dtype=float)
    th = train_binary_threshold(pts, [0, 0, 1, 1])
    assert np.allclose(th.axis, [1, 0])
    assert th.threshold == pytest.approx(1.0)
    assert classify_binary(th, [0.2, 5.0]) == 0
    assert classify_binary(th, [1.8, -3.0]) == 1
    assert classify_binary(th, [1.0, 7.0]) == 0


def test_binary_threshold_rotation_equivariant():
    pts, labels = synthesize_labeled(default_blob_model(), 300, seed=16)
    keep = labels < 2
    pts, labels = pts[keep], labels[keep]
    r = rotation(0.7)
    a = train_binary_threshold(pts, labels)
    b = train_binary_threshold(pts @ r.T, labels)
    assert np.allclose(b.axis, r @ a.axis)
    assert b.threshold == pytest.approx(a.threshold)
    probe = synthesize_labeled(default_blob_model(), 300, seed=17)[0]
    assert np.array_equal(a.classify(probe), b.classify(probe @ r.T))
    shifted = train_binary_threshold(pts + [3.0, -8.0], labels)
    assert np.array_equal(a.classify(probe), shifted.classify(probe + [3.0, -8.0]))


def test_binary_threshold_rejects_degenerate():
    with pytest.raises(ValueError):
        train_binary_threshold([[1, 1], [1, 1]], [0, 1])
    with pytest.raises(ValueError):
        train_binary_threshold([[1, 1]], [0])
    with pytest.raises(ValueError):
        BinaryThreshold([1.0, 1.0], 0.0)


def test_binary_fidelity_matches_erf():
    m = BlobModel([[0, 0], [2.5, 0.5], [4, 1]], [np.eye(2), [[1.2, 0.2], [0.2, 0.8]], np.eye(2)])
    cal, cal_labels = synthesize_labeled(m, 50000, seed=18)
    keep = cal_labels < 2
    th = train_binary_threshold(cal[keep], cal_labels[keep])
    n = 400000
    mc = [np.mean(th.classify(synthesize_shots(m, s, n, seed=19 + s)) == s) for s in (0, 1)]
    for s, sign in ((0, 1), (1, -1)):
        mean = m.means[s] @ th.axis
        sd = np.sqrt(th.axis @ m.covs[s] @ th.axis)
        z = sign * (th.threshold - mean) / sd
        exact = 1 - 0.5 * erfc(z / np.sqrt(2))
        assert mc[s] == pytest.approx(exact, rel=0.01)


def test_two_state_reads_as_one_on_binary_axis():
    m = default_blob_model()
    pts, labels = synthesize_labeled(m, 2000, seed=20)
    th = train_binary_threshold(pts[labels < 2], labels[labels < 2])
    assert np.mean(th.classify(synthesize_shots(m, 2, 5000, 21))) > 0.99


def test_shot_csv_roundtrip(tmp_path):
    pts, labels = synthesize_labeled(default_blob_model(), 5, seed=22)
    f = tmp_path / "shots.csv"
    write_shots_csv(f, pts, labels)
    got, got_labels = read_shots_csv(f, require_labels=True)
    assert np.allclose(got, pts, rtol=1e-11)
    assert np.array_equal(got_labels, labels)


@pytest.mark.parametrize(
    "text, line",
    [("i,q\n1,2\n3,x\n", 3), ("i,q,label\n1,2,0\n1,2\n", 3), ("a,b\n", 1), ("", 1)],
)
def test_shot_csv_errors_name_the_line(tmp_path, text, line):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(ShotFileError, match=f"line {line}"):
        read_shots_csv(f)
