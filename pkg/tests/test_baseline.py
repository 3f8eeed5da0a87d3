import numpy as np
import pytest

from odlae.baseline import LinearBaseline
from odlae.errors import InvalidInputError
from odlae.evaluate import prequential_run
from odlae.streams import GaussianStream


def separable_stream(n=5000, seed=11):
    return GaussianStream(np.array([[0.2, 0.2], [0.8, 0.8]]), 0.05, n, seed=seed)


class TestLinearBaseline:
    def test_learns_a_separable_stream(self):
        report, _ = prequential_run(separable_stream(), LinearBaseline(2, 2, lr=0.1), window=1000, class_count=2)
        assert report.window_accuracy[-1][1] >= 0.95

    def test_zero_learning_rate_freezes_the_model(self):
        model = LinearBaseline(2, 2, lr=0.0)
        report, _ = prequential_run(separable_stream(2000), model, window=1000, class_count=2)
        # zero init always predicts class 0 (ties break to the lowest index)
        assert not model.weight.any()
        rng_labels = [ex.y for ex in separable_stream(2000)]
        assert report.accuracy == pytest.approx(rng_labels.count(0) / 2000)

    def test_seeded_determinism(self):
        def run():
            model = LinearBaseline(2, 2, lr=0.05)
            report, _ = prequential_run(separable_stream(500), model, window=100, class_count=2)
            return report.accuracy, model.weight.copy(), model.bias.copy()

        acc_a, w_a, b_a = run()
        acc_b, w_b, b_b = run()
        assert acc_a == acc_b
        np.testing.assert_array_equal(w_a, w_b)
        np.testing.assert_array_equal(b_a, b_b)

    def test_label_out_of_range(self):
        with pytest.raises(InvalidInputError):
            LinearBaseline(2, 2).step(np.zeros(2), 2)

    def test_gradient_direction(self):
        model = LinearBaseline(2, 2, lr=1.0)
        x = np.array([1.0, 0.0])
        model.step(x, 0)
        # after seeing class 0, its logit on the same input must lead
        probs = model.predict_proba(x)
        assert probs[0] > probs[1]
