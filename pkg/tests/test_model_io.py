import random
from fractions import Fraction

import pytest

from exactnn import model_io
from exactnn.layers import (
    Convolution,
    Flatten,
    FullyConnected,
    LINEAR,
    MaxPool,
    Network,
    RELU,
    Tensor,
    run,
)
from exactnn.matrix import Matrix
from exactnn.model_io import (
    ModelFormatError,
    PruneParams,
    QuantizationParams,
    dequantize_outputs,
    nonzero_fc_weights,
    prune,
    quantization_error_bound,
    quantize,
    round_half_away_from_zero,
    weighted_depth,
)
from exactnn.verifier.generators import random_fc_network, random_toy_cnn


def small_cnn():
    return Network(
        layers=(
            Convolution(
                filters=(
                    (Matrix.from_rows([[Fraction(1, 2), 0], [0, 1]]),),
                    (Matrix.from_rows([[0, 1], [1, 0]]),),
                ),
                activation=RELU,
            ),
            MaxPool(size=(2, 2)),
            Flatten(),
            FullyConnected(
                weights=Matrix.from_rows(
                    [[Fraction(2687, 50000)] + [Fraction(i - 16, 8) for i in range(32)],
                     [0] + [Fraction(1, 3)] * 32]
                ),
                activation=LINEAR,
            ),
        ),
        input_shape=(9, 9, 1),
        dtype="rational",
    )


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path, rng):
        net = small_cnn()
        path = tmp_path / "m.json"
        model_io.save(net, path)
        loaded = model_io.load(path)
        assert loaded.input_shape == net.input_shape
        assert loaded.dtype == net.dtype
        assert loaded.layers == net.layers

    def test_save_is_canonical(self, tmp_path):
        net = small_cnn()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        model_io.save(net, p1)
        model_io.save(model_io.load(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_decimal_weight_parses_to_reduced_fraction(self, tmp_path):
        net = small_cnn()
        path = tmp_path / "m.json"
        model_io.save(net, path)
        loaded = model_io.load(path)
        assert loaded.layers[3].weights.get(0, 0) == Fraction(2687, 50000)

    def test_random_fc_round_trip(self, tmp_path, rng):
        net = random_fc_network(rng, 4, [3, 2])
        path = tmp_path / "fc.json"
        model_io.save(net, path)
        assert model_io.load(path).layers == net.layers

    def test_ragged_fc_rows_rejected_with_layer_index(self, tmp_path):
        doc = {
            "format_version": 1,
            "dtype": "rational",
            "input_shape": [2],
            "layers": [
                {"type": "fc", "activation": "relu", "weights": [["1", "2", "3"], ["1", "2", "3", "4"]]}
            ],
        }
        with pytest.raises((ModelFormatError, ValueError)) as err:
            model_io.network_from_document(doc)
        assert "layer" in str(err.value)

    def test_shape_error_names_layer(self):
        doc = {
            "format_version": 1,
            "dtype": "rational",
            "input_shape": [2],
            "layers": [
                {"type": "fc", "activation": "relu", "weights": [["1", "2", "3"]]},
                {"type": "fc", "activation": "relu", "weights": [["1", "2", "3"]]},
            ],
        }
        with pytest.raises(Exception) as err:
            model_io.network_from_document(doc)
        assert "layer[1]" in str(err.value)

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\n not json")
        with pytest.raises(ModelFormatError) as err:
            model_io.load(path)
        assert "line" in str(err.value)


class TestRounding:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (0, 0),
            (Fraction(1, 2), 1),
            (Fraction(-1, 2), -1),
            (Fraction(5, 2), 3),
            (Fraction(-5, 2), -3),
            (Fraction(687872, 50000), 14),  # 2687/50000 * 2^8
            (Fraction(7, 3), 2),
        ],
    )
    def test_half_away_from_zero(self, value, expected):
        assert round_half_away_from_zero(value) == expected


class TestQuantize:
    def test_zero_stays_zero(self):
        net = random_fc_network(random.Random(1), 2, [2], sampler=lambda r: 0)
        q = quantize(net, QuantizationParams(scale_bits=4))
        assert all(
            v == 0
            for layer in q.layers
            for i in range(layer.weights.rows)
            for v in layer.weights.row(i)
        )

    def test_exact_scale(self):
        layer = FullyConnected(
            weights=Matrix.from_rows([[0, Fraction(1, 2)]]), activation=LINEAR
        )
        net = Network(layers=(layer,), input_shape=(1,))
        q = quantize(net, QuantizationParams(scale_bits=1))
        assert q.layers[0].weights.row(0) == [0, 1]
        assert q.dtype == "int"

    def test_paper_weight_at_scale_8(self):
        layer = FullyConnected(
            weights=Matrix.from_rows([[0, Fraction(2687, 50000)]]), activation=LINEAR
        )
        net = Network(layers=(layer,), input_shape=(1,))
        q = quantize(net, QuantizationParams(scale_bits=8))
        assert q.layers[0].weights.row(0) == [0, 14]

    def test_requires_rational_network(self):
        net = Network(
            layers=(FullyConnected(weights=Matrix.from_rows([[0, 1]]), activation=LINEAR),),
            input_shape=(1,),
            dtype="int",
        )
        with pytest.raises(ValueError):
            quantize(net, QuantizationParams(scale_bits=2))

    def test_error_bound_holds_on_sampled_inputs(self, rng):
        params = QuantizationParams(scale_bits=6)
        for _ in range(3):
            net = random_toy_cnn(rng)
            q = quantize(net, params)
            depth = weighted_depth(net)
            bounds = quantization_error_bound(net, params, (0, 1))
            for _ in range(40):
                image = Tensor.image(
                    [Matrix.from_rows([[rng.randint(0, 1) for _ in range(9)] for _ in range(9)])]
                )
                exact = run(net, image)
                approx = dequantize_outputs(run(q, image), params, depth)
                for a, e, b in zip(approx, exact, bounds):
                    assert abs(a - e) <= b

    def test_error_bound_holds_for_deep_fc(self, rng):
        params = QuantizationParams(scale_bits=5)
        net = random_fc_network(
            rng, 3, [4, 3, 2], sampler=lambda r: Fraction(r.randint(-8, 8), 8)
        )
        q = quantize(net, params)
        depth = weighted_depth(net)
        bounds = quantization_error_bound(net, params, (0, 3))
        for _ in range(100):
            x = [rng.randint(0, 3) for _ in range(3)]
            exact = run(net, x)
            approx = dequantize_outputs(run(q, x), params, depth)
            for a, e, b in zip(approx, exact, bounds):
                assert abs(a - e) <= b


class TestPrune:
    def _one_layer(self, weights):
        layer = FullyConnected(
            weights=Matrix.from_rows([[9] + weights]), activation=LINEAR
        )
        return Network(layers=(layer,), input_shape=(len(weights),))

    def test_density_one_keeps_everything(self):
        net = self._one_layer([5, -3, 1, 0])
        out = prune(net, PruneParams(target_density=1))
        assert out.layers[0].weights.row(0) == [9, 5, -3, 1, 0]

    def test_sort_by_magnitude(self):
        net = self._one_layer([5, -3, 1, 0])
        out = prune(net, PruneParams(target_density=Fraction(1, 2)))
        assert out.layers[0].weights.row(0) == [9, 5, -3, 0, 0]

    def test_biases_exempt(self):
        net = self._one_layer([5, -3, 1, 0])
        out = prune(net, PruneParams(target_density=Fraction(1, 4)))
        assert out.layers[0].weights.row(0) == [9, 5, 0, 0, 0]

    def test_exact_count_on_100_weights(self, rng):
        weights = [Fraction(rng.randint(1, 1000), 7) for _ in range(100)]
        net = self._one_layer(weights)
        out = prune(net, PruneParams(target_density=Fraction(1, 10)))
        assert nonzero_fc_weights(out) == 10

    def test_tie_break_keeps_earlier_entries(self):
        net = self._one_layer([2, -2, 2, 2])
        out = prune(net, PruneParams(target_density=Fraction(1, 2)))
        assert out.layers[0].weights.row(0) == [9, 2, -2, 0, 0]

    def test_pruned_matches_original_on_zero_input(self, rng):
        # single layer: every pruned weight multiplies a zero input
        net = random_fc_network(rng, 4, [3])
        out = prune(net, PruneParams(target_density=Fraction(1, 5)))
        zeros = [0, 0, 0, 0]
        assert run(out, zeros) == run(net, zeros)

    def test_pruned_weights_go_sparse(self, rng):
        net = random_fc_network(rng, 4, [3])
        out = prune(net, PruneParams(target_density=Fraction(1, 2)))
        assert out.layers[0].weights.representation == "sparse"
