#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace cphs {

enum class Activation { Linear, Tanh, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Fully connected feed-forward net. Weights are stored per layer in
// row-major order: weights[l][j * in + i] multiplies input i into unit j.
struct Mlp {
    std::vector<std::size_t> layer_sizes;  // includes input layer
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<Activation> activations;  // one per non-input layer

    static Mlp create(const std::vector<std::size_t>& sizes,
                      const std::vector<Activation>& acts);

    // He-style uniform init: U(-r, r) with r = sqrt(6 / (in + out)).
    void init_random(class Rng& rng);

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
    void validate() const;
};

std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input);

// Gradients of a scalar function of the outputs, given d(loss)/d(output).
struct MlpGradient {
    std::vector<std::vector<double>> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    std::vector<double> input_grad;
};

MlpGradient mlp_gradient(const Mlp& net, const std::vector<double>& input,
                         const std::vector<double>& output_grad);

void sgd_step(Mlp& net, const MlpGradient& grad, double learning_rate);

void write_mlp(std::ostream& os, const Mlp& net);
Mlp read_mlp(std::istream& is);

}  // namespace cphs
