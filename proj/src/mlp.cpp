#include "cphs/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cphs/rng.hpp"
#include "cphs/text.hpp"

namespace cphs {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    throw std::logic_error("unreachable activation");
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "tanh") return Activation::Tanh;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

namespace {

double apply(Activation a, double x) {
    switch (a) {
        case Activation::Linear: return x;
        case Activation::Tanh: return std::tanh(x);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    throw std::logic_error("unreachable activation");
}

// Derivative expressed through the activation value, not the pre-activation.
double derivative_from_value(Activation a, double y) {
    switch (a) {
        case Activation::Linear: return 1.0;
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Sigmoid: return y * (1.0 - y);
    }
    throw std::logic_error("unreachable activation");
}

}  // namespace

Mlp Mlp::create(const std::vector<std::size_t>& sizes,
                const std::vector<Activation>& acts) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least input and output layers");
    if (acts.size() != sizes.size() - 1)
        throw std::invalid_argument("mlp needs one activation per non-input layer");
    for (std::size_t s : sizes)
        if (s == 0) throw std::invalid_argument("mlp layer sizes must be positive");
    Mlp net;
    net.layer_sizes = sizes;
    net.activations = acts;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        net.weights.emplace_back(sizes[l] * sizes[l + 1], 0.0);
        net.biases.emplace_back(sizes[l + 1], 0.0);
    }
    return net;
}

void Mlp::init_random(Rng& rng) {
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        double r = std::sqrt(6.0 / double(layer_sizes[l] + layer_sizes[l + 1]));
        for (double& w : weights[l]) w = rng.uniform(-r, r);
        for (double& b : biases[l]) b = 0.0;
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += weights[l].size() + biases[l].size();
    return n;
}

void Mlp::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp needs at least two layers");
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size() ||
        activations.size() != weights.size())
        throw std::invalid_argument("mlp layer bookkeeping is inconsistent");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].size() != layer_sizes[l] * layer_sizes[l + 1])
            throw std::invalid_argument("mlp weight matrix has wrong shape");
        if (biases[l].size() != layer_sizes[l + 1])
            throw std::invalid_argument("mlp bias vector has wrong shape");
    }
}

namespace {

// Forward pass keeping every layer's activation values for backprop.
std::vector<std::vector<double>> forward_trace(const Mlp& net,
                                               const std::vector<double>& input) {
    if (input.size() != net.input_size())
        throw std::invalid_argument("mlp input has wrong dimension");
    std::vector<std::vector<double>> values;
    values.reserve(net.layer_sizes.size());
    values.push_back(input);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const std::vector<double>& prev = values.back();
        std::size_t in = net.layer_sizes[l];
        std::size_t out = net.layer_sizes[l + 1];
        std::vector<double> next(out);
        for (std::size_t j = 0; j < out; ++j) {
            double z = net.biases[l][j];
            const double* row = net.weights[l].data() + j * in;
            for (std::size_t i = 0; i < in; ++i) z += row[i] * prev[i];
            next[j] = apply(net.activations[l], z);
        }
        values.push_back(std::move(next));
    }
    return values;
}

}  // namespace

std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input) {
    return forward_trace(net, input).back();
}

MlpGradient mlp_gradient(const Mlp& net, const std::vector<double>& input,
                         const std::vector<double>& output_grad) {
    if (output_grad.size() != net.output_size())
        throw std::invalid_argument("output gradient has wrong dimension");
    auto values = forward_trace(net, input);

    MlpGradient g;
    g.weight_grads.resize(net.weights.size());
    g.bias_grads.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weight_grads[l].assign(net.weights[l].size(), 0.0);
        g.bias_grads[l].assign(net.biases[l].size(), 0.0);
    }

    std::vector<double> delta = output_grad;
    for (std::size_t l = net.weights.size(); l-- > 0;) {
        std::size_t in = net.layer_sizes[l];
        std::size_t out = net.layer_sizes[l + 1];
        const std::vector<double>& layer_out = values[l + 1];
        const std::vector<double>& layer_in = values[l];
        // delta currently holds d(loss)/d(activation of layer l+1).
        for (std::size_t j = 0; j < out; ++j)
            delta[j] *= derivative_from_value(net.activations[l], layer_out[j]);
        for (std::size_t j = 0; j < out; ++j) {
            double* wrow = g.weight_grads[l].data() + j * in;
            for (std::size_t i = 0; i < in; ++i) wrow[i] = delta[j] * layer_in[i];
            g.bias_grads[l][j] = delta[j];
        }
        std::vector<double> prev_delta(in, 0.0);
        for (std::size_t j = 0; j < out; ++j) {
            const double* row = net.weights[l].data() + j * in;
            for (std::size_t i = 0; i < in; ++i) prev_delta[i] += row[i] * delta[j];
        }
        delta = std::move(prev_delta);
    }
    g.input_grad = std::move(delta);
    return g;
}

void sgd_step(Mlp& net, const MlpGradient& grad, double learning_rate) {
    if (grad.weight_grads.size() != net.weights.size())
        throw std::invalid_argument("gradient does not match network shape");
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t k = 0; k < net.weights[l].size(); ++k)
            net.weights[l][k] -= learning_rate * grad.weight_grads[l][k];
        for (std::size_t k = 0; k < net.biases[l].size(); ++k)
            net.biases[l][k] -= learning_rate * grad.bias_grads[l][k];
    }
}

void write_mlp(std::ostream& os, const Mlp& net) {
    os << "mlp " << net.layer_sizes.size() << "\n";
    for (std::size_t i = 0; i < net.layer_sizes.size(); ++i)
        os << (i ? " " : "") << net.layer_sizes[i];
    os << "\n";
    for (std::size_t l = 0; l < net.activations.size(); ++l)
        os << (l ? " " : "") << to_string(net.activations[l]);
    os << "\n";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t k = 0; k < net.weights[l].size(); ++k)
            os << (k ? " " : "") << fmt_double(net.weights[l][k]);
        os << "\n";
        for (std::size_t k = 0; k < net.biases[l].size(); ++k)
            os << (k ? " " : "") << fmt_double(net.biases[l][k]);
        os << "\n";
    }
}

Mlp read_mlp(std::istream& is) {
    std::string tag;
    std::size_t layers = 0;
    if (!(is >> tag >> layers) || tag != "mlp")
        throw std::runtime_error("not an mlp file");
    if (layers < 2) throw std::runtime_error("mlp file has too few layers");
    std::vector<std::size_t> sizes(layers);
    for (std::size_t& s : sizes)
        if (!(is >> s)) throw std::runtime_error("mlp file truncated in layer sizes");
    std::vector<Activation> acts(layers - 1);
    for (Activation& a : acts) {
        std::string name;
        if (!(is >> name)) throw std::runtime_error("mlp file truncated in activations");
        a = activation_from_string(name);
    }
    Mlp net = Mlp::create(sizes, acts);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (double& w : net.weights[l])
            if (!(is >> w)) throw std::runtime_error("mlp file truncated in weights");
        for (double& b : net.biases[l])
            if (!(is >> b)) throw std::runtime_error("mlp file truncated in biases");
    }
    return net;
}

}  // namespace cphs
