#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "procaudit/matrix.hpp"

namespace procaudit {

// dense(hidden) -> dropout(d) -> dense(hidden) -> dropout(d) -> softmax(C).
// The binary and multiclass models are the same structure with different C.
struct NetworkConfig {
    std::size_t input_dim = 8;
    std::size_t hidden_dim = 512;
    double dropout_ratio = 0.2;
    std::size_t output_classes = 2;
    std::uint64_t seed = 1;

    // Throws ArgumentError when dims are zero, dropout_ratio is outside
    // [0, 1) or output_classes < 2.
    void validate() const;
};

struct NetworkParameters {
    Matrix w1; // input_dim x hidden_dim
    Vector b1; // hidden_dim
    Matrix w2; // hidden_dim x hidden_dim
    Vector b2; // hidden_dim
    Matrix w3; // hidden_dim x output_classes
    Vector b3; // output_classes

    static NetworkParameters shaped(const NetworkConfig& cfg);

    void zero();
    void scale(double factor);
    std::size_t count() const;
};

// Gradients share the parameter layout.
using Gradients = NetworkParameters;

// Flat layout (w1, b1, w2, b2, w3, b3 in row-major order) for the
// finite-difference oracle.
std::size_t parameter_count(const NetworkConfig& cfg);
std::vector<double> to_flat(const NetworkParameters& p);
void from_flat(std::span<const double> flat, NetworkParameters& p);

enum class RunMode { train, infer };

// Per-sample activations kept for backpropagation. Reused across samples to
// avoid reallocation; forward() resizes as needed.
struct ForwardCache {
    Vector input;      // input_dim
    Vector z1, h1;     // pre-activation / post relu+dropout, hidden_dim
    Vector drop1;      // realized dropout factor per unit: 0 or 1/(1-d)
    Vector z2, h2;     // second hidden layer
    Vector drop2;
    Vector logits;     // output_classes
    Vector probs;      // softmax(logits)
    bool trained = false; // filled by a train-mode forward
};

// Glorot-style uniform init: each weight matrix drawn from
// +-sqrt(6 / (fan_in + fan_out)), biases zero. Deterministic given cfg.seed.
NetworkParameters init(const NetworkConfig& cfg);

// Runs the network on one normalized feature vector. Train mode applies
// inverted dropout (each hidden unit zeroed with probability d, survivors
// scaled by 1/(1-d)) and fills the cache for backward(); infer mode applies
// no dropout and no scaling. rng is required only when mode == train and
// dropout_ratio > 0. Throws NumericError naming the layer on a non-finite
// intermediate.
void forward(const NetworkConfig& cfg, const NetworkParameters& params,
             std::span<const double> features, RunMode mode,
             std::mt19937_64* rng, ForwardCache& cache);

// Infer-mode probabilities; pure function of (params, features).
Vector predict_probs(const NetworkConfig& cfg, const NetworkParameters& params,
                     std::span<const double> features);

// Accumulates (+=) the exact gradients of cross_entropy(softmax(...)) at the
// cached activations into `grads`, respecting the realized dropout factors.
// Callers zero `grads` at batch boundaries. The cache must come from a
// train-mode forward (ArgumentError otherwise).
void backward(const NetworkConfig& cfg, const NetworkParameters& params,
              const ForwardCache& cache, std::size_t target_class,
              Gradients& grads);

// p <- p - lr * g, elementwise. Mini-batch gradients are averaged by the
// caller (Gradients::scale) before the step. Throws NumericError when an
// update goes non-finite.
void sgd_step(NetworkParameters& params, const Gradients& grads,
              double learning_rate);

enum class OptimizerKind { sgd, rmsprop };

// Plain gradient descent by default; an RMS-style adaptive mode (decay 0.9,
// epsilon 1e-8) is available for parity experiments.
class Optimizer {
public:
    explicit Optimizer(OptimizerKind kind) : kind_(kind) {}

    void apply(NetworkParameters& params, const Gradients& averaged,
               double learning_rate);

    OptimizerKind kind() const { return kind_; }

private:
    OptimizerKind kind_;
    Gradients sq_avg_;
    bool has_state_ = false;
};

OptimizerKind parse_optimizer(std::string_view name); // "sgd" | "rmsprop"
std::string_view optimizer_name(OptimizerKind kind);

} // namespace procaudit
