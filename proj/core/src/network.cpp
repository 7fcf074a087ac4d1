#include "procaudit/network.hpp"

#include <cmath>
#include <cstring>

#include "procaudit/errors.hpp"
#include "procaudit/math.hpp"
#include "procaudit/rng.hpp"

namespace procaudit {

namespace {

void check_finite(const Vector& v, const char* layer) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (!std::isfinite(sum)) {
        throw NumericError(std::string("forward: non-finite activation in ") +
                           layer);
    }
}

// z = b + x * W, with W laid out fan_in x fan_out.
void affine(std::span<const double> x, const Matrix& w, const Vector& b,
            Vector& z) {
    const std::size_t in = w.rows;
    const std::size_t out = w.cols;
    z.assign(b.begin(), b.end());
    for (std::size_t i = 0; i < in; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* wrow = &w.data[i * out];
        for (std::size_t j = 0; j < out; ++j) z[j] += xi * wrow[j];
    }
}

// Applies relu then inverted dropout in one pass, recording the realized
// factor per unit (0 for dropped, 1/(1-d) for kept, 1 when d == 0 or in
// infer mode).
void relu_dropout(const Vector& z, double dropout_ratio, RunMode mode,
                  std::mt19937_64* rng, Vector& h, Vector& drop) {
    const std::size_t n = z.size();
    h.resize(n);
    drop.resize(n);
    if (mode == RunMode::train && dropout_ratio > 0.0) {
        const double keep_scale = 1.0 / (1.0 - dropout_ratio);
        for (std::size_t j = 0; j < n; ++j) {
            const double factor =
                unit_uniform(*rng) < dropout_ratio ? 0.0 : keep_scale;
            drop[j] = factor;
            h[j] = z[j] > 0.0 ? z[j] * factor : 0.0;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            drop[j] = 1.0;
            h[j] = z[j] > 0.0 ? z[j] : 0.0;
        }
    }
}

void fill_glorot(Matrix& w, std::mt19937_64& rng) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& x : w.data) x = uniform_in(rng, -limit, limit);
}

void step_array(std::vector<double>& p, const std::vector<double>& g,
                double lr) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] -= lr * g[i];
        sum += p[i];
    }
    if (!std::isfinite(sum)) {
        throw NumericError("sgd_step: parameter update went non-finite");
    }
}

void rms_step_array(std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& s, double lr) {
    constexpr double kDecay = 0.9;
    constexpr double kEps = 1e-8;
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s[i] = kDecay * s[i] + (1.0 - kDecay) * g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(s[i]) + kEps);
        sum += p[i];
    }
    if (!std::isfinite(sum)) {
        throw NumericError("rmsprop: parameter update went non-finite");
    }
}

} // namespace

void NetworkConfig::validate() const {
    if (input_dim == 0 || hidden_dim == 0) {
        throw ArgumentError("network: input_dim and hidden_dim must be > 0");
    }
    if (output_classes < 2) {
        throw ArgumentError("network: output_classes must be >= 2");
    }
    if (!(dropout_ratio >= 0.0 && dropout_ratio < 1.0)) {
        throw ArgumentError("network: dropout_ratio must be in [0, 1)");
    }
}

NetworkParameters NetworkParameters::shaped(const NetworkConfig& cfg) {
    NetworkParameters p;
    p.w1 = Matrix(cfg.input_dim, cfg.hidden_dim);
    p.b1.assign(cfg.hidden_dim, 0.0);
    p.w2 = Matrix(cfg.hidden_dim, cfg.hidden_dim);
    p.b2.assign(cfg.hidden_dim, 0.0);
    p.w3 = Matrix(cfg.hidden_dim, cfg.output_classes);
    p.b3.assign(cfg.output_classes, 0.0);
    return p;
}

void NetworkParameters::zero() {
    auto clear = [](std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
    };
    clear(w1.data);
    clear(b1);
    clear(w2.data);
    clear(b2);
    clear(w3.data);
    clear(b3);
}

void NetworkParameters::scale(double factor) {
    auto mul = [factor](std::vector<double>& v) {
        for (double& x : v) x *= factor;
    };
    mul(w1.data);
    mul(b1);
    mul(w2.data);
    mul(b2);
    mul(w3.data);
    mul(b3);
}

std::size_t NetworkParameters::count() const {
    return w1.data.size() + b1.size() + w2.data.size() + b2.size() +
           w3.data.size() + b3.size();
}

std::size_t parameter_count(const NetworkConfig& cfg) {
    return cfg.input_dim * cfg.hidden_dim + cfg.hidden_dim +
           cfg.hidden_dim * cfg.hidden_dim + cfg.hidden_dim +
           cfg.hidden_dim * cfg.output_classes + cfg.output_classes;
}

std::vector<double> to_flat(const NetworkParameters& p) {
    std::vector<double> flat;
    flat.reserve(p.count());
    for (const auto* v : {&p.w1.data, &p.b1, &p.w2.data, &p.b2, &p.w3.data,
                          &p.b3}) {
        flat.insert(flat.end(), v->begin(), v->end());
    }
    return flat;
}

void from_flat(std::span<const double> flat, NetworkParameters& p) {
    if (flat.size() != p.count()) {
        throw ShapeError("from_flat: expected " + std::to_string(p.count()) +
                         " values, got " + std::to_string(flat.size()));
    }
    std::size_t off = 0;
    for (auto* v : {&p.w1.data, &p.b1, &p.w2.data, &p.b2, &p.w3.data, &p.b3}) {
        std::memcpy(v->data(), flat.data() + off, v->size() * sizeof(double));
        off += v->size();
    }
}

NetworkParameters init(const NetworkConfig& cfg) {
    cfg.validate();
    NetworkParameters p = NetworkParameters::shaped(cfg);
    std::mt19937_64 rng(cfg.seed);
    fill_glorot(p.w1, rng);
    fill_glorot(p.w2, rng);
    fill_glorot(p.w3, rng);
    return p;
}

void forward(const NetworkConfig& cfg, const NetworkParameters& params,
             std::span<const double> features, RunMode mode,
             std::mt19937_64* rng, ForwardCache& cache) {
    if (features.size() != cfg.input_dim) {
        throw ShapeError("forward: expected " +
                         std::to_string(cfg.input_dim) + " features, got " +
                         std::to_string(features.size()));
    }
    if (mode == RunMode::train && cfg.dropout_ratio > 0.0 && rng == nullptr) {
        throw ArgumentError("forward: train mode with dropout needs an rng");
    }
    cache.input.assign(features.begin(), features.end());
    affine(features, params.w1, params.b1, cache.z1);
    check_finite(cache.z1, "dense1");
    relu_dropout(cache.z1, cfg.dropout_ratio, mode, rng, cache.h1,
                 cache.drop1);
    affine(cache.h1, params.w2, params.b2, cache.z2);
    check_finite(cache.z2, "dense2");
    relu_dropout(cache.z2, cfg.dropout_ratio, mode, rng, cache.h2,
                 cache.drop2);
    affine(cache.h2, params.w3, params.b3, cache.logits);
    check_finite(cache.logits, "output");
    cache.probs = softmax(cache.logits);
    cache.trained = (mode == RunMode::train);
}

Vector predict_probs(const NetworkConfig& cfg, const NetworkParameters& params,
                     std::span<const double> features) {
    ForwardCache cache;
    forward(cfg, params, features, RunMode::infer, nullptr, cache);
    return cache.probs;
}

void backward(const NetworkConfig& cfg, const NetworkParameters& params,
              const ForwardCache& cache, std::size_t target_class,
              Gradients& grads) {
    if (!cache.trained) {
        throw ArgumentError(
            "backward: cache was not produced by a train-mode forward");
    }
    if (target_class >= cfg.output_classes) {
        throw ArgumentError("backward: target class " +
                            std::to_string(target_class) + " out of range");
    }
    const std::size_t in = cfg.input_dim;
    const std::size_t hid = cfg.hidden_dim;
    const std::size_t out = cfg.output_classes;
    if (cache.input.size() != in || cache.h1.size() != hid ||
        cache.probs.size() != out) {
        throw ShapeError("backward: cache shape does not match the config");
    }

    // Softmax + cross-entropy collapse to dlogits = probs - onehot(target).
    Vector dlogits = cache.probs;
    dlogits[target_class] -= 1.0;

    for (std::size_t j = 0; j < out; ++j) grads.b3[j] += dlogits[j];
    Vector dh2(hid, 0.0);
    for (std::size_t i = 0; i < hid; ++i) {
        const double hi = cache.h2[i];
        const double* wrow = &params.w3.data[i * out];
        double* grow = &grads.w3.data[i * out];
        double acc = 0.0;
        for (std::size_t j = 0; j < out; ++j) {
            grow[j] += hi * dlogits[j];
            acc += wrow[j] * dlogits[j];
        }
        dh2[i] = acc;
    }

    // Through dropout (multiply by the realized factor) then relu
    // (zero where the pre-activation was <= 0).
    Vector dz2(hid);
    for (std::size_t i = 0; i < hid; ++i) {
        dz2[i] = cache.z2[i] > 0.0 ? dh2[i] * cache.drop2[i] : 0.0;
    }

    for (std::size_t j = 0; j < hid; ++j) grads.b2[j] += dz2[j];
    Vector dh1(hid, 0.0);
    for (std::size_t i = 0; i < hid; ++i) {
        const double hi = cache.h1[i];
        const double* wrow = &params.w2.data[i * hid];
        double* grow = &grads.w2.data[i * hid];
        double acc = 0.0;
        for (std::size_t j = 0; j < hid; ++j) {
            grow[j] += hi * dz2[j];
            acc += wrow[j] * dz2[j];
        }
        dh1[i] = acc;
    }

    Vector dz1(hid);
    for (std::size_t i = 0; i < hid; ++i) {
        dz1[i] = cache.z1[i] > 0.0 ? dh1[i] * cache.drop1[i] : 0.0;
    }

    for (std::size_t j = 0; j < hid; ++j) grads.b1[j] += dz1[j];
    for (std::size_t i = 0; i < in; ++i) {
        const double xi = cache.input[i];
        if (xi == 0.0) continue;
        double* grow = &grads.w1.data[i * hid];
        for (std::size_t j = 0; j < hid; ++j) grow[j] += xi * dz1[j];
    }
}

void sgd_step(NetworkParameters& params, const Gradients& grads,
              double learning_rate) {
    step_array(params.w1.data, grads.w1.data, learning_rate);
    step_array(params.b1, grads.b1, learning_rate);
    step_array(params.w2.data, grads.w2.data, learning_rate);
    step_array(params.b2, grads.b2, learning_rate);
    step_array(params.w3.data, grads.w3.data, learning_rate);
    step_array(params.b3, grads.b3, learning_rate);
}

void Optimizer::apply(NetworkParameters& params, const Gradients& averaged,
                      double learning_rate) {
    if (kind_ == OptimizerKind::sgd) {
        sgd_step(params, averaged, learning_rate);
        return;
    }
    if (!has_state_) {
        sq_avg_ = params;
        sq_avg_.zero();
        has_state_ = true;
    }
    rms_step_array(params.w1.data, averaged.w1.data, sq_avg_.w1.data,
                   learning_rate);
    rms_step_array(params.b1, averaged.b1, sq_avg_.b1, learning_rate);
    rms_step_array(params.w2.data, averaged.w2.data, sq_avg_.w2.data,
                   learning_rate);
    rms_step_array(params.b2, averaged.b2, sq_avg_.b2, learning_rate);
    rms_step_array(params.w3.data, averaged.w3.data, sq_avg_.w3.data,
                   learning_rate);
    rms_step_array(params.b3, averaged.b3, sq_avg_.b3, learning_rate);
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "rmsprop") return OptimizerKind::rmsprop;
    throw ArgumentError("unknown optimizer '" + std::string(name) +
                        "' (expected sgd or rmsprop)");
}

std::string_view optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::sgd ? "sgd" : "rmsprop";
}

} // namespace procaudit
