#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/dataset.hpp"
#include "thermocast/rng.hpp"

namespace thermocast {

// Elman cell over scalar inputs:
//   a_t = w_ih * x_t + w_hh * h_{t-1} + b_h
//   h_t = relu(a_t)                     (carried to step t+1)
//   y_t = w_ho * (mask_t ⊙ h_t) + b_o
// with h_0 = 0 and mask_t an inverted-dropout mask (all ones in eval mode).
// The mask gates only the readout path; the recurrent state stays clean, so
// an autoregressive rollout sees the same dynamics the cell was trained on.
struct RnnParams {
    int hidden_size = 100;
    Eigen::VectorXd w_ih;     // H x 1
    Eigen::MatrixXd w_hh;     // H x H
    Eigen::RowVectorXd w_ho;  // 1 x H
    Eigen::VectorXd b_h;      // H
    double b_o = 0.0;
};

struct Gradients {
    Eigen::VectorXd w_ih;
    Eigen::MatrixXd w_hh;
    Eigen::RowVectorXd w_ho;
    Eigen::VectorXd b_h;
    double b_o = 0.0;
};

// Training hyperparameters. The loss is fixed to mean squared error.
struct TrainConfig {
    int hidden_size = 100;
    double learning_rate = 1e-3;
    double dropout_keep_prob = 0.5;
    int epochs = 1000;
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden_size < 1) detail::fail("hidden_size must be >= 1, got ", hidden_size);
        if (!(learning_rate > 0.0)) detail::fail("learning_rate must be > 0, got ", fmt_double(learning_rate));
        if (!(dropout_keep_prob > 0.0 && dropout_keep_prob <= 1.0))
            detail::fail("dropout_keep_prob must lie in (0, 1], got ", fmt_double(dropout_keep_prob));
        if (epochs < 1) detail::fail("epochs must be >= 1, got ", epochs);
    }
};

enum class Mode { train, eval };

// Everything BPTT needs to replay the pass: inputs, pre-activations a_t,
// hidden states h_0..h_T, the sampled masks, and the outputs.
struct ForwardTrace {
    std::vector<double> inputs;                    // x_1..x_T
    std::vector<Eigen::VectorXd> pre_activations;  // a_1..a_T
    std::vector<Eigen::VectorXd> hidden_states;    // h_0..h_T (T+1 entries)
    std::vector<Eigen::VectorXd> dropout_masks;    // entries are 0 or 1/keep_prob
    std::vector<double> outputs;                   // y_1..y_T
};

// Uniform Xavier-style init: each matrix drawn from [-s, s] with
// s = sqrt(6 / (fan_in + fan_out)); biases zero. Deterministic in the seed.
inline RnnParams init_params(std::uint64_t seed, int hidden_size) {
    if (hidden_size < 1) detail::fail("hidden_size must be >= 1, got ", hidden_size);
    SeededRng rng(seed);
    const int h = hidden_size;
    RnnParams p;
    p.hidden_size = h;
    p.w_ih.resize(h);
    p.w_hh.resize(h, h);
    p.w_ho.resize(h);
    p.b_h = Eigen::VectorXd::Zero(h);
    p.b_o = 0.0;
    const double s_ih = std::sqrt(6.0 / (1.0 + h));
    const double s_hh = std::sqrt(6.0 / (h + h));
    const double s_ho = std::sqrt(6.0 / (h + 1.0));
    for (int i = 0; i < h; ++i) p.w_ih(i) = rng.uniform(-s_ih, s_ih);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < h; ++c) p.w_hh(r, c) = rng.uniform(-s_hh, s_hh);
    for (int i = 0; i < h; ++i) p.w_ho(i) = rng.uniform(-s_ho, s_ho);
    return p;
}

inline ForwardTrace forward(const RnnParams& p, std::span<const double> inputs, double keep_prob, Mode mode,
                            SeededRng* rng = nullptr) {
    if (inputs.empty()) detail::fail("forward: empty input sequence");
    if (!(keep_prob > 0.0 && keep_prob <= 1.0))
        detail::fail("forward: keep_prob must lie in (0, 1], got ", fmt_double(keep_prob));
    if (p.w_ih.size() != p.hidden_size || p.w_hh.rows() != p.hidden_size || p.w_hh.cols() != p.hidden_size ||
        p.w_ho.size() != p.hidden_size || p.b_h.size() != p.hidden_size)
        detail::fail("forward: parameter shapes inconsistent with hidden_size ", p.hidden_size);
    const bool sample_masks = mode == Mode::train && keep_prob < 1.0;
    if (sample_masks && rng == nullptr) detail::fail("forward: train mode needs an rng for dropout masks");

    const std::size_t steps = inputs.size();
    const int h = p.hidden_size;
    ForwardTrace trace;
    trace.inputs.assign(inputs.begin(), inputs.end());
    trace.pre_activations.reserve(steps);
    trace.hidden_states.reserve(steps + 1);
    trace.dropout_masks.reserve(steps);
    trace.outputs.reserve(steps);
    trace.hidden_states.push_back(Eigen::VectorXd::Zero(h));

    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::VectorXd a = p.w_ih * inputs[t] + p.w_hh * trace.hidden_states.back() + p.b_h;
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(h);
        if (sample_masks) {
            const double survivor = 1.0 / keep_prob;
            for (int j = 0; j < h; ++j) mask(j) = rng->uniform01() < keep_prob ? survivor : 0.0;
        }
        Eigen::VectorXd hidden = a.cwiseMax(0.0);
        trace.outputs.push_back(p.w_ho.dot(mask.cwiseProduct(hidden)) + p.b_o);
        trace.pre_activations.push_back(std::move(a));
        trace.dropout_masks.push_back(std::move(mask));
        trace.hidden_states.push_back(std::move(hidden));
    }
    return trace;
}

inline ForwardTrace forward_eval(const RnnParams& p, std::span<const double> inputs) {
    return forward(p, inputs, 1.0, Mode::eval);
}

inline double mse_loss(std::span<const double> outputs, std::span<const double> targets) {
    if (outputs.size() != targets.size())
        detail::fail("mse_loss: length mismatch, ", outputs.size(), " outputs vs ", targets.size(), " targets");
    if (outputs.empty()) detail::fail("mse_loss: empty sequences");
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double d = outputs[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(outputs.size());
}

// Exact gradient of mse_loss(outputs, targets) with respect to every
// parameter, unrolled over all timesteps. ReLU subgradient at 0 is 0; the
// stored dropout masks gate the backward path exactly as they gated the
// forward one.
inline Gradients bptt(const RnnParams& p, const ForwardTrace& trace, std::span<const double> targets) {
    const std::size_t steps = trace.outputs.size();
    const int h = p.hidden_size;
    if (steps == 0) detail::fail("bptt: empty trace");
    if (targets.size() != steps)
        detail::fail("bptt: ", targets.size(), " targets for ", steps, " outputs");
    const bool trace_consistent = trace.hidden_states.size() == steps + 1 &&
                                  trace.pre_activations.size() == steps &&
                                  trace.dropout_masks.size() == steps && trace.inputs.size() == steps;
    if (!trace_consistent) detail::fail("bptt: trace is internally inconsistent");
    if (trace.hidden_states.front().size() != h || p.w_hh.rows() != h || p.w_hh.cols() != h ||
        p.w_ih.size() != h || p.w_ho.size() != h || p.b_h.size() != h)
        detail::fail("bptt: shape mismatch between params and trace");

    Gradients g;
    g.w_ih = Eigen::VectorXd::Zero(h);
    g.w_hh = Eigen::MatrixXd::Zero(h, h);
    g.w_ho = Eigen::RowVectorXd::Zero(h);
    g.b_h = Eigen::VectorXd::Zero(h);
    g.b_o = 0.0;

    Eigen::VectorXd carry = Eigen::VectorXd::Zero(h);  // dL/dh_t from steps after t
    for (std::size_t t = steps; t-- > 0;) {
        const double dy = 2.0 / static_cast<double>(steps) * (trace.outputs[t] - targets[t]);
        g.w_ho += dy * trace.dropout_masks[t].cwiseProduct(trace.hidden_states[t + 1]).transpose();
        g.b_o += dy;
        // the output path is gated by the mask; the recurrent path is not
        Eigen::VectorXd da = trace.dropout_masks[t].cwiseProduct(p.w_ho.transpose() * dy) + carry;
        for (int j = 0; j < h; ++j)
            if (!(trace.pre_activations[t](j) > 0.0)) da(j) = 0.0;
        g.b_h += da;
        g.w_ih += da * trace.inputs[t];
        g.w_hh += da * trace.hidden_states[t].transpose();
        carry.noalias() = p.w_hh.transpose() * da;
    }
    return g;
}

// Central-difference gradient of the same loss, (L(θ+ε) - L(θ-ε)) / 2ε per
// parameter, each probe a fresh eval-mode forward pass. Independent of bptt;
// used to check it.
inline Gradients finite_difference_grad(const RnnParams& params, std::span<const double> inputs,
                                        std::span<const double> targets, double epsilon) {
    if (!(epsilon > 0.0)) detail::fail("finite_difference_grad: epsilon must be > 0");
    RnnParams probe = params;
    const auto loss_at = [&]() {
        const ForwardTrace tr = forward_eval(probe, inputs);
        return mse_loss(tr.outputs, targets);
    };
    const auto central = [&](double& slot) {
        const double saved = slot;
        slot = saved + epsilon;
        const double up = loss_at();
        slot = saved - epsilon;
        const double down = loss_at();
        slot = saved;
        return (up - down) / (2.0 * epsilon);
    };
    const int h = params.hidden_size;
    Gradients g;
    g.w_ih.resize(h);
    g.w_hh.resize(h, h);
    g.w_ho.resize(h);
    g.b_h.resize(h);
    for (int i = 0; i < h; ++i) g.w_ih(i) = central(probe.w_ih(i));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < h; ++c) g.w_hh(r, c) = central(probe.w_hh(r, c));
    for (int i = 0; i < h; ++i) g.w_ho(i) = central(probe.w_ho(i));
    for (int i = 0; i < h; ++i) g.b_h(i) = central(probe.b_h(i));
    g.b_o = central(probe.b_o);
    return g;
}

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct AdamState {
    Eigen::VectorXd m_w_ih, v_w_ih;
    Eigen::MatrixXd m_w_hh, v_w_hh;
    Eigen::RowVectorXd m_w_ho, v_w_ho;
    Eigen::VectorXd m_b_h, v_b_h;
    double m_b_o = 0.0, v_b_o = 0.0;

    static AdamState zeros(int hidden_size) {
        AdamState s;
        s.m_w_ih = Eigen::VectorXd::Zero(hidden_size);
        s.v_w_ih = Eigen::VectorXd::Zero(hidden_size);
        s.m_w_hh = Eigen::MatrixXd::Zero(hidden_size, hidden_size);
        s.v_w_hh = Eigen::MatrixXd::Zero(hidden_size, hidden_size);
        s.m_w_ho = Eigen::RowVectorXd::Zero(hidden_size);
        s.v_w_ho = Eigen::RowVectorXd::Zero(hidden_size);
        s.m_b_h = Eigen::VectorXd::Zero(hidden_size);
        s.v_b_h = Eigen::VectorXd::Zero(hidden_size);
        return s;
    }
};

// One Adam update with bias correction by step_count (1-based).
inline void adam_step(RnnParams& params, const Gradients& grads, long step_count, double learning_rate,
                      AdamState& state) {
    if (step_count < 1) detail::fail("adam_step: step_count must be >= 1, got ", step_count);
    const int h = params.hidden_size;
    if (grads.w_ih.size() != h || grads.w_hh.rows() != h || grads.w_hh.cols() != h || grads.w_ho.size() != h ||
        grads.b_h.size() != h || state.m_w_hh.rows() != h)
        detail::fail("adam_step: shape mismatch between params, gradients and moment state");
    if (!grads.w_ih.allFinite() || !grads.w_hh.allFinite() || !grads.w_ho.allFinite() || !grads.b_h.allFinite() ||
        !std::isfinite(grads.b_o))
        detail::fail("adam_step: non-finite gradient entry at step ", step_count);

    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step_count));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step_count));
    const auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
        m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
        v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
        theta.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEpsilon);
    };
    update(params.w_ih, grads.w_ih, state.m_w_ih, state.v_w_ih);
    update(params.w_hh, grads.w_hh, state.m_w_hh, state.v_w_hh);
    update(params.w_ho, grads.w_ho, state.m_w_ho, state.v_w_ho);
    update(params.b_h, grads.b_h, state.m_b_h, state.v_b_h);
    state.m_b_o = kAdamBeta1 * state.m_b_o + (1.0 - kAdamBeta1) * grads.b_o;
    state.v_b_o = kAdamBeta2 * state.v_b_o + (1.0 - kAdamBeta2) * grads.b_o * grads.b_o;
    params.b_o -= learning_rate * (state.m_b_o / c1) / (std::sqrt(state.v_b_o / c2) + kAdamEpsilon);
}

struct TrainReport {
    std::vector<double> epoch_losses;  // mean training loss per epoch
    RnnParams params;
    double wall_seconds = 0.0;
};

// Trains on the (already scaled) train split: one forward/BPTT/Adam update
// per 24-pair block, blocks in fixed chronological order. Fully
// deterministic for a given config.seed.
inline TrainReport train(const SplitDataset& scaled, const TrainConfig& config) {
    config.validate();
    if (scaled.train.empty()) detail::fail("train: empty training split");
    const auto t0 = std::chrono::steady_clock::now();

    RnnParams params = init_params(config.seed, config.hidden_size);
    SeededRng mask_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    AdamState moments = AdamState::zeros(config.hidden_size);

    TrainReport report;
    report.epoch_losses.reserve(static_cast<std::size_t>(config.epochs));
    long step = 0;
    std::array<double, DayBlock::kHours> x{}, y{};
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < scaled.train.size(); ++b) {
            const DayBlock& block = scaled.train[b];
            for (std::size_t s = 0; s < DayBlock::kHours; ++s) {
                x[s] = block.pairs[s].x;
                y[s] = block.pairs[s].y;
            }
            const ForwardTrace trace = forward(params, x, config.dropout_keep_prob, Mode::train, &mask_rng);
            const double loss = mse_loss(trace.outputs, y);
            if (!std::isfinite(loss)) detail::fail("train: non-finite loss at epoch ", epoch, ", block ", b);
            const Gradients grads = bptt(params, trace, y);
            ++step;
            adam_step(params, grads, step, config.learning_rate, moments);
            loss_sum += loss;
        }
        report.epoch_losses.push_back(loss_sum / static_cast<double>(scaled.train.size()));
    }
    report.params = std::move(params);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace thermocast
