#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"
#include "thermocast/dataset.hpp"
#include "thermocast/rnn.hpp"

using namespace thermocast;

namespace {

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

double max_rel_error(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    const auto scan = [&](const auto& x, const auto& y) {
        for (Eigen::Index i = 0; i < x.size(); ++i) worst = std::max(worst, rel_error(x(i), y(i)));
    };
    scan(a.w_ih, b.w_ih);
    scan(a.w_hh.reshaped(), b.w_hh.reshaped());
    scan(a.w_ho, b.w_ho);
    scan(a.b_h, b.b_h);
    worst = std::max(worst, rel_error(a.b_o, b.b_o));
    return worst;
}

RnnParams zero_params(int h) {
    RnnParams p;
    p.hidden_size = h;
    p.w_ih = Eigen::VectorXd::Zero(h);
    p.w_hh = Eigen::MatrixXd::Zero(h, h);
    p.w_ho = Eigen::RowVectorXd::Zero(h);
    p.b_h = Eigen::VectorXd::Zero(h);
    p.b_o = 0.0;
    return p;
}

SplitDataset scaled_sine_dataset(std::size_t hours, std::uint64_t seed) {
    const auto series = testutil::make_synthetic_series(hours, seed);
    const auto grouped = group_blocks(make_pairs(series));
    const auto split = split_dataset(grouped.blocks, 0.7);
    return scale_dataset(fit_scaler(split.train), split);
}

} // namespace

TEST(InitParams, DeterministicInSeed) {
    const auto a = init_params(123, 16);
    const auto b = init_params(123, 16);
    EXPECT_EQ(a.w_ih, b.w_ih);
    EXPECT_EQ(a.w_hh, b.w_hh);
    EXPECT_EQ(a.w_ho, b.w_ho);
    EXPECT_EQ(a.b_h, b.b_h);
    EXPECT_EQ(a.b_o, b.b_o);

    const auto c = init_params(124, 16);
    EXPECT_NE(a.w_hh, c.w_hh);
}

TEST(InitParams, BoundsAtHundred) {
    const int h = 100;
    const auto p = init_params(7, h);
    ASSERT_EQ(p.w_hh.size(), 10000);
    const double s_ih = std::sqrt(6.0 / (1.0 + h));
    const double s_hh = std::sqrt(6.0 / (2.0 * h));
    const double s_ho = std::sqrt(6.0 / (h + 1.0));
    for (int i = 0; i < h; ++i) EXPECT_LE(std::abs(p.w_ih(i)), s_ih);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < h; ++c) EXPECT_LE(std::abs(p.w_hh(r, c)), s_hh);
    for (int i = 0; i < h; ++i) EXPECT_LE(std::abs(p.w_ho(i)), s_ho);
    EXPECT_TRUE((p.b_h.array() == 0.0).all());
    EXPECT_EQ(p.b_o, 0.0);
}

TEST(InitParams, RejectsBadSize) {
    EXPECT_THROW(init_params(1, 0), Error);
    EXPECT_THROW(init_params(1, -3), Error);
}

TEST(Forward, ZeroNetworkOutputsZero) {
    const auto p = zero_params(8);
    const std::vector<double> inputs{0.1, 0.9, -0.4, 2.0};
    const auto trace = forward_eval(p, inputs);
    for (const double y : trace.outputs) EXPECT_EQ(y, 0.0);
}

TEST(Forward, HandUnrolledRecurrence) {
    // H=2, T=2, every number chased through the recurrence by hand
    RnnParams p = zero_params(2);
    p.w_ih << 0.5, -1.0;
    p.w_hh << 0.1, 0.2, 0.3, -0.4;
    p.w_ho << 1.0, 2.0;
    p.b_h << 0.1, -0.1;
    p.b_o = 0.25;
    const std::vector<double> inputs{1.0, 1.0};
    const auto trace = forward_eval(p, inputs);

    // t=1: a=(0.6, -1.1), h=(0.6, 0), y=0.6+0.25
    const double a1_0 = 0.5 * 1.0 + 0.1;
    const double a1_1 = -1.0 * 1.0 - 0.1;
    const double h1_0 = std::max(a1_0, 0.0), h1_1 = std::max(a1_1, 0.0);
    const double y1 = 1.0 * h1_0 + 2.0 * h1_1 + 0.25;
    // t=2: a=(0.5+0.1*0.6+0.1, -1.0+0.3*0.6-0.1)
    const double a2_0 = 0.5 + 0.1 * h1_0 + 0.2 * h1_1 + 0.1;
    const double a2_1 = -1.0 + 0.3 * h1_0 - 0.4 * h1_1 - 0.1;
    const double y2 = std::max(a2_0, 0.0) + 2.0 * std::max(a2_1, 0.0) + 0.25;

    ASSERT_EQ(trace.outputs.size(), 2u);
    EXPECT_NEAR(trace.outputs[0], y1, 1e-15);
    EXPECT_NEAR(trace.outputs[1], y2, 1e-15);
    EXPECT_NEAR(trace.pre_activations[0](0), a1_0, 1e-15);
    EXPECT_NEAR(trace.pre_activations[0](1), a1_1, 1e-15);
    EXPECT_NEAR(trace.pre_activations[1](0), a2_0, 1e-15);
    EXPECT_NEAR(trace.pre_activations[1](1), a2_1, 1e-15);
    EXPECT_EQ(trace.hidden_states[0], Eigen::VectorXd::Zero(2));
}

TEST(Forward, EvalModeIsMaskFreeAndRepeatable) {
    const auto p = init_params(5, 6);
    const std::vector<double> inputs{0.2, 0.4, 0.6, 0.8};
    const auto a = forward_eval(p, inputs);
    const auto b = forward(p, inputs, 0.5, Mode::eval);
    for (const auto& mask : a.dropout_masks) EXPECT_TRUE((mask.array() == 1.0).all());
    ASSERT_EQ(a.outputs.size(), b.outputs.size());
    for (std::size_t i = 0; i < a.outputs.size(); ++i) EXPECT_EQ(a.outputs[i], b.outputs[i]);
}

TEST(Forward, HiddenStatesNonNegative) {
    const auto p = init_params(11, 12);
    SeededRng rng(12);
    std::vector<double> inputs(30);
    for (auto& x : inputs) x = rng.uniform(-2.0, 2.0);
    SeededRng mask_rng(13);
    const auto trace = forward(p, inputs, 0.5, Mode::train, &mask_rng);
    for (const auto& h : trace.hidden_states) EXPECT_TRUE((h.array() >= 0.0).all());
}

TEST(Forward, TrainModeMaskValues) {
    const auto p = init_params(3, 10);
    const std::vector<double> inputs{0.5, 0.5, 0.5};
    SeededRng mask_rng(77);
    const double keep = 0.5;
    const auto trace = forward(p, inputs, keep, Mode::train, &mask_rng);
    bool saw_zero = false, saw_survivor = false;
    for (const auto& mask : trace.dropout_masks)
        for (Eigen::Index j = 0; j < mask.size(); ++j) {
            if (mask(j) == 0.0) saw_zero = true;
            else if (mask(j) == 1.0 / keep) saw_survivor = true;
            else FAIL() << "mask entry " << mask(j) << " is neither 0 nor 1/keep_prob";
        }
    EXPECT_TRUE(saw_zero);
    EXPECT_TRUE(saw_survivor);
}

TEST(Forward, Errors) {
    const auto p = init_params(1, 4);
    EXPECT_THROW(forward_eval(p, {}), Error);
    const std::vector<double> inputs{0.5};
    EXPECT_THROW(forward(p, inputs, 0.0, Mode::eval), Error);
    EXPECT_THROW(forward(p, inputs, 1.5, Mode::eval), Error);
    EXPECT_THROW(forward(p, inputs, 0.5, Mode::train, nullptr), Error);
}

TEST(Forward, DropoutExpectationMatchesEval) {
    // E[mask ⊙ relu(a)] over masks equals the eval-mode hidden state for the
    // same pre-activation, checked at 10^4 draws within 3 standard errors
    const int h = 16;
    const auto p = init_params(21, h);
    const std::vector<double> inputs{0.8};
    const auto eval_trace = forward_eval(p, inputs);
    const Eigen::VectorXd& expected = eval_trace.hidden_states[1];

    const int draws = 10000;
    const double keep = 0.5;
    SeededRng mask_rng(22);
    Eigen::MatrixXd samples(h, draws);
    for (int d = 0; d < draws; ++d) {
        const auto tr = forward(p, inputs, keep, Mode::train, &mask_rng);
        samples.col(d) = tr.dropout_masks[0].cwiseProduct(tr.hidden_states[1]);
    }
    for (int j = 0; j < h; ++j) {
        const double mean = samples.row(j).mean();
        const double var = (samples.row(j).array() - mean).square().sum() / (draws - 1);
        const double se = std::sqrt(var / draws);
        EXPECT_NEAR(mean, expected(j), 3.0 * se + 1e-12) << "unit " << j;
    }
}

TEST(Forward, ConcurrentEvalOverSharedParams) {
    // a parameter snapshot is immutable; eval-mode passes may share it freely
    const auto p = init_params(31, 16);
    SeededRng rng(32);
    std::vector<double> inputs(24);
    for (auto& x : inputs) x = rng.uniform(0.0, 1.0);
    const auto reference = forward_eval(p, inputs).outputs;

    std::vector<std::thread> workers;
    std::array<bool, 8> identical{};
    for (std::size_t w = 0; w < identical.size(); ++w) {
        workers.emplace_back([&, w] {
            for (int rep = 0; rep < 50; ++rep) {
                const auto outputs = forward_eval(p, inputs).outputs;
                if (outputs != reference) return;
            }
            identical[w] = true;
        });
    }
    for (auto& t : workers) t.join();
    for (const bool ok : identical) EXPECT_TRUE(ok);
}

TEST(MseLoss, Values) {
    const std::vector<double> a{1.0, 1.0}, b{0.0, 0.0};
    EXPECT_EQ(mse_loss(a, a), 0.0);
    EXPECT_EQ(mse_loss(a, b), 1.0);
    EXPECT_THROW(mse_loss(a, {}), Error);
}

TEST(MseLoss, MatchesDirectSummation) {
    SeededRng rng(41);
    std::vector<double> outputs(10), targets(10);
    for (std::size_t i = 0; i < 10; ++i) {
        outputs[i] = rng.uniform(-3.0, 3.0);
        targets[i] = rng.uniform(-3.0, 3.0);
    }
    double expected = 0.0;
    for (std::size_t i = 0; i < 10; ++i)
        expected += (outputs[i] - targets[i]) * (outputs[i] - targets[i]);
    expected /= 10.0;
    EXPECT_NEAR(mse_loss(outputs, targets), expected, 1e-12);
}

TEST(Bptt, NoRecurrentPathAtSingleStep) {
    const auto p = init_params(51, 6);
    const std::vector<double> inputs{0.7}, targets{0.1};
    const auto trace = forward_eval(p, inputs);
    const auto g = bptt(p, trace, targets);
    EXPECT_TRUE((g.w_hh.array() == 0.0).all());
}

TEST(Bptt, ZeroAtMinimum) {
    const auto p = init_params(52, 6);
    const std::vector<double> inputs{0.3, 0.6, 0.9};
    const auto trace = forward_eval(p, inputs);
    const auto g = bptt(p, trace, trace.outputs);
    EXPECT_TRUE((g.w_ih.array() == 0.0).all());
    EXPECT_TRUE((g.w_hh.array() == 0.0).all());
    EXPECT_TRUE((g.w_ho.array() == 0.0).all());
    EXPECT_TRUE((g.b_h.array() == 0.0).all());
    EXPECT_EQ(g.b_o, 0.0);
}

TEST(Bptt, MatchesFiniteDifferences) {
    const int h = 8;
    const std::size_t steps = 6;
    const auto p = init_params(53, h);
    SeededRng rng(54);
    std::vector<double> inputs(steps), targets(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        inputs[i] = rng.uniform(0.0, 1.0);
        targets[i] = rng.uniform(0.0, 1.0);
    }
    const auto trace = forward_eval(p, inputs);
    const auto analytic = bptt(p, trace, targets);
    const auto numeric = finite_difference_grad(p, inputs, targets, 1e-5);
    EXPECT_LT(max_rel_error(analytic, numeric), 1e-5);
}

TEST(Bptt, GradientFlowsThroughDropoutMasks) {
    // a zeroed unit contributes no gradient to its own input weight
    const int h = 4;
    const auto p = init_params(55, h);
    const std::vector<double> inputs{0.9};
    SeededRng mask_rng(56);
    const auto trace = forward(p, inputs, 0.5, Mode::train, &mask_rng);
    const std::vector<double> targets{trace.outputs[0] + 1.0};
    const auto g = bptt(p, trace, targets);
    for (int j = 0; j < h; ++j) {
        if (trace.dropout_masks[0](j) == 0.0) {
            EXPECT_EQ(g.w_ih(j), 0.0);
        }
    }
}

TEST(Bptt, ShapeMismatchRejected) {
    const auto p = init_params(57, 4);
    const std::vector<double> inputs{0.1, 0.2};
    const auto trace = forward_eval(p, inputs);
    const std::vector<double> bad_targets{0.1};
    EXPECT_THROW(bptt(p, trace, bad_targets), Error);
    const auto other = init_params(58, 5);
    const std::vector<double> targets{0.1, 0.2};
    EXPECT_THROW(bptt(other, trace, targets), Error);
}

TEST(AdamStep, ZeroGradientLeavesParamsAlone) {
    auto p = init_params(61, 4);
    const auto before = p;
    Gradients g;
    g.w_ih = Eigen::VectorXd::Zero(4);
    g.w_hh = Eigen::MatrixXd::Zero(4, 4);
    g.w_ho = Eigen::RowVectorXd::Zero(4);
    g.b_h = Eigen::VectorXd::Zero(4);
    g.b_o = 0.0;
    auto state = AdamState::zeros(4);
    adam_step(p, g, 1, 1e-3, state);
    EXPECT_EQ(p.w_ih, before.w_ih);
    EXPECT_EQ(p.w_hh, before.w_hh);
    EXPECT_EQ(p.w_ho, before.w_ho);
    EXPECT_EQ(p.b_h, before.b_h);
    EXPECT_EQ(p.b_o, before.b_o);

    // nonzero moments decay toward zero under a zero gradient
    auto decaying = AdamState::zeros(4);
    decaying.m_w_ih(0) = 0.5;
    decaying.v_w_ih(0) = 0.25;
    auto p2 = init_params(61, 4);
    adam_step(p2, g, 1, 1e-3, decaying);
    EXPECT_LT(decaying.m_w_ih(0), 0.5);
    EXPECT_GT(decaying.m_w_ih(0), 0.0);
    EXPECT_LT(decaying.v_w_ih(0), 0.25);
}

TEST(AdamStep, FirstStepMagnitudeIsLearningRate) {
    auto p = zero_params(2);
    Gradients g;
    g.w_ih = Eigen::VectorXd::Zero(2);
    g.w_ih << 0.37, -1.8;
    g.w_hh = Eigen::MatrixXd::Zero(2, 2);
    g.w_ho = Eigen::RowVectorXd::Zero(2);
    g.b_h = Eigen::VectorXd::Zero(2);
    g.b_o = 0.0;
    auto state = AdamState::zeros(2);
    const double lr = 1e-3;
    adam_step(p, g, 1, lr, state);
    // first bias-corrected step is lr * g / (|g| + eps)
    EXPECT_NEAR(p.w_ih(0), -lr, lr * 1e-4);
    EXPECT_NEAR(p.w_ih(1), lr, lr * 1e-4);
}

TEST(AdamStep, Stateful) {
    auto p1 = zero_params(1);
    auto p2 = zero_params(1);
    Gradients g;
    g.w_ih = Eigen::VectorXd::Constant(1, 0.5);
    g.w_hh = Eigen::MatrixXd::Zero(1, 1);
    g.w_ho = Eigen::RowVectorXd::Zero(1);
    g.b_h = Eigen::VectorXd::Zero(1);
    g.b_o = 0.0;
    auto s1 = AdamState::zeros(1);
    adam_step(p1, g, 1, 1e-3, s1);
    adam_step(p1, g, 2, 1e-3, s1);

    Gradients doubled = g;
    doubled.w_ih *= 2.0;
    auto s2 = AdamState::zeros(1);
    adam_step(p2, doubled, 1, 1e-3, s2);
    EXPECT_NE(p1.w_ih(0), p2.w_ih(0));
}

TEST(AdamStep, NonFiniteGradientRejected) {
    auto p = zero_params(2);
    Gradients g;
    g.w_ih = Eigen::VectorXd::Zero(2);
    g.w_hh = Eigen::MatrixXd::Zero(2, 2);
    g.w_ho = Eigen::RowVectorXd::Zero(2);
    g.b_h = Eigen::VectorXd::Zero(2);
    g.b_o = std::numeric_limits<double>::quiet_NaN();
    auto state = AdamState::zeros(2);
    EXPECT_THROW(adam_step(p, g, 1, 1e-3, state), Error);
}

TEST(TrainConfig, Invariants) {
    TrainConfig c;
    c.epochs = 0;
    EXPECT_THROW(c.validate(), Error);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = TrainConfig{};
    c.dropout_keep_prob = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = TrainConfig{};
    c.dropout_keep_prob = 1.5;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(Train, RejectsZeroEpochsAndEmptySplit) {
    const auto dataset = scaled_sine_dataset(25 * 8, 3);
    TrainConfig config{8, 1e-3, 0.5, 0, 1};
    EXPECT_THROW(train(dataset, config), Error);
    SplitDataset empty;
    EXPECT_THROW(train(empty, TrainConfig{8, 1e-3, 0.5, 1, 1}), Error);
}

TEST(Train, DeterministicAcrossRuns) {
    const auto dataset = scaled_sine_dataset(25 * 8, 4);
    const TrainConfig config{8, 1e-3, 0.5, 5, 99};
    const auto a = train(dataset, config);
    const auto b = train(dataset, config);
    ASSERT_EQ(a.epoch_losses.size(), 5u);
    EXPECT_EQ(a.epoch_losses, b.epoch_losses);
    EXPECT_EQ(a.params.w_ih, b.params.w_ih);
    EXPECT_EQ(a.params.w_hh, b.params.w_hh);
    EXPECT_EQ(a.params.w_ho, b.params.w_ho);
    EXPECT_EQ(a.params.b_h, b.params.b_h);
    EXPECT_EQ(a.params.b_o, b.params.b_o);
}

TEST(Train, LossDropsOnSinusoid) {
    const auto dataset = scaled_sine_dataset(480, 5);
    TrainConfig config;
    config.hidden_size = 32;
    config.epochs = 200;
    const auto report = train(dataset, config);
    ASSERT_EQ(report.epoch_losses.size(), 200u);
    EXPECT_LT(report.epoch_losses.back(), 0.1 * report.epoch_losses.front());
}

TEST(Train, DivergenceAborts) {
    // targets near the overflow edge make the very first squared error infinite
    TemperatureSeries giant;
    giant.values.assign(49, 0.0);
    for (std::size_t i = 1; i < giant.values.size(); i += 2) giant.values[i] = 1e160;
    const auto split = split_dataset(group_blocks(make_pairs(giant)).blocks, 0.5);
    const TrainConfig config{4, 1e-3, 1.0, 3, 2};
    try {
        train(split, config);
        FAIL() << "expected non-finite loss abort";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("block"), std::string::npos);
    }
}
