#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "copaint/datasets.hpp"
#include "copaint/mlp.hpp"
#include "copaint/rng.hpp"
#include "copaint/schedule.hpp"

using namespace copaint;

namespace {

MlpModel seeded_model(int dim, const NoiseSchedule& schedule, std::uint64_t seed,
                      std::vector<int> hidden = {8}, int embed = 2) {
    TrainConfig cfg;
    cfg.hidden = std::move(hidden);
    cfg.embed_dim = embed;
    cfg.epochs = 0;
    cfg.seed = seed;
    std::vector<Eigen::VectorXd> data(4, Eigen::VectorXd::Zero(dim));
    return train_mlp(data, schedule, cfg).model;
}

void zero_out(MlpModel& model) {
    for (auto& w : model.weights) w.setZero();
    for (auto& b : model.biases) b.setZero();
    model.time_embedding.setZero();
}

// Plain-loop forward pass, independent of the Eigen-based implementation.
Eigen::VectorXd loop_epsilon(const MlpModel& model, const Eigen::VectorXd& x, int t) {
    std::vector<double> act(size_t(model.dims[0]));
    for (int i = 0; i < model.state_dim(); ++i) act[size_t(i)] = x[i];
    for (int j = 0; j < model.embed_dim(); ++j)
        act[size_t(model.state_dim() + j)] = model.time_embedding(t - 1, j);
    for (size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        std::vector<double> next(size_t(w.rows()));
        for (int r = 0; r < w.rows(); ++r) {
            double sum = model.biases[l][r];
            for (int c = 0; c < w.cols(); ++c) sum += w(r, c) * act[size_t(c)];
            next[size_t(r)] = (l + 1 < model.weights.size()) ? std::tanh(sum) : sum;
        }
        act = std::move(next);
    }
    Eigen::VectorXd out(model.state_dim());
    for (int i = 0; i < out.size(); ++i) out[i] = act[size_t(i)];
    return out;
}

}  // namespace

TEST_CASE("zero network reduces the denoiser to the skip path") {
    NoiseSchedule s = build_linear_schedule(1, 0.75, 0.75, 0.0);  // alpha_bar = 0.25
    MlpModel model = seeded_model(1, s, 3);
    zero_out(model);
    MlpDenoiser den(model, s);
    Eigen::VectorXd x(1);
    x << 0.5;
    // eps == 0: value = x / sqrt(0.25) = 2x.
    CHECK(den.value(x, 1)[0] == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::VectorXd v(1);
    v << -3.0;
    CHECK(den.vjp(x, 1, v)[0] == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("zero network at vanishing noise is the identity") {
    NoiseSchedule s = build_linear_schedule(1, 1e-9, 1e-9, 0.0);
    MlpModel model = seeded_model(3, s, 4);
    zero_out(model);
    MlpDenoiser den(model, s);
    Eigen::VectorXd x(3);
    x << 0.2, -0.7, 1.0;
    CHECK((den.value(x, 1) - x).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("epsilon matches an independent loop-based forward pass") {
    NoiseSchedule s = build_linear_schedule(12, 1e-3, 0.05, 0.0);
    std::vector<Eigen::VectorXd> data = mirror_dataset(32, 4, 11);
    TrainConfig cfg;
    cfg.hidden = {8, 8};
    cfg.embed_dim = 3;
    cfg.epochs = 5;
    cfg.seed = 11;
    MlpModel model = train_mlp(data, s, cfg).model;
    Rng rng(21);
    for (int t : {1, 6, 12}) {
        Eigen::VectorXd x = rng.normal_vector(4);
        CHECK((model.epsilon(x, t) - loop_epsilon(model, x, t)).lpNorm<Eigen::Infinity>()
              <= 1e-12);
    }
}

TEST_CASE("cotangent linearity sends zero to zero") {
    NoiseSchedule s = build_linear_schedule(6, 1e-3, 0.05, 0.0);
    MlpModel model = seeded_model(3, s, 9, {6}, 2);
    MlpDenoiser den(model, s);
    Rng rng(1);
    Eigen::VectorXd out = den.vjp(rng.normal_vector(3), 4, Eigen::VectorXd::Zero(3));
    CHECK(out.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("vjp matches central finite differences on 100 random instances") {
    NoiseSchedule s = build_linear_schedule(10, 1e-3, 0.05, 0.0);
    Rng rng(77);
    const double h = 1e-5;
    int checked = 0;
    for (int rep = 0; rep < 20; ++rep) {
        MlpModel model = seeded_model(3, s, 100 + std::uint64_t(rep), {7, 5}, 2);
        MlpDenoiser den(model, s);
        for (int inner = 0; inner < 5; ++inner) {
            int t = 1 + int(rng.uniform() * 10);
            Eigen::VectorXd x = rng.normal_vector(3);
            Eigen::VectorXd v = rng.normal_vector(3);
            Eigen::VectorXd g = den.vjp(x, t, v);
            for (int i = 0; i < 3; ++i) {
                Eigen::VectorXd xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                double fd = (v.dot(den.value(xp, t)) - v.dot(den.value(xm, t))) / (2 * h);
                CHECK(std::abs(g[i] - fd) / (1.0 + std::abs(fd)) <= 1e-4);
            }
            ++checked;
        }
    }
    CHECK(checked == 100);
}

TEST_CASE("training beats the zero predictor by a clear factor") {
    // Steep ramp so most evaluation steps sit in the noise-dominated regime,
    // where the noise is actually recoverable from the input.
    NoiseSchedule s = build_linear_schedule(30, 2e-3, 0.25, 0.0);
    std::vector<Eigen::VectorXd> data = mirror_dataset(128, 8, 5);
    TrainConfig cfg;
    cfg.hidden = {32, 32};
    cfg.embed_dim = 4;
    cfg.epochs = 40;
    cfg.batch = 16;
    cfg.lr = 0.05;
    cfg.seed = 5;
    TrainResult res = train_mlp(data, s, cfg);
    CHECK(res.final_loss * 2.0 <= res.baseline_loss);
}

TEST_CASE("loss decreases monotonically early on a constant dataset") {
    // One deep step: the target is recoverable from the input, so descent is
    // steep and steady. Epoch losses are deterministic for a fixed seed; this
    // configuration drops at least 20 percent per epoch for all ten epochs.
    NoiseSchedule s = build_linear_schedule(1, 0.9, 0.9, 0.0);
    Eigen::VectorXd c(2);
    c << 0.3, -0.6;
    std::vector<Eigen::VectorXd> data(256, c);
    TrainConfig cfg;
    cfg.hidden = {16};
    cfg.embed_dim = 2;
    cfg.epochs = 10;
    cfg.batch = 32;
    cfg.lr = 0.02;
    cfg.seed = 18;
    TrainResult res = train_mlp(data, s, cfg);
    REQUIRE(res.epoch_losses.size() == 10);
    for (size_t i = 1; i < res.epoch_losses.size(); ++i)
        CHECK(res.epoch_losses[i] < res.epoch_losses[i - 1]);
}

TEST_CASE("training is deterministic in the seed") {
    NoiseSchedule s = build_linear_schedule(8, 1e-3, 0.05, 0.0);
    std::vector<Eigen::VectorXd> data = mirror_dataset(32, 4, 2);
    TrainConfig cfg;
    cfg.hidden = {8};
    cfg.embed_dim = 2;
    cfg.epochs = 7;
    cfg.seed = 123;
    MlpModel a = train_mlp(data, s, cfg).model;
    MlpModel b = train_mlp(data, s, cfg).model;
    for (size_t l = 0; l < a.weights.size(); ++l)
        CHECK((a.weights[l] - b.weights[l]).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.time_embedding - b.time_embedding).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("checkpoint round-trips the zero-epoch initialization bitwise") {
    NoiseSchedule s = build_linear_schedule(5, 1e-3, 0.05, 0.0);
    MlpModel model = seeded_model(3, s, 31, {6, 4}, 2);
    std::stringstream buf;
    save_mlp(model, buf);
    MlpModel back = load_mlp(buf);
    REQUIRE(back.dims == model.dims);
    CHECK(back.T() == model.T());
    for (size_t l = 0; l < model.weights.size(); ++l) {
        CHECK((back.weights[l] - model.weights[l]).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((back.biases[l] - model.biases[l]).lpNorm<Eigen::Infinity>() == 0.0);
    }
    CHECK((back.time_embedding - model.time_embedding).lpNorm<Eigen::Infinity>() == 0.0);

    MlpDenoiser da(model, s), db(back, s);
    Rng rng(6);
    Eigen::VectorXd x = rng.normal_vector(3);
    CHECK((da.value(x, 3) - db.value(x, 3)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("checkpoint loading rejects malformed input") {
    {
        std::stringstream buf("NOTAMODEL\n");
        CHECK_THROWS(load_mlp(buf));
    }
    {
        NoiseSchedule s = build_linear_schedule(3, 1e-3, 0.05, 0.0);
        MlpModel model = seeded_model(2, s, 1);
        std::stringstream buf;
        save_mlp(model, buf);
        std::string full = buf.str();
        std::stringstream cut(full.substr(0, full.size() - 16));
        CHECK_THROWS(load_mlp(cut));
    }
}

TEST_CASE("source_steps remaps runtime steps onto the model grid") {
    NoiseSchedule src = build_linear_schedule(4, 1e-3, 0.05, 0.0);
    MlpModel model = seeded_model(2, src, 44, {6}, 2);
    NoiseSchedule sub = subsequence(src, {2, 4});
    MlpDenoiser den(model, sub, {2, 4});
    Rng rng(3);
    Eigen::VectorXd x = rng.normal_vector(2);
    // Runtime step 1 must use the model's step-2 embedding and the
    // sub-schedule's alpha_bar(1) == source alpha_bar(2).
    double ab = sub.alpha_bar(1);
    Eigen::VectorXd expected =
        (x - std::sqrt(1.0 - ab) * model.epsilon(x, 2)) / std::sqrt(ab);
    CHECK((den.value(x, 1) - expected).lpNorm<Eigen::Infinity>() == 0.0);
}
