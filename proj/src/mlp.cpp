#include "copaint/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "copaint/errors.hpp"

namespace copaint {

namespace {

// Forward pass keeping post-activation values per layer; activations[0] is
// the assembled input. Hidden layers are tanh, the last layer is linear.
std::vector<Eigen::VectorXd> forward_pass(const MlpModel& m,
                                          const Eigen::VectorXd& input) {
    std::vector<Eigen::VectorXd> acts;
    acts.reserve(m.weights.size() + 1);
    acts.push_back(input);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Eigen::VectorXd z = m.weights[l] * acts.back() + m.biases[l];
        if (l + 1 < m.weights.size()) z = z.array().tanh();
        acts.push_back(std::move(z));
    }
    return acts;
}

// Backward pass from an output cotangent to the input cotangent.
Eigen::VectorXd backward_input(const MlpModel& m,
                               const std::vector<Eigen::VectorXd>& acts,
                               Eigen::VectorXd g) {
    for (int l = static_cast<int>(m.weights.size()) - 1; l >= 0; --l) {
        if (l + 1 < static_cast<int>(m.weights.size())) {
            const Eigen::VectorXd& a = acts[l + 1];  // tanh output
            g = (g.array() * (1.0 - a.array().square())).matrix();
        }
        g = m.weights[l].transpose() * g;
    }
    return g;
}

Eigen::VectorXd assemble_input(const MlpModel& m, const Eigen::VectorXd& x,
                               int t) {
    if (x.size() != m.state_dim())
        throw std::invalid_argument("mlp: state dimension mismatch");
    if (t < 1 || t > m.T())
        throw std::invalid_argument("mlp: step outside the embedding table");
    Eigen::VectorXd input(m.dims.front());
    input.head(m.state_dim()) = x;
    input.tail(m.embed_dim()) = m.time_embedding.row(t - 1).transpose();
    return input;
}

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
    // Payload is little-endian IEEE float64; this build targets such hosts.
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t n) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::invalid_argument("mlp checkpoint: truncated payload");
}

}  // namespace

Eigen::VectorXd MlpModel::epsilon(const Eigen::VectorXd& x, int t) const {
    return forward_pass(*this, assemble_input(*this, x, t)).back();
}

Eigen::VectorXd MlpModel::epsilon_vjp(const Eigen::VectorXd& x, int t,
                                      const Eigen::VectorXd& v) const {
    auto acts = forward_pass(*this, assemble_input(*this, x, t));
    Eigen::VectorXd g = backward_input(*this, acts, v);
    return g.head(state_dim());
}

void save_mlp(const MlpModel& model, std::ostream& out) {
    out << "CPMLP1\n";
    out << "dims";
    for (int d : model.dims) out << " " << d;
    out << "\n";
    out << "T " << model.T() << "\n";
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        // Eigen stores column-major; emit row-major explicitly.
        const Eigen::MatrixXd& W = model.weights[l];
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            Eigen::VectorXd row = W.row(r).transpose();
            write_doubles(out, row.data(), static_cast<std::size_t>(row.size()));
        }
        write_doubles(out, model.biases[l].data(),
                      static_cast<std::size_t>(model.biases[l].size()));
    }
    const Eigen::MatrixXd& E = model.time_embedding;
    for (Eigen::Index r = 0; r < E.rows(); ++r) {
        Eigen::VectorXd row = E.row(r).transpose();
        write_doubles(out, row.data(), static_cast<std::size_t>(row.size()));
    }
}

MlpModel load_mlp(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "CPMLP1")
        throw std::invalid_argument("mlp checkpoint: bad magic");
    if (!std::getline(in, line) || line.rfind("dims", 0) != 0)
        throw std::invalid_argument("mlp checkpoint: missing dims line");
    MlpModel m;
    {
        std::istringstream ss(line.substr(4));
        int d;
        while (ss >> d) m.dims.push_back(d);
    }
    if (m.dims.size() < 2)
        throw std::invalid_argument("mlp checkpoint: need at least two dims");
    for (int d : m.dims)
        if (d < 1) throw std::invalid_argument("mlp checkpoint: bad layer width");
    if (m.dims.front() <= m.dims.back())
        throw std::invalid_argument(
            "mlp checkpoint: input width must exceed state width");
    int T = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "T %d", &T) != 1 ||
        T < 1)
        throw std::invalid_argument("mlp checkpoint: missing T line");

    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        Eigen::MatrixXd W(m.dims[l + 1], m.dims[l]);
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            Eigen::VectorXd row(W.cols());
            read_doubles(in, row.data(), static_cast<std::size_t>(row.size()));
            W.row(r) = row.transpose();
        }
        Eigen::VectorXd b(m.dims[l + 1]);
        read_doubles(in, b.data(), static_cast<std::size_t>(b.size()));
        m.weights.push_back(std::move(W));
        m.biases.push_back(std::move(b));
    }
    const int embed = m.dims.front() - m.dims.back();
    m.time_embedding.resize(T, embed);
    for (int r = 0; r < T; ++r) {
        Eigen::VectorXd row(embed);
        read_doubles(in, row.data(), static_cast<std::size_t>(row.size()));
        m.time_embedding.row(r) = row.transpose();
    }
    return m;
}

MlpDenoiser::MlpDenoiser(const MlpModel& model, const NoiseSchedule& schedule,
                         std::vector<int> source_steps)
    : model_(&model), schedule_(&schedule), source_steps_(std::move(source_steps)) {
    if (!source_steps_.empty() &&
        static_cast<int>(source_steps_.size()) != schedule.T())
        throw std::invalid_argument("mlp denoiser: step map length != T");
    const int max_step = source_steps_.empty()
                             ? schedule.T()
                             : *std::max_element(source_steps_.begin(),
                                                 source_steps_.end());
    if (max_step > model.T())
        throw std::invalid_argument("mlp denoiser: schedule exceeds model steps");
}

int MlpDenoiser::model_step(int t) const {
    return source_steps_.empty() ? t : source_steps_.at(t - 1);
}

Eigen::VectorXd MlpDenoiser::value(const Eigen::VectorXd& x, int t) const {
    double ab = schedule_->alpha_bar(t);
    Eigen::VectorXd eps = model_->epsilon(x, model_step(t));
    return (x - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
}

Eigen::VectorXd MlpDenoiser::vjp(const Eigen::VectorXd& x, int t,
                                 const Eigen::VectorXd& v) const {
    double ab = schedule_->alpha_bar(t);
    Eigen::VectorXd back = model_->epsilon_vjp(x, model_step(t), v);
    return (v - std::sqrt(1.0 - ab) * back) / std::sqrt(ab);
}

namespace {

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd embedding;

    explicit Gradients(const MlpModel& m) {
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            weights.emplace_back(Eigen::MatrixXd::Zero(m.weights[l].rows(),
                                                       m.weights[l].cols()));
            biases.emplace_back(Eigen::VectorXd::Zero(m.biases[l].size()));
        }
        embedding = Eigen::MatrixXd::Zero(m.time_embedding.rows(),
                                          m.time_embedding.cols());
    }
};

// Accumulates parameter gradients for one sample given the output
// cotangent; returns nothing else. Mirrors backward_input but keeps the
// per-layer terms.
void accumulate_gradients(const MlpModel& m,
                          const std::vector<Eigen::VectorXd>& acts, int t,
                          Eigen::VectorXd g, Gradients& grads) {
    for (int l = static_cast<int>(m.weights.size()) - 1; l >= 0; --l) {
        if (l + 1 < static_cast<int>(m.weights.size())) {
            const Eigen::VectorXd& a = acts[l + 1];
            g = (g.array() * (1.0 - a.array().square())).matrix();
        }
        grads.weights[l].noalias() += g * acts[l].transpose();
        grads.biases[l] += g;
        g = m.weights[l].transpose() * g;
    }
    grads.embedding.row(t - 1) += g.tail(m.embed_dim()).transpose();
}

int draw_step(Rng& rng, int T) {
    int t = 1 + static_cast<int>(rng.uniform() * T);
    return std::min(t, T);
}

std::vector<int> eval_step_grid(int T) {
    std::vector<int> grid = {1, std::max(1, T / 4), std::max(1, T / 2),
                             std::max(1, 3 * T / 4), T};
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// Mean squared noise-prediction error over a fixed (t, noise) grid. The
// zero-predictor baseline reuses the identical draws via the same seed.
double evaluate(const MlpModel& m, const std::vector<Eigen::VectorXd>& dataset,
                const NoiseSchedule& schedule, std::uint64_t seed,
                bool zero_model) {
    Rng rng(seed);
    const auto grid = eval_step_grid(schedule.T());
    double total = 0.0;
    std::size_t terms = 0;
    for (const auto& x0 : dataset) {
        for (int t : grid) {
            double ab = schedule.alpha_bar(t);
            Eigen::VectorXd eps = rng.normal_vector(x0.size());
            Eigen::VectorXd xt =
                std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
            Eigen::VectorXd pred = zero_model
                                       ? Eigen::VectorXd::Zero(x0.size())
                                       : m.epsilon(xt, t);
            total += (pred - eps).squaredNorm();
            terms += static_cast<std::size_t>(x0.size());
        }
    }
    return total / static_cast<double>(terms);
}

}  // namespace

TrainResult train_mlp(const std::vector<Eigen::VectorXd>& dataset,
                      const NoiseSchedule& schedule, const TrainConfig& config) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const int n = static_cast<int>(dataset.front().size());
    for (const auto& x : dataset) {
        if (static_cast<int>(x.size()) != n)
            throw std::invalid_argument("train: inconsistent sample dimension");
        if (x.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
            throw std::invalid_argument("train: samples must lie in [-1,1]");
    }
    if (config.embed_dim < 1 || config.batch < 1 || config.epochs < 0 ||
        !(config.lr > 0.0))
        throw std::invalid_argument("train: bad hyperparameters");

    Rng rng(config.seed);
    MlpModel m;
    m.dims.push_back(n + config.embed_dim);
    for (int h : config.hidden) {
        if (h < 1) throw std::invalid_argument("train: bad hidden width");
        m.dims.push_back(h);
    }
    m.dims.push_back(n);
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        double scale = 1.0 / std::sqrt(static_cast<double>(m.dims[l]));
        Eigen::MatrixXd W(m.dims[l + 1], m.dims[l]);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c)
                W(r, c) = rng.normal() * scale;
        m.weights.push_back(std::move(W));
        m.biases.emplace_back(Eigen::VectorXd::Zero(m.dims[l + 1]));
    }
    m.time_embedding.resize(schedule.T(), config.embed_dim);
    for (Eigen::Index r = 0; r < m.time_embedding.rows(); ++r)
        for (Eigen::Index c = 0; c < m.time_embedding.cols(); ++c)
            m.time_embedding(r, c) = rng.normal();

    TrainResult result;
    std::vector<int> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates off the run rng keeps the whole pass deterministic.
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
            int j = static_cast<int>(rng.uniform() * (i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch)) {
            std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch));
            Gradients grads(m);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                const Eigen::VectorXd& x0 = dataset[static_cast<std::size_t>(order[i])];
                int t = draw_step(rng, schedule.T());
                double ab = schedule.alpha_bar(t);
                Eigen::VectorXd eps = rng.normal_vector(n);
                Eigen::VectorXd xt = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
                auto acts = forward_pass(m, assemble_input(m, xt, t));
                Eigen::VectorXd diff = acts.back() - eps;
                batch_loss += diff.squaredNorm() / n;
                accumulate_gradients(m, acts, t, 2.0 * diff / n, grads);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw NumericError("train: non-finite loss in epoch " +
                                   std::to_string(epoch));
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                m.weights[l] -= config.lr * inv * grads.weights[l];
                m.biases[l] -= config.lr * inv * grads.biases[l];
            }
            m.time_embedding -= config.lr * inv * grads.embedding;
            epoch_loss += batch_loss;
            ++batches;
        }
        result.epoch_losses.push_back(epoch_loss / batches);
    }

    const std::uint64_t eval_seed = splitmix64(config.seed ^ 0x65766C75ull);
    result.final_loss = evaluate(m, dataset, schedule, eval_seed, false);
    result.baseline_loss = evaluate(m, dataset, schedule, eval_seed, true);
    result.model = std::move(m);
    return result;
}

}  // namespace copaint
