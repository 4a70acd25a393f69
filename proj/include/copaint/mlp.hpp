#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "copaint/denoiser.hpp"
#include "copaint/rng.hpp"
#include "copaint/schedule.hpp"

namespace copaint {

/// Fully connected tanh network predicting the noise component of a noisy
/// state. Input is the state concatenated with a learned per-step embedding
/// row; hidden layers use tanh, the output layer is linear. dims.front() is
/// the input width (state dim + embedding dim), dims.back() the state dim.
struct MlpModel {
    std::vector<int> dims;                  // layer widths, input..output
    std::vector<Eigen::MatrixXd> weights;   // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd time_embedding;         // T x (dims.front() - dims.back())

    int state_dim() const { return dims.back(); }
    int embed_dim() const { return dims.front() - dims.back(); }
    int T() const { return static_cast<int>(time_embedding.rows()); }

    /// Noise prediction for state x at step t (1-based row of the table).
    Eigen::VectorXd epsilon(const Eigen::VectorXd& x, int t) const;

    /// Transposed Jacobian of epsilon with respect to x, applied to v.
    Eigen::VectorXd epsilon_vjp(const Eigen::VectorXd& x, int t,
                                const Eigen::VectorXd& v) const;
};

/// Checkpoint format "CPMLP1": magic line, ASCII "dims d0 .. dk" line,
/// ASCII "T <int>" line, then little-endian float64 payload: per layer the
/// row-major weight matrix then the bias vector, finally the row-major
/// time-embedding table. Embedding width is implied by d0 - dk.
void save_mlp(const MlpModel& model, std::ostream& out);
MlpModel load_mlp(std::istream& in);

/// Denoiser adapter: value = (x - sqrt(1-ab_t) * eps(x,t)) / sqrt(ab_t).
/// `source_steps`, when non-empty, maps runtime step t to the model's own
/// step index (for subsampled schedules); it must be 1-based, one entry per
/// runtime step.
class MlpDenoiser : public Denoiser {
  public:
    MlpDenoiser(const MlpModel& model, const NoiseSchedule& schedule,
                std::vector<int> source_steps = {});

    int dim() const override { return model_->state_dim(); }
    Eigen::VectorXd value(const Eigen::VectorXd& x, int t) const override;
    Eigen::VectorXd vjp(const Eigen::VectorXd& x, int t,
                        const Eigen::VectorXd& v) const override;

  private:
    int model_step(int t) const;

    const MlpModel* model_;
    const NoiseSchedule* schedule_;
    std::vector<int> source_steps_;
};

struct TrainConfig {
    std::vector<int> hidden = {64, 64};
    int embed_dim = 8;
    int epochs = 200;
    int batch = 32;
    double lr = 0.05;
    std::uint64_t seed = 0;
};

struct TrainResult {
    MlpModel model;
    double final_loss = 0.0;      // evaluation loss after the last epoch
    double baseline_loss = 0.0;   // same evaluation with the zero predictor
    std::vector<double> epoch_losses;
};

/// Noise-prediction training by plain minibatch gradient descent: each
/// visit draws a step t and a noise vector, corrupts the clean sample, and
/// regresses the drawn noise. Deterministic given config.seed (fixed
/// shuffles, fixed draw order, single thread). Throws NumericError if the
/// loss leaves the finite range.
TrainResult train_mlp(const std::vector<Eigen::VectorXd>& dataset,
                      const NoiseSchedule& schedule, const TrainConfig& config);

}  // namespace copaint
