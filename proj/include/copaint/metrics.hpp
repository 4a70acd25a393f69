#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "copaint/conditioning.hpp"
#include "copaint/denoiser.hpp"
#include "copaint/rng.hpp"
#include "copaint/schedule.hpp"

namespace copaint {

/// Mean and max absolute deviation of r(x0) from the observed values.
struct ConstraintError {
    double mean_abs = 0.0;
    double max_abs = 0.0;
};
ConstraintError constraint_error(const Observation& obs,
                                 const Eigen::VectorXd& x0);

/// Mean absolute difference over mirror pairs (i, N-1-i), i < N/2.
/// Requires even dimension.
double coherence_error_mirror(const Eigen::VectorXd& x0);

/// Mean distance between the step-t clean estimate and the run's final
/// output, |f(x_t) - x0|_2 / sqrt(N), averaged over n_runs unconditional
/// deterministic rollouts. Returned t-descending, T..1; the t = 1 entry is
/// exactly 0 because the last reverse step is the t = 1 estimate itself.
std::vector<std::pair<int, double>> gap_trajectory(const NoiseSchedule& schedule,
                                                   const Denoiser& denoiser,
                                                   int n_runs, Rng& rng);

/// Monte Carlo constraint-gap variance at step t over unconditional
/// trajectories of the schedule as built (its own sigma rule):
/// mean of |r(f(x_t)) - r(x0)|^2 / output_dim.
double calibrate_xi(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const RevealOperator& op, int t, int n_samples, Rng& rng);

/// Scalar summary of one run, serialized one CSV row per run.
struct MetricReport {
    double constraint_mean_abs = 0.0;
    double constraint_max_abs = 0.0;
    double coherence_error = 0.0;
};
MetricReport make_report(const Observation& obs, const Eigen::VectorXd& x0);

double median(std::vector<double> values);

}  // namespace copaint
