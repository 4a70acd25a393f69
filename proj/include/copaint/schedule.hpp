#pragma once

#include <vector>

namespace copaint {

/// Diffusion noise schedule over steps t = 1..T, with the convention
/// alpha_bar(0) = 1. All sequences are stored 1-indexed via accessors;
/// sigma(1) is always 0 so the final reverse step is deterministic.
class NoiseSchedule {
  public:
    NoiseSchedule() = default;

    int T() const { return static_cast<int>(beta_.size()); }
    double beta(int t) const { return beta_.at(check(t) - 1); }
    double alpha(int t) const { return alpha_.at(check(t) - 1); }
    double sigma(int t) const { return sigma_.at(check(t) - 1); }
    double sigma2(int t) const { double s = sigma(t); return s * s; }

    /// alpha_bar(0) == 1 by convention; otherwise the cumulative product.
    double alpha_bar(int t) const;

    double eta() const { return eta_; }

    friend NoiseSchedule build_linear_schedule(int T, double beta_start,
                                               double beta_end, double eta);
    friend NoiseSchedule subsequence(const NoiseSchedule& source,
                                     const std::vector<int>& steps);

  private:
    int check(int t) const;
    void derive_from_beta();  // fills alpha_, alpha_bar_, sigma_ and validates

    std::vector<double> beta_, alpha_, alpha_bar_, sigma_;
    double eta_ = 0.0;
};

/// Linear beta ramp from beta_start to beta_end over T steps.
/// eta in [0,1] scales the reverse-step noise: eta = 0 gives the
/// deterministic sampler, eta = 1 matches ancestral sampling variance.
/// Throws std::invalid_argument on T < 1, betas outside (0,1),
/// beta_start > beta_end, or eta outside [0,1].
NoiseSchedule build_linear_schedule(int T, double beta_start, double beta_end,
                                    double eta);

/// Restriction of `source` to the strictly increasing 1-based indices
/// `steps`, whose last entry must be source.T(). alpha_bar values are exact
/// pointwise lookups; per-step beta and sigma are recomputed over
/// consecutive selected pairs with the source's eta rule.
NoiseSchedule subsequence(const NoiseSchedule& source,
                          const std::vector<int>& steps);

/// Evenly spaced 1-based indices ending at T: round(k*T/n) for k = 1..n,
/// deduplicated. Convenience for subsampled sampling runs.
std::vector<int> evenly_spaced_steps(int T, int n);

}  // namespace copaint
