#include "copaint/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace copaint {

namespace {

// Reverse-step noise scale between consecutive effective steps with
// cumulative products ab_prev > ab_cur:
//   sigma = eta * sqrt((1 - ab_prev) / (1 - ab_cur)) * sqrt(1 - ab_cur / ab_prev)
// With eta = 1 this equals the ancestral-sampling variance; the first step
// (ab_prev = 1) gets sigma = 0.
double sigma_rule(double eta, double ab_prev, double ab_cur) {
    if (ab_prev >= 1.0) return 0.0;
    return eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab_cur)) *
           std::sqrt(1.0 - ab_cur / ab_prev);
}

}  // namespace

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    return alpha_bar_.at(check(t) - 1);
}

int NoiseSchedule::check(int t) const {
    if (t < 1 || t > T())
        throw std::invalid_argument("schedule: step " + std::to_string(t) +
                                    " outside 1.." + std::to_string(T()));
    return t;
}

void NoiseSchedule::derive_from_beta() {
    const int T = static_cast<int>(beta_.size());
    alpha_.resize(T);
    alpha_bar_.resize(T);
    sigma_.resize(T);
    double ab = 1.0;
    for (int i = 0; i < T; ++i) {
        double b = beta_[i];
        if (!(b > 0.0 && b < 1.0))
            throw std::invalid_argument("schedule: beta outside (0,1)");
        alpha_[i] = 1.0 - b;
        double ab_prev = ab;
        ab *= alpha_[i];
        alpha_bar_[i] = ab;
        sigma_[i] = sigma_rule(eta_, ab_prev, ab);
        // The deterministic part of the reverse step needs
        // 1 - ab_prev - sigma^2 >= 0.
        if (sigma_[i] * sigma_[i] > 1.0 - ab_prev + 1e-15)
            throw std::invalid_argument(
                "schedule: sigma exceeds the reverse-step budget at step " +
                std::to_string(i + 1));
        if (!(ab > 0.0))
            throw std::invalid_argument("schedule: alpha_bar underflowed to 0");
    }
}

NoiseSchedule build_linear_schedule(int T, double beta_start, double beta_end,
                                    double eta) {
    if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end))
        throw std::invalid_argument("schedule: need 0 < beta_start <= beta_end < 1");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("schedule: eta must lie in [0,1]");

    NoiseSchedule s;
    s.eta_ = eta;
    s.beta_.resize(T);
    for (int i = 0; i < T; ++i) {
        double frac = (T == 1) ? 0.0 : static_cast<double>(i) / (T - 1);
        s.beta_[i] = beta_start + (beta_end - beta_start) * frac;
    }
    s.derive_from_beta();
    return s;
}

NoiseSchedule subsequence(const NoiseSchedule& source,
                          const std::vector<int>& steps) {
    if (steps.empty()) throw std::invalid_argument("subsequence: empty selection");
    if (steps.back() != source.T())
        throw std::invalid_argument("subsequence: last index must equal T");
    int prev = 0;
    for (int t : steps) {
        if (t <= prev || t > source.T())
            throw std::invalid_argument(
                "subsequence: indices must be strictly increasing in 1..T");
        prev = t;
    }

    NoiseSchedule s;
    s.eta_ = source.eta();
    const int n = static_cast<int>(steps.size());
    s.beta_.resize(n);
    s.alpha_.resize(n);
    s.alpha_bar_.resize(n);
    s.sigma_.resize(n);
    double ab_prev = 1.0;
    for (int j = 0; j < n; ++j) {
        double ab = source.alpha_bar(steps[j]);  // exact pointwise lookup
        s.alpha_bar_[j] = ab;
        s.alpha_[j] = ab / ab_prev;
        s.beta_[j] = 1.0 - s.alpha_[j];
        s.sigma_[j] = sigma_rule(source.eta(), ab_prev, ab);
        ab_prev = ab;
    }
    return s;
}

std::vector<int> evenly_spaced_steps(int T, int n) {
    if (n < 1 || n > T)
        throw std::invalid_argument("evenly_spaced_steps: need 1 <= n <= T");
    std::vector<int> steps;
    steps.reserve(n);
    for (int k = 1; k <= n; ++k) {
        int idx = static_cast<int>(std::llround(static_cast<double>(k) * T / n));
        if (steps.empty() || idx > steps.back()) steps.push_back(idx);
    }
    steps.back() = T;
    return steps;
}

}  // namespace copaint
