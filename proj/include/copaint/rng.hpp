#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace copaint {

/// Deterministic random source used everywhere in the library.
///
/// Engine: std::mt19937_64 (output sequence fixed by the C++ standard).
/// Uniforms take the top 53 bits of one engine draw; normals come from the
/// basic Box-Muller transform (one pair per two uniforms, second value
/// cached). Given a seed, every draw sequence is reproducible bit for bit
/// across builds of this project.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream for run `index` of a batch, decorrelated from the base seed
    /// via splitmix64 so per-run streams never overlap by construction.
    static Rng substream(std::uint64_t seed, std::uint64_t index);

    /// Uniform draw in [0, 1).
    double uniform();

    /// Standard normal draw.
    double normal();

    Eigen::VectorXd normal_vector(Eigen::Index n);

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 mix step; exposed for seed derivation in tools.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace copaint
