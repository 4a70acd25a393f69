#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace copaint {

/// Flattened row-major grid; height 1 means a plain vector of length width.
struct Geometry {
    int height = 1;
    int width = 0;
    int size() const { return height * width; }
};

/// Linear measurement operator r mapping a state to its revealed part.
/// Two kinds: coordinate selection by a boolean mask, and block-mean
/// average pooling (1-D factor k, or k x k on a 2-D geometry). adjoint() is
/// the exact transpose; pinv_apply() is the Moore-Penrose right inverse
/// (equal to the adjoint for masks, block-size-scaled for pooling).
class RevealOperator {
  public:
    enum class Kind { PixelMask, AvgPool };

    static RevealOperator pixel_mask(std::vector<std::uint8_t> mask);
    static RevealOperator avg_pool(const Geometry& geometry, int factor);

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd adjoint(const Eigen::VectorXd& v) const;
    Eigen::VectorXd pinv_apply(const Eigen::VectorXd& v) const;

    Kind kind() const { return kind_; }
    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    int factor() const { return factor_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    /// Ascending revealed coordinate indices (mask kind only).
    const std::vector<int>& revealed_indices() const { return revealed_; }

  private:
    RevealOperator() = default;

    Kind kind_ = Kind::PixelMask;
    int input_dim_ = 0;
    int output_dim_ = 0;
    int factor_ = 1;
    int block_elems_ = 1;          // elements averaged per output (k or k*k)
    Geometry geometry_;
    std::vector<std::uint8_t> mask_;
    std::vector<int> revealed_;
    std::vector<std::vector<int>> blocks_;  // pooling: input indices per output
};

/// Revealed values plus the operator that produced them.
struct Observation {
    Eigen::VectorXd s0;
    RevealOperator op;
};

Observation observe(const RevealOperator& op, const Eigen::VectorXd& reference);

/// Named mask family over a geometry. Seeded names (narrow, wide, text)
/// are deterministic given the seed; the rest ignore it.
///   expand - central quarter revealed
///   half   - first half of the flattened coordinates revealed
///   altern - every other coordinate revealed
///   sr     - average pooling, factor 2
///   narrow - all revealed except one thin contiguous band (seeded)
///   wide   - all revealed except one thick contiguous band (seeded)
///   text   - scattered coordinates hidden (seeded, ~25%)
/// Throws std::invalid_argument for unknown names.
RevealOperator standard_mask(const std::string& name, const Geometry& geometry,
                             std::uint64_t seed);

/// Mask file format: "mask N\n" then N characters '0' (hidden) / '1'
/// (revealed).
void save_mask(const std::vector<std::uint8_t>& mask, std::ostream& out);
std::vector<std::uint8_t> load_mask(std::istream& in);

}  // namespace copaint
