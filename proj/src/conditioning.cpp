#include "copaint/conditioning.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "copaint/rng.hpp"

namespace copaint {

RevealOperator RevealOperator::pixel_mask(std::vector<std::uint8_t> mask) {
    if (mask.empty()) throw std::invalid_argument("pixel_mask: empty mask");
    RevealOperator op;
    op.kind_ = Kind::PixelMask;
    op.input_dim_ = static_cast<int>(mask.size());
    op.mask_ = std::move(mask);
    for (int i = 0; i < op.input_dim_; ++i)
        if (op.mask_[static_cast<std::size_t>(i)]) op.revealed_.push_back(i);
    op.output_dim_ = static_cast<int>(op.revealed_.size());
    return op;
}

RevealOperator RevealOperator::avg_pool(const Geometry& geometry, int factor) {
    if (geometry.size() < 1) throw std::invalid_argument("avg_pool: empty geometry");
    if (factor < 1) throw std::invalid_argument("avg_pool: factor must be >= 1");
    RevealOperator op;
    op.kind_ = Kind::AvgPool;
    op.geometry_ = geometry;
    op.factor_ = factor;
    op.input_dim_ = geometry.size();
    if (geometry.height == 1) {
        if (geometry.width % factor != 0)
            throw std::invalid_argument("avg_pool: length not divisible by factor");
        op.block_elems_ = factor;
        for (int b = 0; b < geometry.width / factor; ++b) {
            std::vector<int> block;
            for (int i = 0; i < factor; ++i) block.push_back(b * factor + i);
            op.blocks_.push_back(std::move(block));
        }
    } else {
        if (geometry.height % factor != 0 || geometry.width % factor != 0)
            throw std::invalid_argument("avg_pool: grid not divisible by factor");
        op.block_elems_ = factor * factor;
        for (int br = 0; br < geometry.height / factor; ++br)
            for (int bc = 0; bc < geometry.width / factor; ++bc) {
                std::vector<int> block;
                for (int r = 0; r < factor; ++r)
                    for (int c = 0; c < factor; ++c)
                        block.push_back((br * factor + r) * geometry.width +
                                        bc * factor + c);
                op.blocks_.push_back(std::move(block));
            }
    }
    op.output_dim_ = static_cast<int>(op.blocks_.size());
    return op;
}

Eigen::VectorXd RevealOperator::apply(const Eigen::VectorXd& x) const {
    if (static_cast<int>(x.size()) != input_dim_)
        throw std::invalid_argument("reveal apply: dimension mismatch");
    Eigen::VectorXd out(output_dim_);
    if (kind_ == Kind::PixelMask) {
        for (int j = 0; j < output_dim_; ++j)
            out[j] = x[revealed_[static_cast<std::size_t>(j)]];
    } else {
        for (int j = 0; j < output_dim_; ++j) {
            double sum = 0.0;
            for (int i : blocks_[static_cast<std::size_t>(j)]) sum += x[i];
            out[j] = sum / block_elems_;
        }
    }
    return out;
}

Eigen::VectorXd RevealOperator::adjoint(const Eigen::VectorXd& v) const {
    if (static_cast<int>(v.size()) != output_dim_)
        throw std::invalid_argument("reveal adjoint: dimension mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(input_dim_);
    if (kind_ == Kind::PixelMask) {
        for (int j = 0; j < output_dim_; ++j)
            out[revealed_[static_cast<std::size_t>(j)]] = v[j];
    } else {
        for (int j = 0; j < output_dim_; ++j)
            for (int i : blocks_[static_cast<std::size_t>(j)])
                out[i] = v[j] / block_elems_;
    }
    return out;
}

Eigen::VectorXd RevealOperator::pinv_apply(const Eigen::VectorXd& v) const {
    // r r^T = I for masks and I / block_elems for pooling, so the
    // Moore-Penrose right inverse is the adjoint scaled by block size.
    if (kind_ == Kind::PixelMask) return adjoint(v);
    return static_cast<double>(block_elems_) * adjoint(v);
}

Observation observe(const RevealOperator& op, const Eigen::VectorXd& reference) {
    return Observation{op.apply(reference), op};
}

namespace {

std::vector<std::uint8_t> band_mask(int n, int band_len, std::uint64_t seed) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 1);
    Rng rng(seed);
    int start = static_cast<int>(rng.uniform() * (n - band_len + 1));
    start = std::min(start, n - band_len);
    for (int i = start; i < start + band_len; ++i)
        mask[static_cast<std::size_t>(i)] = 0;
    return mask;
}

}  // namespace

RevealOperator standard_mask(const std::string& name, const Geometry& geometry,
                             std::uint64_t seed) {
    const int n = geometry.size();
    if (n < 1) throw std::invalid_argument("standard_mask: empty geometry");
    if (name == "sr") return RevealOperator::avg_pool(geometry, 2);

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
    if (name == "half") {
        for (int i = 0; i < n / 2; ++i) mask[static_cast<std::size_t>(i)] = 1;
    } else if (name == "altern") {
        for (int i = 0; i < n; i += 2) mask[static_cast<std::size_t>(i)] = 1;
    } else if (name == "expand") {
        // Central quarter of the area: a centred run in 1-D, a centred
        // half-height x half-width rectangle in 2-D.
        if (geometry.height == 1) {
            int len = std::max(1, n / 4);
            int start = (n - len) / 2;
            for (int i = start; i < start + len; ++i)
                mask[static_cast<std::size_t>(i)] = 1;
        } else {
            int h = std::max(1, geometry.height / 2);
            int w = std::max(1, geometry.width / 2);
            int r0 = (geometry.height - h) / 2;
            int c0 = (geometry.width - w) / 2;
            for (int r = r0; r < r0 + h; ++r)
                for (int c = c0; c < c0 + w; ++c)
                    mask[static_cast<std::size_t>(r * geometry.width + c)] = 1;
        }
    } else if (name == "narrow") {
        mask = band_mask(n, std::max(1, n / 8), seed);
    } else if (name == "wide") {
        mask = band_mask(n, std::max(1, n / 2), seed);
    } else if (name == "text") {
        Rng rng(seed);
        for (int i = 0; i < n; ++i)
            mask[static_cast<std::size_t>(i)] = rng.uniform() < 0.25 ? 0 : 1;
    } else {
        throw std::invalid_argument("standard_mask: unknown name '" + name + "'");
    }
    return RevealOperator::pixel_mask(std::move(mask));
}

void save_mask(const std::vector<std::uint8_t>& mask, std::ostream& out) {
    out << "mask " << mask.size() << "\n";
    for (std::uint8_t m : mask) out << (m ? '1' : '0');
    out << "\n";
}

std::vector<std::uint8_t> load_mask(std::istream& in) {
    std::string tag;
    long n = 0;
    in >> tag >> n;
    if (!in || tag != "mask" || n < 1)
        throw std::invalid_argument("mask file: bad header");
    std::vector<std::uint8_t> mask;
    mask.reserve(static_cast<std::size_t>(n));
    char c;
    while (static_cast<long>(mask.size()) < n && in >> c) {
        if (c == '0')
            mask.push_back(0);
        else if (c == '1')
            mask.push_back(1);
        else
            throw std::invalid_argument("mask file: expected '0'/'1'");
    }
    if (static_cast<long>(mask.size()) != n)
        throw std::invalid_argument("mask file: truncated");
    return mask;
}

}  // namespace copaint
