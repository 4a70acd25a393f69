#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "copaint/conditioning.hpp"

namespace copaint {

/// 8-bit binary PGM (P5, maxval 255). Pixel p maps to x = p / 127.5 - 1;
/// writing rounds clamp(x, -1, 1) * 127.5 + 127.5, so every byte value
/// round-trips exactly.
struct PgmImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};
PgmImage pgm_from_state(const Eigen::VectorXd& x, const Geometry& geometry);
Eigen::VectorXd state_from_pgm(const PgmImage& image);
void save_pgm(const PgmImage& image, std::ostream& out);
PgmImage load_pgm(std::istream& in);

/// Plain-text vector: header "vec N", then one value per line (%.17g,
/// lossless for doubles).
void save_vector(const Eigen::VectorXd& x, std::ostream& out);
Eigen::VectorXd load_vector(std::istream& in);

/// Flat "key = value" configuration file. Blank lines and lines starting
/// with '#' are skipped. Later keys overwrite earlier ones.
using KeyValueMap = std::map<std::string, std::string>;
KeyValueMap load_key_values(std::istream& in);
void save_key_values(const KeyValueMap& map, std::ostream& out);

/// Lossless double formatting used by every text format in the project.
std::string format_double(double v);

/// FNV-1a 64-bit over a file's bytes; identifies model checkpoints in
/// manifests. Throws std::invalid_argument if the file cannot be read.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hash_hex(std::uint64_t h);

/// CSV helpers: header row plus rows of preformatted cells, LF endings,
/// '.' decimal separator via format_double.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace copaint
