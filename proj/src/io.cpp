#include "copaint/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace copaint {

namespace {

[[noreturn]] void bad_format(const std::string& what) {
    throw std::invalid_argument("parse error: " + what);
}

// PNM token reader: skips whitespace and '#' comment lines.
std::string next_pnm_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token;
}

int parse_int(const std::string& token, const char* what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(token, &used);
        if (used != token.size()) bad_format(std::string("bad ") + what);
        return v;
    } catch (const std::invalid_argument&) {
        bad_format(std::string("bad ") + what);
    } catch (const std::out_of_range&) {
        bad_format(std::string("bad ") + what);
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

PgmImage pgm_from_state(const Eigen::VectorXd& x, const Geometry& geometry) {
    if (x.size() != geometry.size())
        throw std::invalid_argument("pgm_from_state: geometry mismatch");
    PgmImage image;
    image.height = geometry.height;
    image.width = geometry.width;
    image.pixels.resize(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double v = std::clamp(x[i], -1.0, 1.0) * 127.5 + 127.5;
        image.pixels[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(std::lround(v));
    }
    return image;
}

Eigen::VectorXd state_from_pgm(const PgmImage& image) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(image.pixels.size()));
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        x[static_cast<Eigen::Index>(i)] =
            static_cast<double>(image.pixels[i]) / 127.5 - 1.0;
    return x;
}

void save_pgm(const PgmImage& image, std::ostream& out) {
    if (image.height < 1 || image.width < 1 ||
        image.pixels.size() !=
            static_cast<std::size_t>(image.height) *
                static_cast<std::size_t>(image.width))
        throw std::invalid_argument("save_pgm: inconsistent image");
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
}

PgmImage load_pgm(std::istream& in) {
    if (next_pnm_token(in) != "P5") bad_format("not a binary PGM (P5) file");
    PgmImage image;
    image.width = parse_int(next_pnm_token(in), "PGM width");
    image.height = parse_int(next_pnm_token(in), "PGM height");
    if (image.width < 1 || image.height < 1) bad_format("bad PGM geometry");
    if (parse_int(next_pnm_token(in), "PGM maxval") != 255)
        bad_format("PGM maxval must be 255");
    std::size_t count = static_cast<std::size_t>(image.width) *
                        static_cast<std::size_t>(image.height);
    image.pixels.resize(count);
    in.read(reinterpret_cast<char*>(image.pixels.data()),
            static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        bad_format("truncated PGM payload");
    return image;
}

void save_vector(const Eigen::VectorXd& x, std::ostream& out) {
    out << "vec " << x.size() << "\n";
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out << format_double(x[i]) << "\n";
}

Eigen::VectorXd load_vector(std::istream& in) {
    std::string magic;
    long long n = -1;
    if (!(in >> magic >> n) || magic != "vec" || n < 0)
        bad_format("expected 'vec N' header");
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (long long i = 0; i < n; ++i)
        if (!(in >> x[static_cast<Eigen::Index>(i)]))
            bad_format("truncated vector payload");
    return x;
}

KeyValueMap load_key_values(std::istream& in) {
    KeyValueMap map;
    std::string line;
    while (std::getline(in, line)) {
        std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            bad_format("expected 'key = value', got: " + body);
        std::string key = trim(body.substr(0, eq));
        if (key.empty()) bad_format("empty key in: " + body);
        map[key] = trim(body.substr(eq + 1));
    }
    return map;
}

void save_key_values(const KeyValueMap& map, std::ostream& out) {
    for (const auto& [key, value] : map) out << key << " = " << value << "\n";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot read file: " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<std::uint8_t>(chunk[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto write_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ",";
            out << cells[i];
        }
        out << "\n";
    };
    write_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: ragged row");
        write_row(row);
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::invalid_argument("cannot write file: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::invalid_argument("failed writing: " + path.string());
}

}  // namespace copaint
