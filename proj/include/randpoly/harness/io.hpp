#ifndef RANDPOLY_HARNESS_IO_HPP
#define RANDPOLY_HARNESS_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <openssl/evp.h>

namespace randpoly::harness {

/// One long-format record. Optional fields are written as empty cells.
struct Row {
    int trial = 0;
    std::string functional;
    std::optional<int> k;
    std::optional<double> q;
    std::optional<double> t;
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
};

inline constexpr const char* csv_header = "trial,functional,k,q,t,value,stderr,budget,seed";

/// Shortest round-trip decimal form, so reruns compare byte for byte.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

inline std::string csv_line(const Row& r)
{
    std::string s = std::to_string(r.trial);
    s += ',';
    s += r.functional;
    s += ',';
    if (r.k)
        s += std::to_string(*r.k);
    s += ',';
    if (r.q)
        s += format_double(*r.q);
    s += ',';
    if (r.t)
        s += format_double(*r.t);
    s += ',';
    s += format_double(r.value);
    s += ',';
    s += format_double(r.stderr_);
    s += ',';
    s += std::to_string(r.budget);
    s += ',';
    s += std::to_string(r.seed);
    return s;
}

inline std::string csv_document(const std::vector<Row>& rows)
{
    std::string out = csv_header;
    out += '\n';
    for (const auto& r : rows) {
        out += csv_line(r);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace detail

inline std::vector<Row> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != csv_header)
        throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto c = detail::split_csv(line);
        if (c.size() != 9)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 9 cells");
        Row r;
        r.trial = std::stoi(c[0]);
        r.functional = c[1];
        if (!c[2].empty())
            r.k = std::stoi(c[2]);
        if (!c[3].empty())
            r.q = std::stod(c[3]);
        if (!c[4].empty())
            r.t = std::stod(c[4]);
        r.value = std::stod(c[5]);
        r.stderr_ = std::stod(c[6]);
        r.budget = std::stoull(c[7]);
        r.seed = std::stoull(c[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Write via a temporary sibling and rename, so readers never see a torn file.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Point-cloud text format: a header "n N seed" and then N lines of n
/// coordinates each.
inline std::string point_cloud_text(const Eigen::MatrixXd& points, std::uint64_t seed)
{
    std::string s = std::to_string(points.cols()) + ' ' + std::to_string(points.rows()) + ' ' + std::to_string(seed) + '\n';
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) {
            if (j)
                s += ' ';
            s += format_double(points(i, j));
        }
        s += '\n';
    }
    return s;
}

inline void write_point_cloud(const std::filesystem::path& path, const Eigen::MatrixXd& points, std::uint64_t seed)
{
    write_atomic(path, point_cloud_text(points, seed));
}

struct PointCloud {
    Eigen::MatrixXd points;
    std::uint64_t seed = 0;
};

inline PointCloud read_point_cloud(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    long long n = 0, count = 0;
    PointCloud pc;
    if (!(in >> n >> count >> pc.seed) || n < 1 || count < 0)
        throw std::runtime_error(path.string() + ": bad header");
    pc.points.resize(count, n);
    for (long long i = 0; i < count; ++i)
        for (long long j = 0; j < n; ++j)
            if (!(in >> pc.points(i, j)))
                throw std::runtime_error(path.string() + ": truncated at point " + std::to_string(i));
    return pc;
}

} // namespace randpoly::harness

#endif // RANDPOLY_HARNESS_IO_HPP
