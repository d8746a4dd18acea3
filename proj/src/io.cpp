#include "spakit/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "spakit/error.hpp"

namespace spakit::io {

namespace {

double parse_double(const std::string& token, std::size_t line) {
    std::size_t first = token.find_first_not_of(" \t\r");
    std::size_t last = token.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
        throw IoError(fmt::format("line {}: empty field", line));
    }
    const std::string trimmed = token.substr(first, last - first + 1);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(trimmed.c_str(), &end);
    if (end != trimmed.c_str() + trimmed.size() || errno == ERANGE) {
        throw IoError(fmt::format("line {}: cannot parse '{}' as a real number", line, trimmed));
    }
    return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    }
    return in;
}

}  // namespace

DataMatrix read_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::size_t count = 0;
        while (std::getline(ss, field, ',')) {
            values.push_back(parse_double(field, lineno));
            ++count;
        }
        if (!line.empty() && line.back() == ',') {
            throw IoError(fmt::format("line {}: trailing comma", lineno));
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw IoError(fmt::format("line {}: expected {} fields, found {}", lineno, cols, count));
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) {
        throw IoError("CSV input holds no data");
    }
    Dense M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
        }
    }
    try {
        return DataMatrix(std::move(M));
    } catch (const InvalidArgument& e) {
        throw IoError(e.what());
    }
}

DataMatrix read_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_csv(in);
}

DataMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("Matrix Market input is empty");
    }
    std::string lowered = line;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::istringstream banner(lowered);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate" || field != "real" ||
        symmetry != "general") {
        throw IoError("expected '%%MatrixMarket matrix coordinate real general' header");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '%') {
            break;
        }
    }
    long long rows = 0, cols = 0, entries = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> entries) || rows < 1 || cols < 1 || entries < 0) {
            throw IoError(fmt::format("line {}: invalid size line", lineno));
        }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(entries));
    for (long long k = 0; k < entries; ++k) {
        if (!std::getline(in, line)) {
            throw IoError(fmt::format("expected {} entries, found {}", entries, k));
        }
        ++lineno;
        std::istringstream entry(line);
        long long i = 0, j = 0;
        std::string value;
        if (!(entry >> i >> j >> value) || i < 1 || i > rows || j < 1 || j > cols) {
            throw IoError(fmt::format("line {}: invalid coordinate entry", lineno));
        }
        triplets.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), parse_double(value, lineno));
    }
    Sparse S(rows, cols);
    S.setFromTriplets(triplets.begin(), triplets.end());
    try {
        return DataMatrix(std::move(S));
    } catch (const InvalidArgument& e) {
        throw IoError(e.what());
    }
}

DataMatrix read_matrix_market(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_matrix_market(in);
}

void write_csv(std::ostream& out, const Dense& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            out << (j ? "," : "") << fmt::format("{:.17g}", M(i, j));
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Dense& M) {
    std::ofstream out(path);
    if (!out) {
        throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    }
    write_csv(out, M);
    if (!out) {
        throw IoError(fmt::format("write to '{}' failed", path.string()));
    }
}

void write_matrix_market(std::ostream& out, const Sparse& M) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
    for (Eigen::Index j = 0; j < M.outerSize(); ++j) {
        for (Sparse::InnerIterator it(M, j); it; ++it) {
            out << it.row() + 1 << ' ' << j + 1 << ' ' << fmt::format("{:.17g}", it.value()) << '\n';
        }
    }
}

}  // namespace spakit::io
