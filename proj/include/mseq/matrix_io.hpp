#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "report.hpp"

namespace mseq {

// Binary layout: "MSEQ1", u32 rows, u32 cols, rows*cols float64, all little-endian, row-major.
inline constexpr std::array<char, 5> kMatrixMagic{'M', 'S', 'E', 'Q', '1'};

namespace detail {

inline double parse_number(const std::string& cell, const char* where) {
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw InvalidInput(std::string(where) + ": empty cell");
    const std::string s = cell.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw InvalidInput(std::string(where) + ": bad number '" + s + "'");
    return v;
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw InvalidInput("binary matrix: truncated file");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace detail

/// Dense row-major CSV; blank lines and '#' comments are skipped.
inline Eigen::MatrixXd read_matrix_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(detail::parse_number(cell, "matrix CSV"));
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInput("matrix CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput("matrix CSV: no rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
        os << "\n";
    }
}

inline void write_matrix_binary(std::ostream& os, const Eigen::MatrixXd& m) {
    os.write(kMatrixMagic.data(), kMatrixMagic.size());
    detail::put_u32(os, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(os, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) detail::put_u64(os, std::bit_cast<std::uint64_t>(m(i, j)));
}

inline Eigen::MatrixXd read_matrix_binary(std::istream& is) {
    std::array<char, 5> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMatrixMagic)
        throw InvalidInput("binary matrix: missing MSEQ1 header");
    const auto rows = static_cast<Eigen::Index>(detail::get_le(is, 4));
    const auto cols = static_cast<Eigen::Index>(detail::get_le(is, 4));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::bit_cast<double>(detail::get_le(is, 8));
    return m;
}

/// Loads a matrix file, binary if it starts with the MSEQ1 magic, CSV otherwise.
inline Eigen::MatrixXd load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open matrix file '" + path + "'");
    std::array<char, 5> head{};
    in.read(head.data(), head.size());
    const bool binary = in.gcount() == 5 && head == kMatrixMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_matrix_binary(in) : read_matrix_csv(in);
}

/// Vector from a CSV file: values separated by commas and/or newlines.
inline Eigen::VectorXd load_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open data file '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(detail::parse_number(cell, "data CSV"));
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace mseq
