#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace mseq {

using Json = nlohmann::ordered_json;

/// Header comment carried by every CSV the tools emit.
inline constexpr const char* kSchemaHeader = "# minimax-seq v1";

/// 17 significant digits, round-trip safe. Non-finite values print as inf/-inf/nan.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void dump_json(std::ostream& os, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) { os << "{}"; return; }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << Json(it.key()).dump() << ": ";
            dump_json(os, it.value(), indent, depth + 1);
        }
        os << "\n" << close_pad << "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) { os << "[]"; return; }
        // Arrays of scalars stay on one line.
        bool scalars = true;
        for (const auto& e : j) scalars = scalars && !e.is_structured();
        if (scalars) {
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                dump_json(os, j[i], indent, depth + 1);
            }
            os << "]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            dump_json(os, j[i], indent, depth + 1);
        }
        os << "\n" << close_pad << "]";
        return;
    }
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        // JSON has no inf/nan
        if (std::isfinite(x)) os << format_double(x);
        else os << "null";
        return;
    }
    default:
        os << j.dump();
    }
}

} // namespace detail

/// Stable, pretty-printed JSON with 17-significant-digit floats and a trailing newline.
inline std::string emit_json(const Json& j) {
    std::ostringstream os;
    detail::dump_json(os, j, 2, 0);
    os << "\n";
    return os.str();
}

/// CSV writer with the schema header, optional metadata comment, and a column header.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns, const std::string& metadata = {})
        : os_(os) {
        os_ << kSchemaHeader << "\n";
        if (!metadata.empty()) os_ << "# " << metadata << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
        os_ << "\n";
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
        os_ << "\n";
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }

    std::ostream& os_;
};

inline Json json_array(std::span<const double> xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(x);
    return a;
}

} // namespace mseq
