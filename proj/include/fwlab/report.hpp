#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwlab/error.hpp"
#include "fwlab/grid.hpp"

namespace fwlab {

inline constexpr const char* tool_version = "0.1.0";

using Json = nlohmann::ordered_json;

// Comma-separated table with a fixed header; doubles are written in shortest round-trip form.
class CsvTable {
public:
    CsvTable(const std::string& path, std::initializer_list<const char*> header) : path_(path), out_(path) {
        if (!out_) throw ConfigError("cannot open " + path + " for writing");
        columns_ = header.size();
        bool first = true;
        for (const char* h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    CsvTable& operator<<(double v) { return cell(format_double(v)); }
    CsvTable& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    CsvTable& operator<<(int v) { return cell(std::to_string(v)); }
    CsvTable& operator<<(bool v) { return cell(v ? "true" : "false"); }
    CsvTable& operator<<(const std::string& v) { return cell(v); }
    CsvTable& operator<<(const char* v) { return cell(v); }

    void end_row() {
        if (filled_ != columns_)
            throw ConfigError(path_ + ": row has " + std::to_string(filled_) + " cells, expected " +
                              std::to_string(columns_));
        out_ << '\n';
        filled_ = 0;
    }

private:
    CsvTable& cell(const std::string& s) {
        out_ << (filled_ == 0 ? "" : ",") << s;
        ++filled_;
        return *this;
    }

    std::string path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
    std::size_t filled_ = 0;
};

inline void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

inline std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// NaN and infinities have no JSON literal; they become null.
inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json meta_document(const std::string& command, const Json& resolved_config) {
    Json m;
    m["tool"] = "fwlab";
    m["version"] = tool_version;
    m["command"] = command;
    m["created"] = utc_timestamp();
    m["config"] = resolved_config;
    return m;
}

}  // namespace fwlab
