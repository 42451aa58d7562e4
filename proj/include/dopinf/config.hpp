#pragma once

#include <map>
#include <string>
#include <vector>

namespace dopinf::config {

/// Flat `key = value` settings file: UTF-8 lines, `#` line comments,
/// blank lines ignored, later duplicates override earlier ones. Lists
/// are comma-separated scalars.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key) const;
    double get_real(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_flag(const std::string& key, bool fallback) const;  // on/off/true/false/1/0
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

}  // namespace dopinf::config
