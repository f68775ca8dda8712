#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cphs {

// Plain-text sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Section and key lookups are exact; values are trimmed of surrounding
// whitespace. Lines starting with '#' or ';' are comments.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    // Throwing getters for required keys.
    std::string get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;

    // Defaulting getters for optional keys.
    std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    // Comma-separated list value, item-trimmed.
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

    // Section names starting with the given prefix, in file order.
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

    const std::map<std::string, std::string>& section(const std::string& name) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::vector<std::string> section_order_;
};

std::string trim(const std::string& s);

}  // namespace cphs
