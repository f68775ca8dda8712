#include "cphs/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cphs {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config: malformed section header at line " + std::to_string(lineno));
            current = trim(t.substr(1, t.size() - 2));
            if (current.empty())
                throw std::runtime_error("config: empty section name at line " + std::to_string(lineno));
            if (!cfg.sections_.count(current)) cfg.section_order_.push_back(current);
            cfg.sections_[current];  // create
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected 'key = value' at line " + std::to_string(lineno));
        if (current.empty())
            throw std::runtime_error("config: key outside of any section at line " + std::to_string(lineno));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        cfg.sections_[current][key] = value;
    }
    return cfg;
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) throw std::runtime_error("config: missing section [" + section + "]");
    auto kt = it->second.find(key);
    if (kt == it->second.end())
        throw std::runtime_error("config: missing key '" + key + "' in section [" + section + "]");
    return kt->second;
}

namespace {

double parse_double(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: '" + raw + "' is not a number (" + where + ")");
    }
}

std::int64_t parse_int(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: '" + raw + "' is not an integer (" + where + ")");
    }
}

std::uint64_t parse_u64(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: '" + raw + "' is not an unsigned integer (" + where + ")");
    }
}

bool parse_bool(const std::string& raw, const std::string& where) {
    std::string v = raw;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw std::runtime_error("config: '" + raw + "' is not a boolean (" + where + ")");
}

}  // namespace

double Config::get_double(const std::string& s, const std::string& k) const {
    return parse_double(get(s, k), s + "." + k);
}
std::int64_t Config::get_int(const std::string& s, const std::string& k) const {
    return parse_int(get(s, k), s + "." + k);
}
std::uint64_t Config::get_u64(const std::string& s, const std::string& k) const {
    return parse_u64(get(s, k), s + "." + k);
}
bool Config::get_bool(const std::string& s, const std::string& k) const {
    return parse_bool(get(s, k), s + "." + k);
}

std::string Config::get(const std::string& s, const std::string& k, const std::string& fallback) const {
    return has(s, k) ? get(s, k) : fallback;
}
double Config::get_double(const std::string& s, const std::string& k, double fallback) const {
    return has(s, k) ? get_double(s, k) : fallback;
}
std::int64_t Config::get_int(const std::string& s, const std::string& k, std::int64_t fallback) const {
    return has(s, k) ? get_int(s, k) : fallback;
}
std::uint64_t Config::get_u64(const std::string& s, const std::string& k, std::uint64_t fallback) const {
    return has(s, k) ? get_u64(s, k) : fallback;
}
bool Config::get_bool(const std::string& s, const std::string& k, bool fallback) const {
    return has(s, k) ? get_bool(s, k) : fallback;
}

std::vector<std::string> Config::get_list(const std::string& s, const std::string& k) const {
    std::string raw = get(s, k);
    std::vector<std::string> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<std::string> Config::get_list(const std::string& s, const std::string& k,
                                          const std::vector<std::string>& fallback) const {
    return has(s, k) ? get_list(s, k) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    for (const auto& item : get_list(s, k)) out.push_back(parse_double(item, s + "." + k));
    return out;
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& name : section_order_)
        if (name.rfind(prefix, 0) == 0) out.push_back(name);
    return out;
}

const std::map<std::string, std::string>& Config::section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw std::runtime_error("config: missing section [" + name + "]");
    return it->second;
}

}  // namespace cphs
