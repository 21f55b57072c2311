#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arborwalk::config {

// Flat `key = value` text with `#` comments; keys are namespaced dotted
// strings. The canonical form (sorted keys) feeds the provenance hash that
// every output row carries.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::uint64_t seed() const; // mandatory, wall-clock seeding is not supported
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list_or(const std::string& key, std::vector<double> fallback) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string canonical() const;
    std::string hash() const; // 16 hex digits over the canonical form

private:
    std::map<std::string, std::string> kv_;
};

} // namespace arborwalk::config
