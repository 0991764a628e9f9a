#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace steinlab {

// Flat key = value configuration text. '#' starts a comment; keys may not
// repeat; unknown keys are rejected by require_known.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;

    // Throws ConfigError if any present key is not in `allowed`.
    void require_known(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace steinlab
