#pragma once
// Small text helpers shared by the file writers: shortest round-trip number
// formatting and the line-oriented `key = value` sidecar header.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace lunaforge {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
/// Strict parse of a full token; throws Error(malformed_header) on junk.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

class KeyValueHeader {
public:
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set(const std::string& key, double value) { entries_[key] = format_double(value); }
    void set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    std::string to_text() const;
    static KeyValueHeader parse(std::string_view text);

    static KeyValueHeader read(const std::filesystem::path& path);
    void write(const std::filesystem::path& path) const;

private:
    std::map<std::string, std::string> entries_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lunaforge
